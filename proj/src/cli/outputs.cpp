#include "sonotrans/cli/outputs.hpp"

#include <openssl/evp.h>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <array>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace sonotrans::cli {

using nlohmann::json;

namespace {

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json vec_json(const Vec3& v) { return {{"x", v.x()}, {"y", v.y()}, {"z", v.z()}}; }

std::string_view event_name(clock::SyncEvent e) { return e == clock::SyncEvent::sync ? "sync" : "drift"; }

}  // namespace

std::string sha256_hex(std::string_view text) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    if (EVP_Digest(text.data(), text.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    std::string hex;
    hex.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

std::string format_number(double x) { return fmt::format("{}", x); }

void write_raster_csv(std::ostream& out, const std::vector<field::FieldSample>& raster) {
    out << "x,y,z,re,im,abs,gorkov\n";
    for (const auto& s : raster) {
        fmt::print(out, "{},{},{},{},{},{},{}\n", s.point.x(), s.point.y(), s.point.z(), s.complex_pressure.real(),
                   s.complex_pressure.imag(), s.magnitude, s.gorkov_u);
    }
}

json raster_json(const std::vector<field::FieldSample>& raster) {
    json cells = json::array();
    for (const auto& s : raster) {
        cells.push_back({{"x", s.point.x()},
                         {"y", s.point.y()},
                         {"z", s.point.z()},
                         {"re", number_or_null(s.complex_pressure.real())},
                         {"im", number_or_null(s.complex_pressure.imag())},
                         {"abs", number_or_null(s.magnitude)},
                         {"gorkov", number_or_null(s.gorkov_u)}});
    }
    return {{"cells", cells}};
}

void write_sync_csv(std::ostream& out, const clock::SyncTrace& trace) {
    out << "t,offset_s,phase_error_rad,event\n";
    for (const auto& r : trace.records) {
        fmt::print(out, "{},{},{},{}\n", r.t, r.offset, r.phase_error, event_name(r.event));
    }
}

json sync_json(const clock::SyncTrace& trace) {
    json records = json::array();
    for (const auto& r : trace.records) {
        records.push_back({{"t", r.t}, {"offset_s", r.offset}, {"phase_error_rad", r.phase_error},
                           {"event", event_name(r.event)}});
    }
    return {{"relative_skew", trace.relative_skew}, {"frequency", trace.frequency}, {"records", records}};
}

json sync_summary_json(const clock::SyncSummary& summary, clock::LevitationStability stability) {
    auto stats = [](const clock::OffsetStats& s) {
        return json{{"count", s.count},          {"mean_abs_s", s.mean_abs}, {"p50_abs_s", s.p50_abs},
                    {"p95_abs_s", s.p95_abs},    {"p99_abs_s", s.p99_abs},   {"max_abs_s", s.max_abs}};
    };
    return {{"at_sync", stats(summary.at_sync)},
            {"all_samples", stats(summary.all_samples)},
            {"node_shift_p95_m", summary.node_shift_p95},
            {"levitation_stability", clock::to_string(stability)}};
}

void write_trace_csv(std::ostream& out, const transport::SimTrace& trace) {
    out << "t,x_L,y_L,th_L,x_F,y_F,th_F,px,py,pz,trap_x,trap_y,trap_z,node_shift,field_abs\n";
    for (const auto& s : trace.samples) {
        fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", s.t, s.leader.x, s.leader.y, s.leader.theta,
                   s.follower.x, s.follower.y, s.follower.theta, s.particle_position.x(), s.particle_position.y(),
                   s.particle_position.z(), s.trap_center.x(), s.trap_center.y(), s.trap_center.z(), s.node_shift,
                   s.field_abs);
    }
}

json trace_json(const transport::SimTrace& trace) {
    json samples = json::array();
    for (const auto& s : trace.samples) {
        samples.push_back({{"t", s.t},
                           {"x_L", s.leader.x},
                           {"y_L", s.leader.y},
                           {"th_L", s.leader.theta},
                           {"x_F", number_or_null(s.follower.x)},
                           {"y_F", number_or_null(s.follower.y)},
                           {"th_F", number_or_null(s.follower.theta)},
                           {"px", s.particle_position.x()},
                           {"py", s.particle_position.y()},
                           {"pz", s.particle_position.z()},
                           {"trap_x", s.trap_center.x()},
                           {"trap_y", s.trap_center.y()},
                           {"trap_z", s.trap_center.z()},
                           {"node_shift", s.node_shift},
                           {"field_abs", s.field_abs}});
    }
    return {{"dt", trace.dt}, {"capture_radius", trace.capture_radius}, {"samples", samples}};
}

json metrics_json(const transport::TransportMetrics& m) {
    return {{"retained", m.retained},
            {"oscillation_amplitude", vec_json(m.oscillation_amplitude)},
            {"mean_lag", number_or_null(m.mean_lag)},
            {"transport_time", number_or_null(m.transport_time)}};
}

json summary_json(const RunSummary& s) {
    return {{"metrics", metrics_json(s.metrics)},
            {"config_digest", s.config_digest},
            {"version", s.version},
            {"runtime_seconds", s.runtime_seconds},
            {"warnings", s.warnings}};
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write to " + path + " failed");
}

}  // namespace sonotrans::cli
