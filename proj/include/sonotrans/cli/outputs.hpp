#pragma once

#include "sonotrans/array_field.hpp"
#include "sonotrans/clock_sync.hpp"
#include "sonotrans/transport.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace sonotrans::cli {

/// Metrics plus provenance of one run. `runtime_seconds` is the only non-reproducible field.
struct RunSummary {
    transport::TransportMetrics metrics;
    std::string config_digest;
    std::string version;
    double runtime_seconds = 0.0;
    std::vector<std::string> warnings;
};

/// Lower-case hex SHA-256 of `text`.
std::string sha256_hex(std::string_view text);

/// Shortest round-trip decimal; "nan" / "inf" for non-finite values.
std::string format_number(double x);

void write_raster_csv(std::ostream& out, const std::vector<field::FieldSample>& raster);
nlohmann::json raster_json(const std::vector<field::FieldSample>& raster);

void write_sync_csv(std::ostream& out, const clock::SyncTrace& trace);
nlohmann::json sync_json(const clock::SyncTrace& trace);
nlohmann::json sync_summary_json(const clock::SyncSummary& summary, clock::LevitationStability stability);

void write_trace_csv(std::ostream& out, const transport::SimTrace& trace);
nlohmann::json trace_json(const transport::SimTrace& trace);

nlohmann::json metrics_json(const transport::TransportMetrics& metrics);
nlohmann::json summary_json(const RunSummary& summary);

/// Writes `content` to `path`, throwing std::runtime_error on failure.
void write_file(const std::string& path, std::string_view content);

}  // namespace sonotrans::cli
