#include "sonotrans/clock_sync.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sonotrans::clock {

namespace {

double percentile(std::vector<double> values, double q) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    // Nearest-rank.
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
    return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

OffsetStats stats_of(const std::vector<double>& abs_values) {
    OffsetStats s;
    s.count = abs_values.size();
    if (abs_values.empty()) return s;
    double sum = 0.0;
    for (double v : abs_values) sum += v;
    s.mean_abs = sum / static_cast<double>(abs_values.size());
    s.p50_abs = percentile(abs_values, 0.50);
    s.p95_abs = percentile(abs_values, 0.95);
    s.p99_abs = percentile(abs_values, 0.99);
    s.max_abs = *std::max_element(abs_values.begin(), abs_values.end());
    return s;
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

// Log-normal parameters matching a target mean and standard deviation.
std::pair<double, double> lognormal_params(double mean, double sigma) {
    const double s2 = std::log1p((sigma * sigma) / (mean * mean));
    return {std::log(mean) - 0.5 * s2, std::sqrt(s2)};
}

}  // namespace

void OscillatorModel::validate() const {
    if (!(nominal_frequency > 0.0)) throw ConfigurationError("oscillator: nominal_frequency must be positive");
    if (!(std::abs(skew_ppm) < 1000.0)) throw ConfigurationError("oscillator: |skew_ppm| must be < 1000");
    if (jitter_sigma < 0.0) throw ConfigurationError("oscillator: jitter_sigma must be >= 0");
}

SyncProtocol SyncProtocol::wifi_message() {
    return {ProtocolKind::message_based, 1.0, 7.8e-3, 2e-3, 0.0};
}

SyncProtocol SyncProtocol::ir_pulse() {
    return {ProtocolKind::pulse_based, 0.1, 0.0, 0.0, 0.8e-6};
}

void SyncProtocol::validate() const {
    if (!(period > 0.0)) throw ConfigurationError("clock: period must be positive");
    if (latency_mean < 0.0 || latency_sigma < 0.0 || detection_jitter < 0.0) {
        throw ConfigurationError("clock: latency and jitter parameters must be >= 0");
    }
    if (kind == ProtocolKind::message_based && latency_sigma > 0.0 && !(latency_mean > 0.0)) {
        throw ConfigurationError("clock: log-normal latency needs a positive latency_mean");
    }
}

std::string_view to_string(ProtocolKind kind) {
    return kind == ProtocolKind::message_based ? "message_based" : "pulse_based";
}

ProtocolKind protocol_from_string(std::string_view name) {
    if (name == "message_based") return ProtocolKind::message_based;
    if (name == "pulse_based") return ProtocolKind::pulse_based;
    throw ConfigurationError("unknown sync protocol '" + std::string(name) + "'");
}

std::string_view to_string(LevitationStability s) {
    switch (s) {
        case LevitationStability::stable: return "stable";
        case LevitationStability::marginal: return "marginal";
        case LevitationStability::unstable: return "unstable";
    }
    return "unstable";
}

LatencySampler::LatencySampler(const SyncProtocol& protocol, std::uint64_t seed)
    : protocol_(protocol), rng_(make_engine(seed, 0x5ca1ab1e)) {
    protocol_.validate();
    if (protocol_.kind == ProtocolKind::message_based && protocol_.latency_sigma > 0.0) {
        const auto [mu, s] = lognormal_params(protocol_.latency_mean, protocol_.latency_sigma);
        lognormal_ = std::lognormal_distribution<double>(mu, s);
    }
    if (protocol_.kind == ProtocolKind::pulse_based && protocol_.detection_jitter > 0.0) {
        normal_ = std::normal_distribution<double>(0.0, protocol_.detection_jitter);
    }
}

double LatencySampler::operator()() {
    if (protocol_.kind == ProtocolKind::message_based) {
        return protocol_.latency_sigma > 0.0 ? lognormal_(rng_) : protocol_.latency_mean;
    }
    // Optical propagation over a desk is ~1e-9 s and is treated as 0.
    return protocol_.detection_jitter > 0.0 ? normal_(rng_) : 0.0;
}

double SyncTrace::offset_at(double t) const {
    if (records.empty()) return 0.0;
    auto it = std::upper_bound(records.begin(), records.end(), t,
                               [](double value, const SyncRecord& r) { return value < r.t; });
    if (it == records.begin()) return records.front().offset;
    const SyncRecord& r = *std::prev(it);
    return r.offset + relative_skew * (t - r.t);
}

std::size_t SyncTrace::sync_count() const {
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(),
                                                  [](const SyncRecord& r) { return r.event == SyncEvent::sync; }));
}

SyncTrace simulate_sync(const OscillatorModel& leader, const OscillatorModel& follower,
                        const SyncProtocol& protocol, double duration, double sample_interval) {
    leader.validate();
    follower.validate();
    protocol.validate();
    if (!(duration > 0.0)) throw ConfigurationError("simulate_sync: duration must be positive");
    if (!(sample_interval > 0.0)) sample_interval = protocol.period / 10.0;

    SyncTrace trace;
    trace.relative_skew = (follower.skew_ppm - leader.skew_ppm) * 1e-6;
    trace.frequency = leader.nominal_frequency;

    auto leader_rng = make_engine(leader.rng_seed, 1);
    auto follower_rng = make_engine(follower.rng_seed, 2);
    std::normal_distribution<double> unit_normal(0.0, 1.0);
    LatencySampler sync_sampler(protocol, follower.rng_seed);

    // Per-tick random walk aggregated over an interval: variance sigma^2 f tau per board.
    auto walk = [&](double tau) {
        double step = 0.0;
        if (follower.jitter_sigma > 0.0) {
            step += follower.jitter_sigma * std::sqrt(follower.nominal_frequency * tau) * unit_normal(follower_rng);
        }
        if (leader.jitter_sigma > 0.0) {
            step -= leader.jitter_sigma * std::sqrt(leader.nominal_frequency * tau) * unit_normal(leader_rng);
        }
        return step;
    };

    double base_time = 0.0;
    double base_offset = follower.initial_offset - leader.initial_offset;
    double last_event_time = 0.0;
    double wander = 0.0;  // accumulated random walk since the last correction

    auto emit = [&](double t, SyncEvent event) {
        const double offset = base_offset + trace.relative_skew * (t - base_time) + wander;
        trace.records.push_back({t, offset, offset_to_phase_error(offset, trace.frequency), event});
    };

    emit(0.0, SyncEvent::drift);

    // Merge two arithmetic event streams by integer index to avoid accumulated rounding.
    std::uint64_t next_sync = 1;
    std::uint64_t next_sample = 1;
    const double coincide = 1e-9 * std::min(protocol.period, sample_interval);
    while (true) {
        const double t_sync = static_cast<double>(next_sync) * protocol.period;
        const double t_sample = static_cast<double>(next_sample) * sample_interval;
        const double t = std::min(t_sync, t_sample);
        if (t > duration) break;

        wander += walk(t - last_event_time);
        last_event_time = t;

        const bool is_sync = t_sync <= t_sample + coincide;
        if (is_sync) {
            base_offset = sync_sampler();
            base_time = t;
            wander = 0.0;
            emit(t, SyncEvent::sync);
            ++next_sync;
            if (std::abs(t_sample - t_sync) <= coincide) ++next_sample;
        } else {
            emit(t, SyncEvent::drift);
            ++next_sample;
        }
    }
    return trace;
}

double offset_to_phase_error(double offset, double frequency) {
    if (!(frequency > 0.0)) throw ConfigurationError("offset_to_phase_error: frequency must be positive");
    const double cycles = frequency * offset;
    return wrap_phase(kTwoPi * (cycles - std::floor(cycles)));
}

double phase_error_to_node_shift(double phase_error, const MediumParams& medium) {
    return phase_error / (2.0 * medium.wavenumber());
}

SyncSummary summarize(const SyncTrace& trace, const MediumParams& medium) {
    SyncSummary summary;
    std::vector<double> at_sync;
    std::vector<double> all;
    std::vector<double> shifts;
    bool synced = false;
    for (const auto& r : trace.records) {
        if (r.event == SyncEvent::sync) {
            synced = true;
            at_sync.push_back(std::abs(r.offset));
        }
        if (!synced) continue;
        all.push_back(std::abs(r.offset));
        shifts.push_back(std::abs(phase_error_to_node_shift(wrap_angle(r.phase_error), medium)));
    }
    summary.at_sync = stats_of(at_sync);
    summary.all_samples = stats_of(all);
    summary.node_shift_p95 = percentile(shifts, 0.95);
    return summary;
}

LevitationStability classify_levitation_stability(const SyncTrace& trace, const MediumParams& medium) {
    if (trace.records.empty()) throw ConfigurationError("classify_levitation_stability: empty trace");
    std::vector<double> shifts;
    shifts.reserve(trace.records.size());
    for (const auto& r : trace.records) {
        shifts.push_back(std::abs(phase_error_to_node_shift(wrap_angle(r.phase_error), medium)));
    }
    const double p95 = percentile(std::move(shifts), 0.95);
    const double lambda = medium.wavelength();
    if (p95 < lambda / 20.0) return LevitationStability::stable;
    if (p95 < lambda / 8.0) return LevitationStability::marginal;
    return LevitationStability::unstable;
}

}  // namespace sonotrans::clock
