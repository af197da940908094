#pragma once

#include "sonotrans/medium.hpp"

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace sonotrans::clock {

/// One board's oscillator.
struct OscillatorModel {
    double nominal_frequency = 40000.0;  ///< Hz
    double skew_ppm = 0.0;               ///< frequency error
    double jitter_sigma = 0.0;           ///< s per tick, random walk
    double initial_offset = 0.0;         ///< s
    std::uint64_t rng_seed = 0;

    void validate() const;
    bool operator==(const OscillatorModel&) const = default;
};

enum class ProtocolKind { message_based, pulse_based };

struct SyncProtocol {
    ProtocolKind kind = ProtocolKind::pulse_based;
    double period = 0.1;             ///< s between sync events
    double latency_mean = 0.0;       ///< s, one-way (message)
    double latency_sigma = 0.0;      ///< s (message)
    double detection_jitter = 0.0;   ///< s, Gaussian sigma (pulse)

    /// ESP-NOW over Wi-Fi: log-normal one-way latency, mean 7.8 ms, sigma 2 ms, every 1 s.
    static SyncProtocol wifi_message();
    /// FPGA + IR pulse: Gaussian edge-detection jitter sigma 0.8 us, every 0.1 s.
    static SyncProtocol ir_pulse();

    void validate() const;
    bool operator==(const SyncProtocol&) const = default;
};

std::string_view to_string(ProtocolKind kind);
ProtocolKind protocol_from_string(std::string_view name);

enum class SyncEvent { drift, sync };

struct SyncRecord {
    double t = 0.0;
    double offset = 0.0;       ///< dt = follower - leader, s
    double phase_error = 0.0;  ///< rad in [0, 2pi) at the leader's nominal frequency
    SyncEvent event = SyncEvent::drift;
};

/// Time-ordered offsets. Between records the offset drifts linearly at `relative_skew`.
struct SyncTrace {
    std::vector<SyncRecord> records;
    double relative_skew = 0.0;  ///< s/s, follower minus leader
    double frequency = 40000.0;

    /// Offset at time t: last record at or before t plus deterministic drift.
    [[nodiscard]] double offset_at(double t) const;
    [[nodiscard]] std::size_t sync_count() const;
};

/// Discrete-event simulation of two oscillators under a sync protocol.
/// Records a "drift" sample every `sample_interval` (<= 0 picks period / 10) and a "sync"
/// record with the post-correction offset at each sync event.
SyncTrace simulate_sync(const OscillatorModel& leader, const OscillatorModel& follower,
                        const SyncProtocol& protocol, double duration, double sample_interval = 0.0);

/// mod(2 pi f dt, 2 pi).
double offset_to_phase_error(double offset, double frequency);

/// Standing-wave node displacement for relative phase dphi: dphi / (2k).
double phase_error_to_node_shift(double phase_error, const MediumParams& medium);

struct OffsetStats {
    std::size_t count = 0;
    double mean_abs = 0.0;
    double p50_abs = 0.0;
    double p95_abs = 0.0;
    double p99_abs = 0.0;
    double max_abs = 0.0;
};

/// |dt| statistics. `at_sync` covers the residual right after each sync (the protocol's
/// synchronization accuracy); `all_samples` covers every record after the first sync.
struct SyncSummary {
    OffsetStats at_sync;
    OffsetStats all_samples;
    double node_shift_p95 = 0.0;  ///< m, all samples after the first sync, wrapped to the nearest node
};

SyncSummary summarize(const SyncTrace& trace, const MediumParams& medium);

enum class LevitationStability { stable, marginal, unstable };

std::string_view to_string(LevitationStability s);

/// stable if the 95th-percentile node shift < lambda/20, marginal if < lambda/8, else unstable.
/// The shift uses the phase error wrapped to (-pi, pi], i.e. distance to the nearest node.
LevitationStability classify_levitation_stability(const SyncTrace& trace, const MediumParams& medium);

/// Draws one-way message latencies from a protocol's latency model.
class LatencySampler {
public:
    LatencySampler(const SyncProtocol& protocol, std::uint64_t seed);
    double operator()();

private:
    SyncProtocol protocol_;
    std::mt19937_64 rng_;
    std::lognormal_distribution<double> lognormal_;
    std::normal_distribution<double> normal_;
};

}  // namespace sonotrans::clock
