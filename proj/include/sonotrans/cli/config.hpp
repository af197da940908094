#pragma once

#include "sonotrans/transport.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace sonotrans::cli {

/// Schema violation. `key()` is the dotted path of the offending entry, e.g. "array.pitch".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
    [[nodiscard]] const std::string& key() const { return key_; }

private:
    std::string key_;
};

enum class RunKind { independent, cooperative, sync };

std::string_view to_string(RunKind kind);

/// One scenario file, fully populated with defaults.
struct ScenarioConfig {
    RunKind kind = RunKind::independent;
    transport::Scenario scenario;
    /// Unset means "resolve from the calibration file, or calibrate in-process".
    std::optional<double> reference_amplitude;
    bool unit_amplitude = false;
    std::optional<std::string> calibration_file;
    std::optional<std::uint64_t> seed;
    std::string output_dir = "out";

    /// True when the run draws random numbers (clock simulation active).
    [[nodiscard]] bool stochastic() const;

    bool operator==(const ScenarioConfig&) const = default;
};

/// Parses and validates config text. Unknown keys are rejected; a missing seed on a
/// stochastic run is an error.
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig parse_config_document(const nlohmann::json& doc);

/// Canonical JSON form with every field present. parse_config(serialize_config(c)) == c.
nlohmann::json to_json(const ScenarioConfig& config);
std::string serialize_config(const ScenarioConfig& config);

/// Sets `path` (dot separated) in a JSON document, creating objects on the way.
void set_json_path(nlohmann::json& doc, std::string_view path, const nlohmann::json& value);

/// Applies the seed to both oscillators and resolves the amplitude model.
/// `calibration_dir` is where a relative calibration_file is looked up.
transport::Scenario resolve_scenario(const ScenarioConfig& config, const std::string& calibration_dir = ".");

/// SplitMix64 step, used to derive per-replicate seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace sonotrans::cli
