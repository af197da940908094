#pragma once

#include "sonotrans/cli/config.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sonotrans::cli {

enum class OutputFormat { csv, json };

/// Flags shared by every subcommand.
struct CommonOptions {
    std::optional<std::string> config_path;  ///< absent: all defaults
    std::optional<std::string> out_dir;      ///< overrides output_dir from the config
    std::optional<std::uint64_t> seed;       ///< overrides seed from the config
    OutputFormat format = OutputFormat::csv;
};

/// Planar raster: `resolution` x `resolution` points spanning `extent` around `center`.
struct SliceSpec {
    std::string plane = "xz";  ///< xy, xz or yz
    std::optional<Vec3> center;
    double extent = 0.1;  ///< m, full width
    int resolution = 101;
};

struct SweepSpec {
    std::string param;                ///< dotted config path, e.g. "clock.detection_jitter"
    std::vector<std::string> values;  ///< JSON literals
    int replicates = 1;
};

/// Arrays as placed by `field`: the single array at the origin facing +z, or the
/// face-to-face pair along x with the joint point at (separation / 2, 0, 0).
struct FieldSetup {
    std::vector<field::PhasedArray> arrays;
    Vec3 default_center = Vec3::Zero();
};

FieldSetup field_setup(const transport::Scenario& scenario, RunKind kind);

/// Samples pressure and Gor'kov potential on a slice. Cells within the singularity guard
/// of an element are NaN.
std::vector<field::FieldSample> field_raster(const FieldSetup& setup, const transport::Scenario& scenario,
                                             const SliceSpec& slice);

/// Reads the config file (or "{}") and applies the --seed override before validation.
nlohmann::json load_config_document(const CommonOptions& options);

int cmd_field(const CommonOptions& options, const SliceSpec& slice, std::ostream& log);
int cmd_calibrate(const CommonOptions& options, std::ostream& log);
/// 0 retained, 2 dropped (sync-only configs always 0).
int cmd_run(const CommonOptions& options, std::ostream& log);
int cmd_sync(const CommonOptions& options, std::ostream& log);
int cmd_sweep(const CommonOptions& options, const SweepSpec& sweep, std::ostream& log);

/// Entry point. Errors print a diagnostic to stderr and return 1.
int run_cli(int argc, char** argv);

}  // namespace sonotrans::cli
