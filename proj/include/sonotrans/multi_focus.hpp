#pragma once

#include "sonotrans/array_field.hpp"

#include <span>
#include <vector>

namespace sonotrans::field {

struct MultiFocusResult {
    std::vector<double> phases;             ///< flattened over arrays, element order
    std::vector<double> target_magnitudes;  ///< |P| at each target for `phases`
    int iterations = 0;
    bool converged = false;
};

/// Phase-only Gerchberg-Saxton retrieval with per-target amplitude balancing.
/// Returns the best iterate (largest weakest-target magnitude) seen within the budget.
MultiFocusResult multi_focus_solver(std::span<const PhasedArray> arrays, std::span<const Vec3> targets,
                                    int iterations, const AmplitudeModel& model,
                                    const MediumParams& medium, double tolerance = 1e-10);

/// Copies `phases` (flattened, element order) into the arrays.
std::vector<PhasedArray> apply_phases(std::span<const PhasedArray> arrays, std::span<const double> phases);

/// Reference: elements split into equal contiguous groups, each naively focused on one target.
/// Returns |P| at each target.
std::vector<double> split_aperture_baseline(std::span<const PhasedArray> arrays,
                                            std::span<const Vec3> targets, const AmplitudeModel& model,
                                            const MediumParams& medium);

}  // namespace sonotrans::field
