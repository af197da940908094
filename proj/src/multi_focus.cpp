#include "sonotrans/multi_focus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sonotrans::field {

namespace {

struct FlatElement {
    Vec3 position;
    double amplitude;
};

std::vector<FlatElement> flatten(std::span<const PhasedArray> arrays) {
    std::vector<FlatElement> out;
    for (const auto& array : arrays) {
        for (const auto& e : array.elements) out.push_back({e.position, e.amplitude});
    }
    return out;
}

}  // namespace

std::vector<PhasedArray> apply_phases(std::span<const PhasedArray> arrays, std::span<const double> phases) {
    std::vector<PhasedArray> out(arrays.begin(), arrays.end());
    std::size_t index = 0;
    for (auto& array : out) {
        for (auto& e : array.elements) {
            if (index >= phases.size()) throw ConfigurationError("apply_phases: too few phases");
            e.phase = wrap_phase(phases[index++]);
        }
    }
    if (index != phases.size()) throw ConfigurationError("apply_phases: too many phases");
    return out;
}

MultiFocusResult multi_focus_solver(std::span<const PhasedArray> arrays, std::span<const Vec3> targets,
                                    int iterations, const AmplitudeModel& model,
                                    const MediumParams& medium, double tolerance) {
    if (targets.empty()) throw ConfigurationError("multi_focus_solver: no targets");
    if (iterations < 1) throw ConfigurationError("multi_focus_solver: iteration budget must be >= 1");

    const auto elements = flatten(arrays);
    const std::size_t n = elements.size();
    const std::size_t m = targets.size();
    const double k = medium.wavenumber();

    // Propagator from element i to target j: a(d) exp(j k d).
    std::vector<Complex> propagator(m * n);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const double d = (targets[j] - elements[i].position).norm();
            if (d < kSingularityGuard) throw SingularityError("multi-focus target coincides with an element");
            propagator[j * n + i] = elements[i].amplitude * model.at_distance(d) * std::polar(1.0, k * d);
        }
    }

    std::vector<Complex> target_field(m, Complex(1.0, 0.0));
    std::vector<double> weights(m, 1.0);
    std::vector<Complex> emission(n);
    std::vector<double> phases(n, 0.0);
    std::vector<double> magnitudes(m, 0.0);

    MultiFocusResult best;
    double best_floor = -1.0;

    for (int it = 1; it <= iterations; ++it) {
        // Back-propagate the target phasors and keep phase only (uniform emitters).
        double max_change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            Complex acc{};
            for (std::size_t j = 0; j < m; ++j) acc += std::conj(propagator[j * n + i]) * target_field[j];
            const double phase = std::abs(acc) > 0.0 ? std::arg(acc) : 0.0;
            max_change = std::max(max_change, std::abs(wrap_angle(phase - phases[i])));
            phases[i] = phase;
            emission[i] = std::polar(1.0, phase);
        }

        // Forward-propagate and rebalance toward equal magnitudes.
        double mean = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            Complex acc{};
            for (std::size_t i = 0; i < n; ++i) acc += propagator[j * n + i] * emission[i];
            target_field[j] = acc;
            magnitudes[j] = std::abs(acc);
            mean += magnitudes[j] / static_cast<double>(m);
        }
        for (std::size_t j = 0; j < m; ++j) {
            const double mag = std::max(magnitudes[j], std::numeric_limits<double>::min());
            weights[j] *= mean / mag;
            target_field[j] = weights[j] * target_field[j] / mag;
        }

        const double floor = *std::min_element(magnitudes.begin(), magnitudes.end());
        if (floor > best_floor) {
            best_floor = floor;
            best.phases = phases;
            best.target_magnitudes = magnitudes;
        }
        best.iterations = it;
        if (it > 1 && max_change < tolerance) {
            best.converged = true;
            break;
        }
    }

    for (double& p : best.phases) p = wrap_phase(p);
    return best;
}

std::vector<double> split_aperture_baseline(std::span<const PhasedArray> arrays,
                                            std::span<const Vec3> targets, const AmplitudeModel& model,
                                            const MediumParams& medium) {
    if (targets.empty()) throw ConfigurationError("split_aperture_baseline: no targets");
    std::size_t total = 0;
    for (const auto& a : arrays) total += a.size();
    const std::size_t groups = targets.size();

    std::vector<PhasedArray> focused(arrays.begin(), arrays.end());
    const double k = medium.wavenumber();
    std::size_t index = 0;
    for (auto& array : focused) {
        for (auto& e : array.elements) {
            const std::size_t group = std::min(groups - 1, index * groups / total);
            e.phase = wrap_phase(-k * (targets[group] - e.position).norm());
            ++index;
        }
    }
    std::vector<double> out;
    out.reserve(groups);
    for (const auto& t : targets) out.push_back(std::abs(complex_pressure(focused, t, model, medium)));
    return out;
}

}  // namespace sonotrans::field
