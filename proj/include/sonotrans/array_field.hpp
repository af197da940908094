#pragma once

#include "sonotrans/geometry.hpp"
#include "sonotrans/medium.hpp"

#include <complex>
#include <limits>
#include <span>
#include <vector>

namespace sonotrans::field {

using Complex = std::complex<double>;

/// Queries closer than this to an element are outside model validity and rejected.
inline constexpr double kSingularityGuard = 1e-4;

struct Transducer {
    Vec3 position = Vec3::Zero();
    Vec3 normal = Vec3::UnitZ();
    double phase = 0.0;      ///< emission phase, rad in [0, 2pi)
    double amplitude = 1.0;  ///< dimensionless drive level
    double signature = 0.0;  ///< wavefront-shaping shift folded into `phase`, rad
};

/// Planar rows x cols grid of transducers centered on `pose`, emitting along pose +z.
struct PhasedArray {
    int rows = 0;
    int cols = 0;
    double pitch = 0.0;
    RigidTransform pose = RigidTransform::Identity();
    std::vector<Transducer> elements;  ///< row-major, world coordinates

    [[nodiscard]] std::size_t size() const { return elements.size(); }

    /// Same array rigidly moved so its center sits at `new_pose`. Phases are kept.
    [[nodiscard]] PhasedArray reposed(const RigidTransform& new_pose) const;
};

enum class AmplitudeKind { unit, calibrated_monopole };

/// How an element's contribution decays with distance: 1 (unit) or A/d (calibrated monopole).
struct AmplitudeModel {
    AmplitudeKind kind = AmplitudeKind::unit;
    double reference_amplitude = 1.0;  ///< A, Pa*m

    static AmplitudeModel unit() { return {}; }
    static AmplitudeModel calibrated(double reference_amplitude) {
        return {AmplitudeKind::calibrated_monopole, reference_amplitude};
    }

    void validate() const;
    [[nodiscard]] double at_distance(double d) const {
        return kind == AmplitudeKind::unit ? 1.0 : reference_amplitude / d;
    }

    bool operator==(const AmplitudeModel&) const = default;
};

struct FieldSample {
    Vec3 point = Vec3::Zero();
    Complex complex_pressure{};
    double magnitude = 0.0;
    double gorkov_u = std::numeric_limits<double>::quiet_NaN();
};

PhasedArray build_array(int rows, int cols, double pitch,
                        const RigidTransform& pose = RigidTransform::Identity());

/// sigma = pi on the half of the aperture with local x > 0, 0 elsewhere (twin trap).
std::vector<double> twin_trap_signature(const PhasedArray& array);

/// The same sigma on every element.
std::vector<double> uniform_signature(const PhasedArray& array, double sigma = 0.0);

/// Sets phi_i = mod(-k d_i + sigma_i, 2pi) so every element arrives in phase (up to sigma) at `target`.
PhasedArray focus_phases(PhasedArray array, const Vec3& target, std::span<const double> signature,
                         const MediumParams& medium);

/// Adds a constant to every element phase (rewrapped). Models a clock-induced phase error.
PhasedArray with_phase_offset(PhasedArray array, double offset);

/// Distance from `point` to the closest element over all arrays.
double min_element_distance(std::span<const PhasedArray> arrays, const Vec3& point);

/// Complex phasor sum of a(d_i) exp(j(phi_i + k d_i)) over all elements of all arrays.
Complex complex_pressure(std::span<const PhasedArray> arrays, const Vec3& point,
                         const AmplitudeModel& model, const MediumParams& medium);

FieldSample evaluate_field(std::span<const PhasedArray> arrays, const Vec3& point,
                           const AmplitudeModel& model, const MediumParams& medium);

}  // namespace sonotrans::field
