#include "sonotrans/standing_wave.hpp"

#include <cmath>

namespace sonotrans::field {

double standing_wave_pressure(double x, double t, double amplitude, const MediumParams& medium,
                              double relative_phase) {
    const double half = 0.5 * relative_phase;
    // Sum of two travelling waves of amplitude P0/2 each.
    return 2.0 * (0.5 * amplitude) * std::cos(medium.wavenumber() * x + half) *
           std::cos(medium.angular_frequency() * t + half);
}

PlaneStandingWave::PlaneStandingWave(double amplitude, MediumParams medium, double relative_phase)
    : amplitude_(amplitude), medium_(medium), relative_phase_(relative_phase) {
    medium_.validate();
    if (amplitude_ < 0.0) throw ConfigurationError("standing wave amplitude must be non-negative");
}

Complex PlaneStandingWave::pressure(const Vec3& point) const {
    const double half = 0.5 * relative_phase_;
    return amplitude_ * std::cos(medium_.wavenumber() * point.x() + half) * std::polar(1.0, half);
}

PressureSample PlaneStandingWave::sample(const Vec3& point, double) const {
    const double half = 0.5 * relative_phase_;
    const double kx = medium_.wavenumber() * point.x() + half;
    const Complex rot = std::polar(1.0, half);
    PressureSample out;
    out.value = amplitude_ * std::cos(kx) * rot;
    out.gradient[0] = -amplitude_ * medium_.wavenumber() * std::sin(kx) * rot;
    return out;
}

}  // namespace sonotrans::field
