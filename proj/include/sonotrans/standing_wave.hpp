#pragma once

#include "sonotrans/field_source.hpp"
#include "sonotrans/medium.hpp"

namespace sonotrans::field {

/// Instantaneous pressure of two counter-propagating waves with relative phase `relative_phase`:
/// P0 cos(kx + dphi/2) cos(wt + dphi/2). Reduces to P0 cos(kx) cos(wt) when dphi = 0.
double standing_wave_pressure(double x, double t, double amplitude, const MediumParams& medium,
                              double relative_phase = 0.0);

/// Ideal 1-D standing wave along world x, as a phasor source for the Gor'kov machinery.
class PlaneStandingWave final : public FieldSource {
public:
    PlaneStandingWave(double amplitude, MediumParams medium, double relative_phase = 0.0);

    [[nodiscard]] Complex pressure(const Vec3& point) const override;
    [[nodiscard]] PressureSample sample(const Vec3& point, double h) const override;
    [[nodiscard]] const MediumParams& medium() const override { return medium_; }

    [[nodiscard]] double amplitude() const { return amplitude_; }
    [[nodiscard]] double relative_phase() const { return relative_phase_; }

private:
    double amplitude_;
    MediumParams medium_;
    double relative_phase_;
};

}  // namespace sonotrans::field
