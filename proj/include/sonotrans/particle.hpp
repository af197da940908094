#pragma once

#include "sonotrans/geometry.hpp"

namespace sonotrans {

/// Small rigid sphere carried by the acoustic trap. Defaults describe a 1 mm EPS bead.
struct ParticleState {
    double radius = 1e-3;        ///< m
    double density = 20.0;       ///< kg/m^3, expanded polystyrene
    double sound_speed = 900.0;  ///< m/s, sets the compressibility contrast
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();

    [[nodiscard]] double volume() const { return 4.0 / 3.0 * kPi * radius * radius * radius; }
    [[nodiscard]] double mass() const { return volume() * density; }

    bool operator==(const ParticleState&) const = default;
};

}  // namespace sonotrans
