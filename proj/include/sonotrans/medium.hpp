#pragma once

#include "sonotrans/errors.hpp"
#include "sonotrans/geometry.hpp"

namespace sonotrans {

/// Propagation medium and carrier. Defaults: air at room temperature, 40 kHz.
struct MediumParams {
    double speed_of_sound = 343.0;  ///< m/s
    double density = 1.2;           ///< kg/m^3
    double frequency = 40000.0;     ///< Hz

    [[nodiscard]] double wavelength() const { return speed_of_sound / frequency; }
    [[nodiscard]] double wavenumber() const { return kTwoPi * frequency / speed_of_sound; }
    [[nodiscard]] double angular_frequency() const { return kTwoPi * frequency; }

    void validate() const {
        if (!(speed_of_sound > 0.0) || !(density > 0.0) || !(frequency > 0.0)) {
            throw ConfigurationError("medium: speed_of_sound, density and frequency must be positive");
        }
    }

    bool operator==(const MediumParams&) const = default;
};

}  // namespace sonotrans
