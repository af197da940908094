#pragma once

#include "sonotrans/array_field.hpp"

#include <Eigen/Core>

#include <limits>
#include <vector>

namespace sonotrans::field {

/// Pressure phasor and its spatial gradient at one point.
struct PressureSample {
    Complex value{};
    Eigen::Vector3cd gradient = Eigen::Vector3cd::Zero();
};

/// Anything that yields a complex pressure phasor at a point.
class FieldSource {
public:
    virtual ~FieldSource() = default;

    [[nodiscard]] virtual Complex pressure(const Vec3& point) const = 0;
    [[nodiscard]] virtual const MediumParams& medium() const = 0;

    /// Pressure plus gradient; the fallback uses central differences with step `h`.
    [[nodiscard]] virtual PressureSample sample(const Vec3& point, double h) const {
        PressureSample out;
        out.value = pressure(point);
        for (int axis = 0; axis < 3; ++axis) {
            Vec3 offset = Vec3::Zero();
            offset[axis] = h;
            out.gradient[axis] = (pressure(point + offset) - pressure(point - offset)) / (2.0 * h);
        }
        return out;
    }

    /// Distance to the nearest point source; +inf for idealized fields without sources.
    [[nodiscard]] virtual double min_source_distance(const Vec3&) const {
        return std::numeric_limits<double>::infinity();
    }
};

/// Superposition of one or more phased arrays under an amplitude model.
class ArrayFieldSource final : public FieldSource {
public:
    ArrayFieldSource(std::vector<PhasedArray> arrays, AmplitudeModel model, MediumParams medium);

    [[nodiscard]] Complex pressure(const Vec3& point) const override;
    /// Closed-form gradient of the monopole sum.
    [[nodiscard]] PressureSample sample(const Vec3& point, double h) const override;
    [[nodiscard]] const MediumParams& medium() const override { return medium_; }
    [[nodiscard]] double min_source_distance(const Vec3& point) const override;

    [[nodiscard]] const std::vector<PhasedArray>& arrays() const { return arrays_; }
    [[nodiscard]] const AmplitudeModel& model() const { return model_; }

private:
    std::vector<PhasedArray> arrays_;
    AmplitudeModel model_;
    MediumParams medium_;
};

}  // namespace sonotrans::field
