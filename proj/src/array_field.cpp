#include "sonotrans/array_field.hpp"

#include "sonotrans/field_source.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sonotrans::field {

void AmplitudeModel::validate() const {
    if (kind == AmplitudeKind::calibrated_monopole && !(reference_amplitude > 0.0)) {
        throw ConfigurationError("amplitude model: reference_amplitude must be positive");
    }
}

PhasedArray PhasedArray::reposed(const RigidTransform& new_pose) const {
    PhasedArray moved = *this;
    const RigidTransform delta = new_pose * pose.inverse();
    for (auto& element : moved.elements) {
        element.position = delta * element.position;
        element.normal = delta.linear() * element.normal;
    }
    moved.pose = new_pose;
    return moved;
}

PhasedArray build_array(int rows, int cols, double pitch, const RigidTransform& pose) {
    if (rows < 1 || cols < 1) {
        throw ConfigurationError("array: rows and cols must be at least 1");
    }
    if (!(pitch > 0.0)) {
        throw ConfigurationError("array: pitch must be positive");
    }
    PhasedArray array{rows, cols, pitch, pose, {}};
    array.elements.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
    const double x0 = 0.5 * (cols - 1) * pitch;
    const double y0 = 0.5 * (rows - 1) * pitch;
    const Vec3 normal = pose.linear() * Vec3::UnitZ();
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const Vec3 local(c * pitch - x0, r * pitch - y0, 0.0);
            Transducer t;
            t.position = pose * local;
            t.normal = normal;
            array.elements.push_back(t);
        }
    }
    return array;
}

std::vector<double> twin_trap_signature(const PhasedArray& array) {
    std::vector<double> signature(array.size(), 0.0);
    const RigidTransform to_local = array.pose.inverse();
    for (std::size_t i = 0; i < array.size(); ++i) {
        const Vec3 local = to_local * array.elements[i].position;
        if (local.x() > 1e-12) signature[i] = kPi;
    }
    return signature;
}

std::vector<double> uniform_signature(const PhasedArray& array, double sigma) {
    return std::vector<double>(array.size(), sigma);
}

PhasedArray focus_phases(PhasedArray array, const Vec3& target, std::span<const double> signature,
                         const MediumParams& medium) {
    if (signature.size() != array.size()) {
        throw ConfigurationError("focus_phases: signature has " + std::to_string(signature.size()) +
                                 " entries for " + std::to_string(array.size()) + " elements");
    }
    const double k = medium.wavenumber();
    for (std::size_t i = 0; i < array.size(); ++i) {
        auto& element = array.elements[i];
        const double d = (target - element.position).norm();
        if (d < kSingularityGuard) {
            throw SingularityError("focus target coincides with element " + std::to_string(i));
        }
        element.signature = signature[i];
        element.phase = wrap_phase(-k * d + signature[i]);
    }
    return array;
}

PhasedArray with_phase_offset(PhasedArray array, double offset) {
    for (auto& element : array.elements) {
        element.phase = wrap_phase(element.phase + offset);
    }
    return array;
}

double min_element_distance(std::span<const PhasedArray> arrays, const Vec3& point) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& array : arrays) {
        for (const auto& element : array.elements) {
            best = std::min(best, (point - element.position).norm());
        }
    }
    return best;
}

Complex complex_pressure(std::span<const PhasedArray> arrays, const Vec3& point,
                         const AmplitudeModel& model, const MediumParams& medium) {
    const double k = medium.wavenumber();
    const bool monopole = model.kind == AmplitudeKind::calibrated_monopole;
    double re = 0.0;
    double im = 0.0;
    for (const auto& array : arrays) {
        for (const auto& element : array.elements) {
            const double d = (point - element.position).norm();
            if (d < kSingularityGuard) {
                throw SingularityError("field query within 1e-4 m of an element");
            }
            double a = element.amplitude;
            if (monopole) a *= model.reference_amplitude / d;
            const double arg = element.phase + k * d;
            re += a * std::cos(arg);
            im += a * std::sin(arg);
        }
    }
    return {re, im};
}

FieldSample evaluate_field(std::span<const PhasedArray> arrays, const Vec3& point,
                           const AmplitudeModel& model, const MediumParams& medium) {
    FieldSample sample;
    sample.point = point;
    sample.complex_pressure = complex_pressure(arrays, point, model, medium);
    sample.magnitude = std::abs(sample.complex_pressure);
    return sample;
}

ArrayFieldSource::ArrayFieldSource(std::vector<PhasedArray> arrays, AmplitudeModel model, MediumParams medium)
    : arrays_(std::move(arrays)), model_(model), medium_(medium) {
    model_.validate();
    medium_.validate();
}

Complex ArrayFieldSource::pressure(const Vec3& point) const {
    return complex_pressure(arrays_, point, model_, medium_);
}

PressureSample ArrayFieldSource::sample(const Vec3& point, double) const {
    const double k = medium_.wavenumber();
    const bool monopole = model_.kind == AmplitudeKind::calibrated_monopole;
    PressureSample out;
    double re = 0.0;
    double im = 0.0;
    Vec3 grad_re = Vec3::Zero();
    Vec3 grad_im = Vec3::Zero();
    for (const auto& array : arrays_) {
        for (const auto& element : array.elements) {
            const Vec3 r = point - element.position;
            const double d = r.norm();
            if (d < kSingularityGuard) {
                throw SingularityError("field query within 1e-4 m of an element");
            }
            double a = element.amplitude;
            double da = 0.0;
            if (monopole) {
                a *= model_.reference_amplitude / d;
                da = -a / d;
            }
            const double arg = element.phase + k * d;
            const double c = std::cos(arg);
            const double s = std::sin(arg);
            re += a * c;
            im += a * s;
            // d/dd [a e^{i arg}] = (da + i k a) e^{i arg}, times r/d
            const Vec3 dir = r / d;
            grad_re += (da * c - k * a * s) * dir;
            grad_im += (da * s + k * a * c) * dir;
        }
    }
    out.value = {re, im};
    for (int axis = 0; axis < 3; ++axis) out.gradient[axis] = {grad_re[axis], grad_im[axis]};
    return out;
}

double ArrayFieldSource::min_source_distance(const Vec3& point) const {
    return min_element_distance(arrays_, point);
}

}  // namespace sonotrans::field
