#include "sonotrans/gorkov.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace sonotrans::field {

ContrastFactors contrast_factors(const ParticleState& particle, const MediumParams& medium) {
    if (!(particle.radius > 0.0) || !(particle.density > 0.0) || !(particle.sound_speed > 0.0)) {
        throw ConfigurationError("particle: radius, density and sound_speed must be positive");
    }
    const double kappa_medium = 1.0 / (medium.density * medium.speed_of_sound * medium.speed_of_sound);
    const double kappa_particle = 1.0 / (particle.density * particle.sound_speed * particle.sound_speed);
    ContrastFactors f;
    f.monopole = 1.0 - kappa_particle / kappa_medium;
    f.dipole = 2.0 * (particle.density - medium.density) / (2.0 * particle.density + medium.density);
    f.volume = particle.volume();
    return f;
}

std::optional<std::string> validity_warning(const ParticleState& particle, const MediumParams& medium) {
    const double limit = medium.wavelength() / 10.0;
    if (particle.radius > limit) {
        std::ostringstream msg;
        msg << "particle radius " << particle.radius << " m exceeds lambda/10 = " << limit
            << " m; Gor'kov small-particle model is outside its validity range";
        return msg.str();
    }
    return std::nullopt;
}

GorkovEvaluator::GorkovEvaluator(const FieldSource& source, GorkovMode mode, const ParticleState& particle,
                                 double gravity)
    : source_(source),
      mode_(mode),
      mass_(particle.mass()),
      gravity_(gravity),
      gradient_step_(source.medium().wavelength() / 100.0),
      hessian_step_(source.medium().wavelength() / 50.0) {
    const MediumParams& m = source.medium();
    if (mode == GorkovMode::paper_literal) {
        // -(1/2) rho c^2 (<p^2> / rho c^2) with <p^2> = |P|^2 / 2
        monopole_coeff_ = -0.25;
        dipole_coeff_ = 0.0;
    } else {
        const ContrastFactors f = contrast_factors(particle, m);
        const double omega = m.angular_frequency();
        monopole_coeff_ = f.volume * f.monopole / (4.0 * m.density * m.speed_of_sound * m.speed_of_sound);
        dipole_coeff_ = 3.0 * f.volume * f.dipole / (8.0 * m.density * omega * omega);
    }
}

void GorkovEvaluator::require_clear(const Vec3& point, double reach) const {
    if (source_.min_source_distance(point) < reach + kSingularityGuard) {
        throw SingularityError("Gor'kov query within the finite-difference stencil of an element");
    }
}

Eigen::Vector3cd GorkovEvaluator::pressure_gradient(const Vec3& point) const {
    return source_.sample(point, gradient_step_).gradient;
}

double GorkovEvaluator::potential_unchecked(const Vec3& point) const {
    if (mode_ == GorkovMode::paper_literal) return monopole_coeff_ * std::norm(source_.pressure(point));
    const PressureSample s = source_.sample(point, gradient_step_);
    return monopole_coeff_ * std::norm(s.value) - dipole_coeff_ * s.gradient.squaredNorm();
}

double GorkovEvaluator::potential(const Vec3& point) const {
    return potential_unchecked(point);
}

Vec3 GorkovEvaluator::force(const Vec3& point) const {
    const double h = gradient_step_;
    require_clear(point, 2.0 * h);
    Vec3 f;
    for (int axis = 0; axis < 3; ++axis) {
        Vec3 offset = Vec3::Zero();
        offset[axis] = h;
        // Five-point central difference.
        const double near = potential_unchecked(point + offset) - potential_unchecked(point - offset);
        const double far = potential_unchecked(point + 2.0 * offset) - potential_unchecked(point - 2.0 * offset);
        f[axis] = -(8.0 * near - far) / (12.0 * h);
    }
    return f;
}

TrapStiffness GorkovEvaluator::stiffness(const Vec3& point) const {
    const double h = hessian_step_;
    require_clear(point, h);
    const double u0 = potential_unchecked(point);
    Mat3 hess;
    for (int i = 0; i < 3; ++i) {
        Vec3 ei = Vec3::Zero();
        ei[i] = h;
        hess(i, i) = (potential_unchecked(point + ei) - 2.0 * u0 + potential_unchecked(point - ei)) / (h * h);
        for (int j = i + 1; j < 3; ++j) {
            Vec3 ej = Vec3::Zero();
            ej[j] = h;
            const double mixed = potential_unchecked(point + ei + ej) - potential_unchecked(point + ei - ej) -
                                 potential_unchecked(point - ei + ej) + potential_unchecked(point - ei - ej);
            hess(i, j) = hess(j, i) = mixed / (4.0 * h * h);
        }
    }

    TrapStiffness out;
    out.hessian = hess;
    Eigen::SelfAdjointEigenSolver<Mat3> solver(hess, Eigen::EigenvaluesOnly);
    out.eigenvalues = solver.eigenvalues();
    out.positive_definite = out.eigenvalues.minCoeff() > 0.0;
    out.weight = mass_ * gravity_;

    if (out.weight > 0.0) {
        // Largest upward push for downward displacements up to half a wavelength.
        const double lambda = source_.medium().wavelength();
        for (int j = 1; j <= 50; ++j) {
            const Vec3 probe = point - Vec3::UnitZ() * (j * lambda / 100.0);
            if (source_.min_source_distance(probe) < 2.0 * gradient_step_ + kSingularityGuard) break;
            out.max_restoring_force = std::max(out.max_restoring_force, force(probe).z());
        }
    }
    out.stable = out.positive_definite && out.max_restoring_force >= out.weight;
    return out;
}

double gorkov_potential(const FieldSource& source, const Vec3& point, GorkovMode mode,
                        const ParticleState& particle) {
    return GorkovEvaluator(source, mode, particle).potential(point);
}

Vec3 radiation_force(const FieldSource& source, const Vec3& point, GorkovMode mode,
                     const ParticleState& particle) {
    return GorkovEvaluator(source, mode, particle).force(point);
}

TrapStiffness trap_stiffness(const FieldSource& source, const Vec3& point, GorkovMode mode,
                             const ParticleState& particle, double gravity) {
    return GorkovEvaluator(source, mode, particle, gravity).stiffness(point);
}

}  // namespace sonotrans::field
