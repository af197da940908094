#pragma once

#include "sonotrans/field_source.hpp"
#include "sonotrans/particle.hpp"

#include <optional>
#include <string>

namespace sonotrans::field {

/// paper_literal: U = -<p^2>/2, the pressure-only form (minima at antinodes).
/// standard: full Gor'kov potential with monopole and dipole terms (minima at nodes for dense beads).
enum class GorkovMode { paper_literal, standard };

struct ContrastFactors {
    double monopole = 0.0;  ///< f1 = 1 - kappa_p / kappa_0
    double dipole = 0.0;    ///< f2 = 2 (rho_p - rho_0) / (2 rho_p + rho_0)
    double volume = 0.0;    ///< m^3
};

ContrastFactors contrast_factors(const ParticleState& particle, const MediumParams& medium);

/// Set when the bead is not small against the wavelength (radius > lambda/10).
std::optional<std::string> validity_warning(const ParticleState& particle, const MediumParams& medium);

struct TrapStiffness {
    Vec3 eigenvalues = Vec3::Zero();  ///< N/m, ascending
    Mat3 hessian = Mat3::Zero();      ///< d2U/dx_i dx_j
    bool positive_definite = false;
    double max_restoring_force = 0.0;  ///< largest force against gravity found below the point, N
    double weight = 0.0;               ///< m g, N
    bool stable = false;               ///< positive definite and max_restoring_force >= weight
};

/// Gor'kov potential, radiation force and trap stiffness over a fixed field source.
/// Caches contrast constants; all queries are const and thread-safe.
class GorkovEvaluator {
public:
    GorkovEvaluator(const FieldSource& source, GorkovMode mode, const ParticleState& particle,
                    double gravity = 9.81);

    [[nodiscard]] double potential(const Vec3& point) const;
    /// -grad U by a five-point central difference with base step h = lambda/100.
    [[nodiscard]] Vec3 force(const Vec3& point) const;
    /// Hessian of U with step lambda/50, eigen-decomposed.
    [[nodiscard]] TrapStiffness stiffness(const Vec3& point) const;
    /// Acoustic pressure gradient from the source (closed form where available).
    [[nodiscard]] Eigen::Vector3cd pressure_gradient(const Vec3& point) const;

    [[nodiscard]] double gradient_step() const { return gradient_step_; }
    [[nodiscard]] double hessian_step() const { return hessian_step_; }
    [[nodiscard]] GorkovMode mode() const { return mode_; }
    [[nodiscard]] const FieldSource& source() const { return source_; }

private:
    void require_clear(const Vec3& point, double reach) const;
    [[nodiscard]] double potential_unchecked(const Vec3& point) const;

    const FieldSource& source_;
    GorkovMode mode_;
    double mass_;
    double gravity_;
    double gradient_step_;
    double hessian_step_;
    double monopole_coeff_;  ///< multiplies |P|^2
    double dipole_coeff_;    ///< multiplies |grad P|^2
};

double gorkov_potential(const FieldSource& source, const Vec3& point, GorkovMode mode,
                        const ParticleState& particle);

Vec3 radiation_force(const FieldSource& source, const Vec3& point, GorkovMode mode,
                     const ParticleState& particle);

TrapStiffness trap_stiffness(const FieldSource& source, const Vec3& point, GorkovMode mode,
                             const ParticleState& particle, double gravity = 9.81);

}  // namespace sonotrans::field
