#pragma once

#include <optional>

#include "egrow/assembly.hpp"
#include "egrow/field.hpp"
#include "egrow/solver.hpp"

namespace egrow {

struct PhaseParams {
    double epsilon = 0.05;  ///< interface thickness
    double sigma = 100.0;   ///< fidelity weight sigma_phi
    double l = 2.0;         ///< sharpness of H_l

    void validate() const;
};

/// H_l(phi) = (1 + tanh(l phi)) / 2.
double smooth_heaviside(double phi, double l);
/// dH_l/dphi = l sech^2(l phi) / 2.
double smooth_heaviside_deriv(double phi, double l);

/// Outward normal -grad(phi)/|grad(phi)| of the phi > 0 region at x, or
/// nullopt where |grad(phi)| <= g_min (far field) or x is outside R.
std::optional<Vec2> interface_normal(const Field& phi, const Vec2& x, double g_min);

/// Reg[phi_bar] = int sigma (phi_bar - phi)^2 + eps/2 |grad phi_bar|^2 + (phi_bar^2 - 1)^2 / (2 eps).
double regularization_energy(const Field& phi_bar, const Field& phi_in, const PhaseParams& p,
                             Exec exec = Exec::Parallel);

/// Minimizer of Reg over the space of phi_in, found by Newton from phi_in.
Field regularize(const Field& phi_in, const PhaseParams& p, Exec exec = Exec::Parallel,
                 const NewtonOptions& opts = {}, NewtonResult* info = nullptr);

/// Body area int H_l(phi) and mass int H_l(phi) rho.
double body_area(const Field& phi, double l);
double body_mass(const Field& phi, const Field& rho, double l);

}  // namespace egrow
