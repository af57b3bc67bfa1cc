#pragma once

#include "egrow/diagnostics.hpp"
#include "egrow/growth.hpp"

namespace egrow {

/// Constants of the thermomechanical model. Phase convention: phi = +1 is
/// melt, phi = -1 is solid. Densities are in Mg/m^3 and moduli in GPa, so
/// energies per unit mass are in MJ/kg.
struct ThermoParams {
    double L = 0.334;          ///< latent heat
    double c_p = 2.1e-3;       ///< heat capacity
    double T_m0 = 273.15;      ///< stress-free melting temperature
    double kappa = 0.11;       ///< kinetic mobility
    double kappa1 = 4e-6;
    double kappa2 = 2.3e-4;
    double rho_solid = 0.9;
    double rho_melt = 1.0;
    NeoHookeanParams solid{3.52, 6.54};
    NeoHookeanParams melt{1e-3, 17.8};
    double l = 2.0;
    int d = 2;
    /// Gradient threshold below which a node counts as far field.
    double g_min = 0.1;

    void validate() const;
    /// s = (rho_solid / rho_melt)^(1/d); the solid energy is W_solid(s Fe).
    double solid_scale() const;
    /// (1 - H) W_solid(s F) + H W_melt(F).
    BlendedMaterial material() const;
};

/// Fixed undercooling theta_u = L (T_m0 - T) / T_m0 at the dofs of a scalar space.
struct TemperatureField {
    Field undercooling;

    double temperature(std::size_t dof, const ThermoParams& p) const {
        return p.T_m0 * (1.0 - undercooling(dof) / p.L);
    }
    static TemperatureField uniform(const SpacePtr& space, double theta_u);
};

/// Weighted-wire load P = magnitude H_l'(phi) (1 + exp(-sharpness r^2)) for
/// r < radius around (x0, y0).
struct WireLoad {
    double magnitude = 48.0;
    double radius = 0.02;
    double sharpness = 1e4;
    double x0 = 0.0;
    double y0 = 0.0;
    bool active = true;

    double pressure(const Vec2& x, double phi, double l) const;
};

/// c_p T ln(T_m0 / T) + H_l(phi) L (T_m0 - T) / T_m0. Throws for T <= 0.
double f_thermal(double T, double phi, const ThermoParams& p);
/// (1 - H_l(phi)) W_solid(s Fe) + H_l(phi) W_melt(Fe). Throws if inverted.
double f_elastic(const Mat2& Fe, double phi, const ThermoParams& p);
/// kappa1 |grad phi|^2 + kappa2 (phi^2 - 1)^2.
double f_interfacial(const Vec2& grad_phi, double phi, const ThermoParams& p);

/// Nodal driving force on phi (lumped weak form, div term by parts):
/// rho theta H' + rho H' (W_melt - W_solid) - 2 kappa1 div(rho grad phi) + 4 rho kappa2 phi (phi^2 - 1).
Field driving_force(const State& s, const TemperatureField& T, const ThermoParams& p, Exec exec = Exec::Parallel);

/// v_g = kappa grad(phi)/|grad(phi)| force, zero where |grad phi| < g_min.
Field kinetic_velocity(const Field& phi, const Field& force, const ThermoParams& p);

struct MixedResult {
    Field phi;
    Field w;        ///< driving force at the new state
    Field M;        ///< |grad phi| frozen at the start of the step
    NewtonResult info;
};

/// Implicit Euler for phi' + kappa w M = 0 with M = |grad phi| frozen at
/// step start and w the weak driving force at the new phi. Solved as the
/// minimizing movement of the free energy with mobility kappa M; nodes with
/// M < g_min keep their value.
MixedResult evolve_phase_mixed(const State& s, const TemperatureField& T, const ThermoParams& p, double dt,
                               Exec exec = Exec::Parallel, const NewtonOptions& opts = {});

/// Body force per unit mass b = -P e_2 at the dofs of phi's space.
Field wire_body_force(const Field& phi, const WireLoad& load, double l);

/// Lowest vertical coordinate of the phi = 0 curve. Throws if there is none.
double update_y0(const Field& phi);

/// Cauchy stress including the interfacial term -2 kappa1 rho grad phi (x) grad phi.
Mat2 regelation_stress(const Mat2& Fe, double rho, double phi, const Vec2& grad_phi, const ThermoParams& p);

/// int rho (f_thermal + f_elastic + f_interfacial) at the current state.
double total_free_energy(const State& s, const TemperatureField& T, const ThermoParams& p);

struct RegelationSetup {
    ThermoParams thermo;
    TemperatureField temperature;
    WireLoad load;
    BoundaryConditions bcs;
    SpacePtr u_space;
    NewtonOptions newton;
    Exec exec = Exec::Parallel;
};

/// Boundary data of the wire experiment: clamped bottom, rollers on the
/// sides, free top.
BoundaryConditions regelation_bcs();

struct RegelationStepInfo {
    double y0 = 0.0;
    NewtonResult mechanics;
    NewtonResult phase;
};

/// One step: locate the wire, solve equilibrium under the wire load,
/// source-update and transport (rho, Fe, phi) by u, then evolve phi by the
/// kinetic law. Refrozen material keeps the melt's rho and Fe.
State step_regelation(const State& s, RegelationSetup& setup, double dt, RegelationStepInfo* info = nullptr);

}  // namespace egrow
