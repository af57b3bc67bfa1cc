#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "egrow/elasticity.hpp"
#include "egrow/phase.hpp"
#include "egrow/transport.hpp"

namespace egrow {

/// Raised when a stage of a time step fails; `stage()` names the stage.
class StepError : public std::runtime_error {
public:
    StepError(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

/// Unknowns at one time level. phi, rho and Fe share one degree-1 space;
/// u_last is the latest equilibrium increment on the displacement space.
struct State {
    Field phi;
    Field rho;
    Field Fe;
    Field u_last;
    double t = 0.0;
};

/// Policies for the three transported fields when a back-trace leaves R.
struct InflowPolicies {
    OutOfDomainPolicy phi;
    OutOfDomainPolicy rho;
    OutOfDomainPolicy Fe;
};

struct GrowthSpec {
    enum class Mode { Unconstrained, Constrained };
    /// Extension of the growth velocity to R; empty means zero.
    std::function<Vec2(const Vec2&)> growth_velocity;
    double accreted_density = 1.0;
    Mat2 accreted_Fe = Mat2::Identity();
    InflowPolicies inflow;
    Mode mode = Mode::Unconstrained;
    BoundaryTag constrained_tag = BoundaryTag::Bottom;
    /// Boundary growth velocity on the constrained side; the first solve of a
    /// constrained step prescribes u = dt * boundary_velocity there.
    std::function<Vec2(const Vec2&)> boundary_velocity;
    /// When set, Fe is reset to this value at exterior dofs (phi < 0) after
    /// every step. The exterior energy ignores Fe, but its values would
    /// otherwise accumulate the soft exterior's large shear and leak into
    /// the body's edge through interpolation.
    std::optional<Mat2> exterior_Fe;

    void validate() const;
};

/// Everything the stepper needs besides the state and the growth data.
struct MechanicsSetup {
    BlendedMaterial material;
    PhaseParams phase;
    SpacePtr u_space;
    BoundaryConditions bcs;
    NewtonOptions newton;
    Exec exec = Exec::Parallel;
    /// Optional body force per unit mass on the state space.
    const Field* body_force = nullptr;
};

/// Initial state with u_last = 0.
State make_state(Field phi, Field rho, Field Fe, const SpacePtr& u_space);

/// phi_g(x) = phi(x - v_g(x) dt).
Field grow_phase(const State& state, const GrowthSpec& spec, double dt, Exec exec = Exec::Parallel);

/// Set rho and Fe to the accreted values where phi changed from < 0 to >= 0.
std::pair<Field, Field> fill_accreted(const State& before, const Field& phi_after, const GrowthSpec& spec);

/// Solve the incremental problem for the given phi, rho, Fe.
EquilibriumResult equilibrium_for(const Field& phi, const Field& rho, const Field& Fe, const MechanicsSetup& mech,
                                  const BoundaryConditions& bcs, const Field* initial_guess = nullptr);

/// Source update of (rho, Fe) followed by transport of phi, rho, Fe by u.
State transport_by_displacement(const Field& phi, const Field& rho, const Field& Fe, const Field& u,
                                const InflowPolicies& policies, Exec exec);

/// One step of unconstrained growth: grow, fill, solve, source-update,
/// transport by u, regularize.
State step_unconstrained(const State& state, const GrowthSpec& spec, const MechanicsSetup& mech, double dt);

/// One step of constrained growth at spec.constrained_tag ("make room"
/// solve, transport, fill, true solve, transport, regularize).
State step_constrained(const State& state, const GrowthSpec& spec, const MechanicsSetup& mech, double dt);

/// Checks det Fe > 0 where H_l(phi) > 0.05 and rho > 0 everywhere; throws
/// StepError("invariants") otherwise.
void check_state(const State& s, double l);

}  // namespace egrow
