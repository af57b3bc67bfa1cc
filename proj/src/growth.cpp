#include "egrow/growth.hpp"

#include <sstream>

namespace egrow {

void GrowthSpec::validate() const {
    if (!(accreted_density > 0.0)) throw std::invalid_argument("growth: accreted density must be positive");
    if (!(accreted_Fe.determinant() > 0.0)) throw std::invalid_argument("growth: det of accreted Fe must be positive");
}

State make_state(Field phi, Field rho, Field Fe, const SpacePtr& u_space) {
    State s;
    s.phi = std::move(phi);
    s.rho = std::move(rho);
    s.Fe = std::move(Fe);
    s.u_last = make_vector(u_space);
    return s;
}

namespace {

template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StepError&) {
        throw;
    } catch (const SolverError& e) {
        std::ostringstream msg;
        msg << e.what() << " (residual " << e.residual() << " after " << e.iterations()
            << " iterations); try a smaller time step";
        throw StepError(name, msg.str());
    } catch (const std::exception& e) {
        throw StepError(name, e.what());
    }
}

}  // namespace

Field grow_phase(const State& state, const GrowthSpec& spec, double dt, Exec exec) {
    if (!spec.growth_velocity) return state.phi;
    const Field v = interpolate(state.phi.space, Rank::Vector, [&](const Vec2& x) {
        const Vec2 g = spec.growth_velocity(x);
        FieldValue out(2);
        out << g.x(), g.y();
        return out;
    });
    return semi_lagrangian_advect(state.phi, v, dt, spec.inflow.phi, exec);
}

std::pair<Field, Field> fill_accreted(const State& before, const Field& phi_after, const GrowthSpec& spec) {
    Field rho = before.rho;
    Field Fe = before.Fe;
    for (std::size_t i = 0; i < phi_after.num_dofs(); ++i) {
        if (before.phi(i) < 0.0 && phi_after(i) >= 0.0) {
            rho(i) = spec.accreted_density;
            Fe.set_tensor(i, spec.accreted_Fe);
        }
    }
    return {std::move(rho), std::move(Fe)};
}

EquilibriumResult equilibrium_for(const Field& phi, const Field& rho, const Field& Fe, const MechanicsSetup& mech,
                                  const BoundaryConditions& bcs, const Field* initial_guess) {
    ElasticProblem prob;
    prob.material = mech.material;
    prob.phi = &phi;
    prob.rho = &rho;
    prob.Fe = &Fe;
    prob.body_force = mech.body_force;
    prob.bcs = bcs;
    prob.initial_guess = initial_guess;
    return solve_equilibrium(prob, mech.u_space, mech.newton, mech.exec);
}

State transport_by_displacement(const Field& phi, const Field& rho, const Field& Fe, const Field& u,
                                const InflowPolicies& policies, Exec exec) {
    const Field Fe_s = source_update_Fe(Fe, u, exec);
    const Field rho_s = source_update_rho(rho, u, exec);
    // The three fields share one space, so one back-trace serves all.
    const auto trace = back_trace(*phi.space, u, 1.0, exec);
    State out;
    out.phi = advect_traced(phi, trace, policies.phi, exec);
    out.rho = advect_traced(rho_s, trace, policies.rho, exec);
    out.Fe = advect_traced(Fe_s, trace, policies.Fe, exec);
    out.u_last = u;
    return out;
}

namespace {

void reset_exterior_Fe(State& s, const GrowthSpec& spec) {
    if (!spec.exterior_Fe) return;
    for (std::size_t i = 0; i < s.phi.num_dofs(); ++i)
        if (s.phi(i) < 0.0) s.Fe.set_tensor(i, *spec.exterior_Fe);
}

}  // namespace

State step_unconstrained(const State& state, const GrowthSpec& spec, const MechanicsSetup& mech, double dt) {
    if (!(dt > 0.0)) throw StepError("setup", "time step must be positive");
    const Field phi_g = stage("grow_phase", [&] { return grow_phase(state, spec, dt, mech.exec); });
    auto [rho_g, Fe_g] = stage("fill_accreted", [&] { return fill_accreted(state, phi_g, spec); });
    const EquilibriumResult eq =
        stage("solve_equilibrium", [&] { return equilibrium_for(phi_g, rho_g, Fe_g, mech, mech.bcs); });
    State next = stage("transport",
                       [&] { return transport_by_displacement(phi_g, rho_g, Fe_g, eq.u, spec.inflow, mech.exec); });
    next.phi = stage("regularize", [&] { return regularize(next.phi, mech.phase, mech.exec); });
    reset_exterior_Fe(next, spec);
    next.t = state.t + dt;
    return next;
}

State step_constrained(const State& state, const GrowthSpec& spec, const MechanicsSetup& mech, double dt) {
    if (!(dt > 0.0)) throw StepError("setup", "time step must be positive");
    const BoundaryCondition& true_bc = mech.bcs[spec.constrained_tag];
    if (true_bc.kind != BoundaryCondition::Kind::FixedDisplacement)
        throw StepError("setup", "constrained growth needs a fixed-displacement boundary");

    // (1) Displace the growth boundary by the growth velocity to make room.
    BoundaryConditions room = mech.bcs;
    room[spec.constrained_tag] = BoundaryCondition::displacement([&](const Vec2& x) {
        const Vec2 vb = true_bc.profile ? true_bc.profile(x) : true_bc.value;
        const Vec2 vg = spec.boundary_velocity ? spec.boundary_velocity(x) : Vec2::Zero();
        return Vec2(vb + dt * vg);
    });
    // Start Newton from the boundary data carried straight into the domain:
    // the body is mostly translated as a whole.
    const Rect& dom = mech.u_space->mesh().domain();
    const Field guess = interpolate(mech.u_space, Rank::Vector, [&](const Vec2& x) {
        Vec2 p = x;
        switch (spec.constrained_tag) {
            case BoundaryTag::Bottom: p.y() = dom.y0; break;
            case BoundaryTag::Top: p.y() = dom.y1; break;
            case BoundaryTag::Left: p.x() = dom.x0; break;
            case BoundaryTag::Right: p.x() = dom.x1; break;
        }
        const Vec2 v = room[spec.constrained_tag].profile(p);
        FieldValue out(2);
        out << v.x(), v.y();
        return out;
    });
    const EquilibriumResult eq1 = stage(
        "solve_make_room", [&] { return equilibrium_for(state.phi, state.rho, state.Fe, mech, room, &guess); });
    // (2) Transport by the first displacement; inflow fills the gap.
    State mid = stage("transport_make_room", [&] {
        return transport_by_displacement(state.phi, state.rho, state.Fe, eq1.u, spec.inflow, mech.exec);
    });
    // (3) Grow and fill with the true boundary restored.
    mid.t = state.t;
    const Field phi_g = stage("grow_phase", [&] { return grow_phase(mid, spec, dt, mech.exec); });
    auto [rho_g, Fe_g] = stage("fill_accreted", [&] { return fill_accreted(mid, phi_g, spec); });
    // (4) Solve with the true Dirichlet data.
    const EquilibriumResult eq2 =
        stage("solve_equilibrium", [&] { return equilibrium_for(phi_g, rho_g, Fe_g, mech, mech.bcs); });
    // (5) Transport by the second displacement.
    State next = stage("transport",
                       [&] { return transport_by_displacement(phi_g, rho_g, Fe_g, eq2.u, spec.inflow, mech.exec); });
    next.phi = stage("regularize", [&] { return regularize(next.phi, mech.phase, mech.exec); });
    reset_exterior_Fe(next, spec);
    next.t = state.t + dt;
    return next;
}

void check_state(const State& s, double l) {
    for (std::size_t i = 0; i < s.phi.num_dofs(); ++i) {
        const Vec2& x = s.phi.space->dof_point(i);
        std::ostringstream msg;
        if (!(s.rho(i) > 0.0)) {
            msg << "non-positive density at (" << x.x() << ", " << x.y() << ")";
            throw StepError("invariants", msg.str());
        }
        if (smooth_heaviside(s.phi(i), l) > 0.05 && !(s.Fe.tensor_at(i).determinant() > 0.0)) {
            msg << "det Fe <= 0 inside the body at (" << x.x() << ", " << x.y() << ")";
            throw StepError("invariants", msg.str());
        }
    }
}

}  // namespace egrow
