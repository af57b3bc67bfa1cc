#include "egrow/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace egrow {

namespace {

struct NamedKind {
    const char* name;
    ScenarioKind kind;
};
constexpr NamedKind kKinds[] = {
    {"relax_prestressed", ScenarioKind::RelaxPrestressed},
    {"non_normal_fixed", ScenarioKind::NonNormalFixed},
    {"non_normal_oscillating", ScenarioKind::NonNormalOscillating},
    {"regelation_wire", ScenarioKind::RegelationWire},
};

[[noreturn]] void bad(const std::string& key, const std::string& why) { throw ConfigError(key + ": " + why); }

void require_positive(const std::string& key, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) bad(key, "must be positive");
}

}  // namespace

ScenarioKind scenario_kind(const std::string& name) {
    for (const auto& k : kKinds)
        if (name == k.name) return k.kind;
    bad("scenario", "unknown scenario '" + name + "'");
}

const char* scenario_name(ScenarioKind kind) {
    for (const auto& k : kKinds)
        if (k.kind == kind) return k.name;
    return "?";
}

std::vector<std::string> scenario_names() {
    std::vector<std::string> out;
    for (const auto& k : kKinds) out.emplace_back(k.name);
    return out;
}

void ScenarioConfig::validate() const {
    if (scenario_kind(scenario) != kind) bad("scenario", "name and kind disagree");
    if (resolution != "desk" && resolution != "paper") bad("resolution", "must be 'desk' or 'paper'");
    if (!(domain.x1 > domain.x0) || !(domain.y1 > domain.y0)) bad("mesh.domain", "must be a non-empty rectangle");
    if (nx < 1) bad("mesh.nx", "must be positive");
    if (ny < 1) bad("mesh.ny", "must be positive");
    if (u_degree != 1 && u_degree != 2) bad("mesh.u_degree", "must be 1 or 2");
    require_positive("time.dt", dt);
    if (steps < 0) bad("time.steps", "must be nonnegative");
    if (output_every < 1) bad("output.output_every", "must be positive");
    require_positive("material.mu", mu);
    if (!(lambda >= 0.0)) bad("material.lambda", "must be nonnegative");
    require_positive("material.exterior_factor", exterior_factor);
    require_positive("phase.l", l);
    require_positive("phase.epsilon_cells", epsilon_cells);
    require_positive("phase.sigma_cells", sigma_cells);
    require_positive("body.rho0", rho0);
    if (!(Fe0.determinant() > 0.0)) bad("body.fe0", "must have positive determinant");
    require_positive("solver.newton_tol", newton_tol);
    if (newton_max_iter < 1) bad("solver.newton_max_iter", "must be positive");
    if (is_growth()) {
        require_positive("growth.v0", v0);
        if (!(window_x1 > window_x0)) bad("growth.window", "must have x1 > x0");
        if (!(std::abs(alpha) < 1.0)) bad("growth.alpha", "must satisfy |alpha| < 1");
        // Single-step back-trace guard.
        if (!(dt * v0 < dx())) bad("time.dt", "dt * v0 must be below the element size");
    }
    if (kind == ScenarioKind::RegelationWire) {
        require_positive("regelation.interface_width", interface_width);
        require_positive("regelation.load_radius", load_radius);
        require_positive("regelation.load_sharpness", load_sharpness);
        if (!(load_magnitude >= 0.0)) bad("regelation.load_magnitude", "must be nonnegative");
        if (!(interface_y > domain.y0 && interface_y < domain.y1)) bad("regelation.interface_y", "must lie inside R");
        require_positive("regelation.kappa", thermo.kappa);
        require_positive("regelation.kappa1", thermo.kappa1);
        require_positive("regelation.kappa2", thermo.kappa2);
        require_positive("regelation.rho_solid", thermo.rho_solid);
        require_positive("regelation.rho_melt", thermo.rho_melt);
        if (thermo.rho_solid == thermo.rho_melt) bad("regelation.rho_melt", "must differ from rho_solid");
        require_positive("regelation.mu_solid", thermo.solid.mu);
        require_positive("regelation.lambda_solid", thermo.solid.lambda);
        require_positive("regelation.mu_melt", thermo.melt.mu);
        require_positive("regelation.lambda_melt", thermo.melt.lambda);
        require_positive("regelation.latent_heat", thermo.L);
        require_positive("regelation.T_m0", thermo.T_m0);
    }
}

void ScenarioConfig::use_paper_resolution() {
    resolution = "paper";
    const double h = kind == ScenarioKind::RegelationWire ? 1e-3 : 1.6e-3;
    nx = std::max(1, static_cast<int>(std::lround(domain.width() / h)));
    ny = std::max(1, static_cast<int>(std::lround(domain.height() / h)));
    if (is_growth()) split_steps_for_guard();
}

void ScenarioConfig::split_steps_for_guard() {
    // Keep the back-trace guard dt * v0 < dx with a 10% margin by splitting
    // each step; the output times stay the same.
    const int k = static_cast<int>(std::ceil(v0 * dt / (0.9 * dx())));
    if (k <= 1) return;
    dt /= k;
    steps *= k;
    output_every *= k;
}

ScenarioConfig preset(const std::string& name) {
    ScenarioConfig c;
    c.kind = scenario_kind(name);
    c.scenario = name;
    switch (c.kind) {
        case ScenarioKind::RelaxPrestressed:
            c.domain = {0.0, 2.0, 0.0, 1.0};
            c.nx = 64;
            c.ny = 32;
            c.dt = 1.0;
            c.steps = 3;
            c.body = {0.5, 1.5, 0.0, 0.5};
            c.Fe0 << 1.0, 0.1, 0.0, 1.0;
            break;
        case ScenarioKind::NonNormalFixed:
            c.domain = {0.0, 2.0, 0.0, 1.0};
            c.nx = 128;
            c.ny = 64;
            c.dt = 0.01;
            c.steps = 20;
            c.body = {0.5, 1.5, 0.0, 0.1};
            c.alpha = 0.15;
            c.v0 = 1.0;
            c.window_x0 = 0.5;
            c.window_x1 = 1.5;
            break;
        case ScenarioKind::NonNormalOscillating:
            c.domain = {0.0, 0.3, 0.0, 0.9};
            c.nx = 100;
            c.ny = 300;
            // dt = 0.01 in the reference setup; split in two so that the
            // back-trace stays within one element at this mesh.
            c.dt = 0.005;
            c.steps = 126;
            c.body = {0.12, 0.18, 0.0, 0.03};
            c.alpha = 0.3;
            c.alpha_omega = 20.0;
            c.v0 = 0.5;
            c.window_x0 = 0.12;
            c.window_x1 = 0.18;
            c.output_every = 2;
            break;
        case ScenarioKind::RegelationWire:
            c.domain = {-0.2, 0.2, -0.25, 0.25};
            c.nx = 120;
            c.ny = 150;
            c.dt = 1.0;
            c.steps = 130;
            c.output_every = 5;
            c.thermo = ThermoParams{};
            c.thermo.kappa = 0.11 / c.dt;
            c.mu = c.thermo.solid.mu;
            c.lambda = c.thermo.solid.lambda;
            break;
    }
    return c;
}

double box_signed_distance(const Vec2& x, const Rect& box, const Rect& domain) {
    const double inf = std::numeric_limits<double>::infinity();
    // Distances to the four sides, skipping sides on the domain boundary.
    const double dl = box.x0 <= domain.x0 ? inf : x.x() - box.x0;
    const double dr = box.x1 >= domain.x1 ? inf : box.x1 - x.x();
    const double db = box.y0 <= domain.y0 ? inf : x.y() - box.y0;
    const double dt = box.y1 >= domain.y1 ? inf : box.y1 - x.y();
    const double inside = std::min({dl, dr, db, dt});
    if (box.contains(x)) return inside;
    const double ox = std::max({box.x0 - x.x(), 0.0, x.x() - box.x1});
    const double oy = std::max({box.y0 - x.y(), 0.0, x.y() - box.y1});
    return -std::hypot(ox, oy);
}

double phase_area_below(const Field& phi, double y_cut) {
    const auto& cache = phi.space->cache();
    const Mesh2D& mesh = phi.mesh();
    std::vector<double> a(mesh.num_triangles(), 0.0);
    for (std::size_t t = 0; t < a.size(); ++t) {
        for (std::size_t q = 0; q < cache.num_points(); ++q) {
            const auto& b = cache.rule.points[q];
            if (mesh.point(t, b).y() < y_cut && eval_local(phi, t, b)(0) > 0.0) a[t] += cache.weight(t, q);
        }
    }
    return compensated_sum(a);
}

Simulation::Simulation(ScenarioConfig config) : cfg_(std::move(config)) {
    cfg_.validate();
    // The phase evolution of the regelation model divides weak forms by the
    // lumped mass, which is only consistent on a constant-valence mesh.
    mesh_ = build_rect_mesh(cfg_.domain, cfg_.nx, cfg_.ny,
                            cfg_.kind == ScenarioKind::RegelationWire ? Diagonals::Uniform : Diagonals::Alternating);
    space_ = make_space(mesh_, 1);
    u_space_ = cfg_.u_degree == 1 ? space_ : make_space(mesh_, cfg_.u_degree);
    const Exec exec = cfg_.parallel ? Exec::Parallel : Exec::Serial;
    const double eps = cfg_.epsilon();

    mech_.u_space = u_space_;
    mech_.exec = exec;
    mech_.newton.rel_tol = cfg_.newton_tol;
    mech_.newton.max_iter = cfg_.newton_max_iter;
    mech_.phase = {eps, cfg_.sigma(), cfg_.l};

    if (cfg_.kind == ScenarioKind::RegelationWire) {
        ThermoParams& th = cfg_.thermo;
        th.l = cfg_.l;
        th.g_min = 1e-3 / cfg_.interface_width;
        material_ = th.material();
        const double w = cfg_.interface_width, yi = cfg_.interface_y;
        const double sinv = 1.0 / th.solid_scale();
        Field phi = interpolate_scalar(space_, [&](const Vec2& x) { return std::tanh((x.y() - yi) / w); });
        Field rho(space_, Rank::Scalar), Fe(space_, Rank::Tensor);
        Field theta(space_, Rank::Scalar);
        for (std::size_t i = 0; i < phi.num_dofs(); ++i) {
            const double h = smooth_heaviside(phi(i), th.l);
            rho(i) = (1.0 - h) * th.rho_solid + h * th.rho_melt;
            Fe.set_tensor(i, ((1.0 - h) * sinv + h) * Mat2::Identity());
            // undercooled ice, water at the melting point
            theta(i) = cfg_.undercooling * std::clamp(0.5 * (1.0 - phi(i)), 0.0, 1.0);
        }
        regel_ = std::make_unique<RegelationSetup>();
        regel_->thermo = th;
        regel_->temperature = {std::move(theta)};
        regel_->load = {cfg_.load_magnitude, cfg_.load_radius, cfg_.load_sharpness, 0.0, yi, true};
        regel_->bcs = regelation_bcs();
        regel_->u_space = u_space_;
        regel_->newton = mech_.newton;
        regel_->exec = exec;
        mech_.material = material_;
        mech_.bcs = regel_->bcs;
        state_ = make_state(std::move(phi), std::move(rho), std::move(Fe), u_space_);
        return;
    }

    const NeoHookeanParams solid{cfg_.mu, cfg_.lambda};
    material_ = BlendedMaterial::solid_exterior(solid, ExteriorParams::soft_copy(solid, cfg_.exterior_factor), cfg_.l);
    mech_.material = material_;
    mech_.bcs[BoundaryTag::Bottom] = BoundaryCondition::clamped();

    Field phi = interpolate_scalar(
        space_, [&](const Vec2& x) { return std::tanh(box_signed_distance(x, cfg_.body, cfg_.domain) / eps); });
    phi = regularize(phi, mech_.phase, exec);
    Field rho = make_scalar(space_, cfg_.rho0);
    // The relaxation example prestresses the whole domain; the growth
    // examples start from a stress-free body.
    Field Fe = make_tensor(space_, cfg_.kind == ScenarioKind::RelaxPrestressed ? cfg_.Fe0 : Mat2::Identity());
    state_ = make_state(std::move(phi), std::move(rho), std::move(Fe), u_space_);

    if (cfg_.is_growth()) {
        spec_.mode = GrowthSpec::Mode::Constrained;
        spec_.constrained_tag = BoundaryTag::Bottom;
        spec_.accreted_density = cfg_.rho0;
        spec_.exterior_Fe = Mat2::Identity();
        // The whole diffuse edge of the footprint is pushed up with the
        // window, with a taper in the soft exterior; a step in the boundary
        // data at the body edge would shear the column's flanks every step.
        const double x0 = cfg_.window_x0, x1 = cfg_.window_x1, v0 = cfg_.v0;
        const double margin = 2.0 * eps, taper = 2.0 * eps;
        spec_.boundary_velocity = [=](const Vec2& x) {
            const double d = std::max({x0 - x.x(), x.x() - x1, 0.0});
            const double s = std::clamp((margin + taper - d) / taper, 0.0, 1.0);
            return Vec2(0.0, v0 * s);
        };
        update_growth_spec();
    }
}

void Simulation::update_growth_spec() {
    const double a = cfg_.alpha_at(state_.t);
    Mat2 F;
    F << 1.0, a, 0.0, 1.0;
    spec_.accreted_Fe = F;
    // Material entering through the bottom: the body profile across the
    // window, accreted density and prestrain everywhere (values outside the
    // window only ever meet the exterior energy).
    const double x0 = cfg_.window_x0, x1 = cfg_.window_x1, eps = cfg_.epsilon();
    spec_.inflow.phi = OutOfDomainPolicy::inflow_profile([=](const Vec2& x) {
        FieldValue v(1);
        v << std::tanh(std::min(x.x() - x0, x1 - x.x()) / eps);
        return v;
    });
    spec_.inflow.rho = OutOfDomainPolicy::inflow(cfg_.rho0);
    spec_.inflow.Fe = OutOfDomainPolicy::inflow(F);
    spec_.inflow.rho.conserve_layer = true;
    spec_.inflow.Fe.conserve_layer = true;
    // Only the constrained side feeds material in; the soft exterior can
    // drift through the other walls, which must not create body there.
    for (OutOfDomainPolicy* p : {&spec_.inflow.phi, &spec_.inflow.rho, &spec_.inflow.Fe})
        p->side = spec_.constrained_tag;
}

void Simulation::step() {
    try {
        switch (cfg_.kind) {
            case ScenarioKind::RelaxPrestressed:
                state_ = step_unconstrained(state_, spec_, mech_, cfg_.dt);
                break;
            case ScenarioKind::NonNormalFixed:
            case ScenarioKind::NonNormalOscillating:
                update_growth_spec();
                state_ = step_constrained(state_, spec_, mech_, cfg_.dt);
                break;
            case ScenarioKind::RegelationWire: {
                if (cfg_.load_off_step >= 0 && step_ >= cfg_.load_off_step) regel_->load.active = false;
                RegelationStepInfo info;
                state_ = step_regelation(state_, *regel_, cfg_.dt, &info);
                last_y0_ = regel_->load.active ? info.y0 : std::numeric_limits<double>::quiet_NaN();
                break;
            }
        }
        check_state(state_, cfg_.l);
    } catch (const StepError& e) {
        std::ostringstream msg;
        msg << "step " << step_ + 1 << ": " << e.what();
        throw StepError(e.stage(), msg.str());
    }
    ++step_;
}

std::vector<char> Simulation::interior_mask() const {
    std::vector<char> mask(space_->num_dofs(), 0);
    if (cfg_.kind == ScenarioKind::RegelationWire) {
        std::fill(mask.begin(), mask.end(), 1);
        return mask;
    }
    double height = cfg_.body.height();
    if (cfg_.is_growth()) height += cfg_.v0 * state_.t;
    const double clearance = std::max(0.1 * height, 3.0 * cfg_.dx());
    for (std::size_t i = 0; i < mask.size(); ++i)
        mask[i] = state_.phi(i) > 0.9 && space_->dof_point(i).y() - cfg_.domain.y0 > clearance;
    return mask;
}

DiagnosticsRow Simulation::diagnostics() const {
    DiagnosticsRow r;
    r.step = step_;
    r.t = state_.t;
    r.area = body_area(state_.phi, cfg_.l);
    r.mass = body_mass(state_.phi, state_.rho, cfg_.l);
    const std::vector<char> mask = interior_mask();
    std::vector<double> norms;
    if (cfg_.kind == ScenarioKind::RegelationWire) {
        const Field g = nodal_gradient(state_.phi, space_);
        for (std::size_t i = 0; i < mask.size(); ++i)
            norms.push_back(regelation_stress(state_.Fe.tensor_at(i), state_.rho(i), state_.phi(i),
                                              Vec2(g(i, 0), g(i, 1)), cfg_.thermo)
                                .norm());
        r.y0 = last_y0_;
    } else {
        const std::vector<double> all = stress_norms(state_.phi, state_.rho, state_.Fe, material_);
        for (std::size_t i = 0; i < mask.size(); ++i)
            if (mask[i]) norms.push_back(all[i]);
    }
    if (!norms.empty()) {
        r.max_stress = *std::max_element(norms.begin(), norms.end());
        r.mean_stress = compensated_sum(norms) / static_cast<double>(norms.size());
    }
    if (cfg_.is_growth() && state_.t > 0.0) {
        const double grown = cfg_.v0 * state_.t;
        try {
            r.tilt_slope = column_tilt_slope(extract_interface(state_.phi), cfg_.domain.y0 + 0.1 * grown,
                                             cfg_.domain.y0 + 0.9 * grown);
        } catch (const std::runtime_error&) {
            // too few points in the band this early
        }
    }
    return r;
}

std::vector<DiagnosticsRow> run(const ScenarioConfig& config, OutputSink* sink) {
    Simulation sim(config);
    std::vector<DiagnosticsRow> rows;
    auto emit = [&] {
        rows.push_back(sim.diagnostics());
        if (sink) sink->on_output(sim.step_index(), sim.state(), rows.back());
    };
    emit();
    for (int n = 1; n <= config.steps; ++n) {
        sim.step();
        if (n % config.output_every == 0 || n == config.steps) emit();
    }
    return rows;
}

}  // namespace egrow
