#include "egrow/regelation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace egrow {

void ThermoParams::validate() const {
    if (!(kappa > 0.0) || !(kappa1 > 0.0) || !(kappa2 > 0.0))
        throw std::invalid_argument("thermo: kappa, kappa1, kappa2 must be positive");
    if (!(rho_solid > 0.0) || !(rho_melt > 0.0) || rho_solid == rho_melt)
        throw std::invalid_argument("thermo: densities must be positive and differ");
    if (!(L > 0.0) || !(T_m0 > 0.0) || !(c_p >= 0.0)) throw std::invalid_argument("thermo: L, T_m0 must be positive");
    if (d != 2) throw std::invalid_argument("thermo: only d = 2 is supported");
    if (!(g_min > 0.0)) throw std::invalid_argument("thermo: g_min must be positive");
    solid.validate();
    melt.validate();
}

double ThermoParams::solid_scale() const { return std::pow(rho_solid / rho_melt, 1.0 / d); }

BlendedMaterial ThermoParams::material() const {
    return {PhaseMaterial::neo_hookean(melt), PhaseMaterial::neo_hookean(solid, solid_scale()), l};
}

TemperatureField TemperatureField::uniform(const SpacePtr& space, double theta_u) {
    return {make_scalar(space, theta_u)};
}

double WireLoad::pressure(const Vec2& x, double phi, double l) const {
    if (!active) return 0.0;
    const double r2 = (x.x() - x0) * (x.x() - x0) + (x.y() - y0) * (x.y() - y0);
    if (r2 >= radius * radius) return 0.0;
    return magnitude * smooth_heaviside_deriv(phi, l) * (1.0 + std::exp(-sharpness * r2));
}

double f_thermal(double T, double phi, const ThermoParams& p) {
    if (!(T > 0.0)) throw std::domain_error("f_thermal: temperature must be positive");
    return p.c_p * T * std::log(p.T_m0 / T) + smooth_heaviside(phi, p.l) * p.L * (p.T_m0 - T) / p.T_m0;
}

double f_elastic(const Mat2& Fe, double phi, const ThermoParams& p) {
    const double h = smooth_heaviside(phi, p.l);
    return (1.0 - h) * neo_hookean_energy(p.solid_scale() * Fe, p.solid) + h * neo_hookean_energy(Fe, p.melt);
}

double f_interfacial(const Vec2& grad_phi, double phi, const ThermoParams& p) {
    const double w = phi * phi - 1.0;
    return p.kappa1 * grad_phi.squaredNorm() + p.kappa2 * w * w;
}

namespace {

double heaviside_dd(double phi, double l) {
    const double c = std::cosh(l * phi);
    return -l * l * std::tanh(l * phi) / (c * c);
}

std::vector<double> lumped_mass(const FunctionSpace& space) {
    if (space.degree() != 1) throw std::invalid_argument("phase evolution requires a degree-1 space");
    std::vector<double> m(space.num_dofs(), 0.0);
    const Mesh2D& mesh = space.mesh();
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
        for (int v : mesh.triangle(t)) m[v] += mesh.area(t) / 3.0;
    return m;
}

/// Free energy of phi with rho, theta and Delta W frozen at quadrature
/// points, plus an optional lumped mobility term.
class PhaseEnergy final : public EnergyFunctional {
public:
    PhaseEnergy(const State& s, const TemperatureField& T, const ThermoParams& p, Exec exec)
        : space_(*s.phi.space), p_(p), exec_(exec), pat_(AssemblyPattern::get(space_, 1)) {
        const auto& cache = space_.cache();
        nq_ = cache.num_points();
        const std::size_t nt = space_.mesh().num_triangles();
        rho_.resize(nt * nq_);
        theta_.resize(nt * nq_);
        dw_.resize(nt * nq_);
        const double sc = p.solid_scale();
        double rmax = 0.0, tmax = 0.0;
        for (std::size_t t = 0; t < nt; ++t) {
            for (std::size_t q = 0; q < nq_; ++q) {
                const auto& b = cache.rule.points[q];
                const std::size_t k = t * nq_ + q;
                rho_[k] = eval_local(s.rho, t, b)(0);
                theta_[k] = eval_local(T.undercooling, t, b)(0);
                const Mat2 Fe = as_tensor(eval_local(s.Fe, t, b));
                if (!(Fe.determinant() > 0.0)) throw std::domain_error("phase evolution: inverted Fe");
                dw_[k] = neo_hookean_energy(Fe, p.melt) - neo_hookean_energy(sc * Fe, p.solid);
                rmax = std::max(rmax, std::abs(rho_[k]));
                tmax = std::max(tmax, std::abs(theta_[k]));
            }
        }
        const Rect& r = space_.mesh().domain();
        scale_ = std::sqrt(r.width() * r.height()) * space_.mesh().mesh_size() * rmax * std::max(tmax, p.kappa2);
    }

    /// Add sum_i c_i (phi_i - ref_i)^2 / 2.
    void set_mobility(std::vector<double> c, std::vector<double> ref) {
        c_ = std::move(c);
        ref_ = std::move(ref);
    }

    std::size_t size() const override { return space_.num_dofs(); }
    double gradient_scale() const override { return scale_; }

    double value(const Vector& x) const override {
        double e = assemble_energy(pat_, exec_, [&](std::size_t t) {
            double et = 0.0;
            points(t, x, [&](std::size_t k, double w, double v, const Vec2& g, const double*, const Vec2*) {
                const double h = smooth_heaviside(v, p_.l);
                const double dw = v * v - 1.0;
                et += w * rho_[k] * (theta_[k] * h + h * dw_[k] + p_.kappa2 * dw * dw + p_.kappa1 * g.squaredNorm());
            });
            return et;
        });
        if (!c_.empty()) {
            std::vector<double> m(x.size());
            for (Eigen::Index i = 0; i < x.size(); ++i) m[i] = 0.5 * c_[i] * (x[i] - ref_[i]) * (x[i] - ref_[i]);
            e += compensated_sum(m);
        }
        return e;
    }

    void gradient(const Vector& x, Vector& out) const override {
        const int nloc = pat_.local_size();
        assemble_vector(pat_, exec_, out, [&](std::size_t t, double* loc) {
            points(t, x, [&](std::size_t k, double w, double v, const Vec2& g, const double* n, const Vec2* dn) {
                const double hp = smooth_heaviside_deriv(v, p_.l);
                const double dv = rho_[k] * (theta_[k] * hp + hp * dw_[k] + 4.0 * p_.kappa2 * v * (v * v - 1.0));
                for (int a = 0; a < nloc; ++a)
                    loc[a] += w * (dv * n[a] + 2.0 * p_.kappa1 * rho_[k] * g.dot(dn[a]));
            });
        });
        if (!c_.empty())
            for (Eigen::Index i = 0; i < x.size(); ++i) out[i] += c_[i] * (x[i] - ref_[i]);
    }

    void hessian(const Vector& x, SparseMatrix& h) const override {
        const int nloc = pat_.local_size();
        assemble_matrix(pat_, exec_, h, [&](std::size_t t, double* loc) {
            points(t, x, [&](std::size_t k, double w, double v, const Vec2&, const double* n, const Vec2* dn) {
                const double hpp = heaviside_dd(v, p_.l);
                const double c = std::max(
                    0.0, rho_[k] * (theta_[k] * hpp + hpp * dw_[k] + p_.kappa2 * (12.0 * v * v - 4.0)));
                for (int a = 0; a < nloc; ++a)
                    for (int b = 0; b < nloc; ++b)
                        loc[a * nloc + b] +=
                            w * (c * n[a] * n[b] + 2.0 * p_.kappa1 * rho_[k] * dn[a].dot(dn[b]));
            });
        });
        if (!c_.empty())
            for (Eigen::Index i = 0; i < x.size(); ++i) h.coeffRef(i, i) += c_[i];
    }

private:
    template <class Fn>
    void points(std::size_t t, const Vector& x, Fn&& fn) const {
        const auto& cache = space_.cache();
        const auto dofs = space_.element_dofs(t);
        for (std::size_t q = 0; q < nq_; ++q) {
            const double* n = cache.value_row(q);
            const Vec2* dn = cache.grad_row(t, q);
            double v = 0.0;
            Vec2 g = Vec2::Zero();
            for (std::size_t a = 0; a < dofs.size(); ++a) {
                v += n[a] * x[dofs[a]];
                g += x[dofs[a]] * dn[a];
            }
            fn(t * nq_ + q, cache.weight(t, q), v, g, n, dn);
        }
    }

    const FunctionSpace& space_;
    const ThermoParams& p_;
    Exec exec_;
    const AssemblyPattern& pat_;
    std::size_t nq_ = 0;
    std::vector<double> rho_, theta_, dw_;
    std::vector<double> c_, ref_;
    double scale_ = 1.0;
};

Vector coeffs_of(const Field& f) { return Eigen::Map<const Vector>(f.coeffs.data(), f.coeffs.size()); }

Field gradient_magnitude(const Field& phi) {
    const Field g = nodal_gradient(phi, phi.space);
    Field out(phi.space, Rank::Scalar);
    for (std::size_t i = 0; i < out.num_dofs(); ++i) out(i) = std::hypot(g(i, 0), g(i, 1));
    return out;
}

}  // namespace

Field driving_force(const State& s, const TemperatureField& T, const ThermoParams& p, Exec exec) {
    PhaseEnergy e(s, T, p, exec);
    Vector g;
    e.gradient(coeffs_of(s.phi), g);
    const std::vector<double> m = lumped_mass(*s.phi.space);
    Field w(s.phi.space, Rank::Scalar);
    for (std::size_t i = 0; i < w.num_dofs(); ++i) w(i) = g[i] / m[i];
    return w;
}

Field kinetic_velocity(const Field& phi, const Field& force, const ThermoParams& p) {
    const Field g = nodal_gradient(phi, phi.space);
    Field v(phi.space, Rank::Vector);
    for (std::size_t i = 0; i < v.num_dofs(); ++i) {
        const Vec2 gi(g(i, 0), g(i, 1));
        const double n = gi.norm();
        if (n < p.g_min) continue;
        v.set_vector(i, p.kappa * force(i) * gi / n);
    }
    return v;
}

MixedResult evolve_phase_mixed(const State& s, const TemperatureField& T, const ThermoParams& p, double dt, Exec exec,
                               const NewtonOptions& opts) {
    if (!(dt > 0.0)) throw std::invalid_argument("evolve_phase_mixed: dt must be positive");
    p.validate();
    const std::vector<double> m = lumped_mass(*s.phi.space);
    MixedResult out;
    out.M = gradient_magnitude(s.phi);
    const std::size_t n = m.size();
    std::vector<char> fixed(n, 0);
    std::vector<double> c(n, 0.0), ref(s.phi.coeffs);
    for (std::size_t i = 0; i < n; ++i) {
        if (out.M(i) < p.g_min) fixed[i] = 1;
        else c[i] = m[i] / (dt * p.kappa * out.M(i));
    }
    PhaseEnergy energy(s, T, p, exec);
    energy.set_mobility(c, ref);
    out.info = newton_minimize(energy, coeffs_of(s.phi), fixed, opts);
    out.phi = s.phi;
    for (std::size_t i = 0; i < n; ++i) out.phi(i) = out.info.x[i];
    // Recover w: at free nodes from the kinetic law, elsewhere from the
    // weak driving force at the new state.
    State at_new = s;
    at_new.phi = out.phi;
    out.w = driving_force(at_new, T, p, exec);
    for (std::size_t i = 0; i < n; ++i)
        if (!fixed[i]) out.w(i) = -(out.phi(i) - s.phi(i)) / (dt * p.kappa * out.M(i));
    return out;
}

Field wire_body_force(const Field& phi, const WireLoad& load, double l) {
    Field b(phi.space, Rank::Vector);
    for (std::size_t i = 0; i < b.num_dofs(); ++i)
        b.set_vector(i, Vec2(0.0, -load.pressure(phi.space->dof_point(i), phi(i), l)));
    return b;
}

double update_y0(const Field& phi) { return lowest_point(extract_interface(phi)); }

Mat2 regelation_stress(const Mat2& Fe, double rho, double phi, const Vec2& grad_phi, const ThermoParams& p) {
    return blended_cauchy_stress(p.material(), Fe, rho, phi) - 2.0 * p.kappa1 * rho * grad_phi * grad_phi.transpose();
}

double total_free_energy(const State& s, const TemperatureField& T, const ThermoParams& p) {
    const auto& cache = s.phi.space->cache();
    std::vector<double> e(s.phi.mesh().num_triangles(), 0.0);
    for (std::size_t t = 0; t < e.size(); ++t) {
        for (std::size_t q = 0; q < cache.num_points(); ++q) {
            const auto& b = cache.rule.points[q];
            const double phi = eval_local(s.phi, t, b)(0);
            const double rho = eval_local(s.rho, t, b)(0);
            const double theta = eval_local(T.undercooling, t, b)(0);
            const FieldGradient g = grad_local(s.phi, t, b);
            const double temp = p.T_m0 * (1.0 - theta / p.L);
            e[t] += cache.weight(t, q) * rho *
                    (f_thermal(temp, phi, p) + f_elastic(as_tensor(eval_local(s.Fe, t, b)), phi, p) +
                     f_interfacial(Vec2(g(0, 0), g(0, 1)), phi, p));
        }
    }
    return compensated_sum(e);
}

BoundaryConditions regelation_bcs() {
    BoundaryConditions bcs;
    bcs[BoundaryTag::Bottom] = BoundaryCondition::clamped();
    bcs[BoundaryTag::Left] = BoundaryCondition::roller(0);
    bcs[BoundaryTag::Right] = BoundaryCondition::roller(0);
    bcs[BoundaryTag::Top] = BoundaryCondition::free();
    return bcs;
}

namespace {
template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StepError&) {
        throw;
    } catch (const std::exception& e) {
        throw StepError(name, e.what());
    }
}
}  // namespace

State step_regelation(const State& s, RegelationSetup& setup, double dt, RegelationStepInfo* info) {
    const ThermoParams& p = setup.thermo;
    if (setup.load.active) setup.load.y0 = stage("update_y0", [&] { return update_y0(s.phi); });
    const Field b = wire_body_force(s.phi, setup.load, p.l);
    MechanicsSetup mech;
    mech.material = p.material();
    mech.u_space = setup.u_space;
    mech.bcs = setup.bcs;
    mech.newton = setup.newton;
    mech.exec = setup.exec;
    mech.body_force = &b;
    const EquilibriumResult eq =
        stage("solve_equilibrium", [&] { return equilibrium_for(s.phi, s.rho, s.Fe, mech, setup.bcs); });
    const InflowPolicies nearest{OutOfDomainPolicy::nearest(), OutOfDomainPolicy::nearest(),
                                 OutOfDomainPolicy::nearest()};
    State next = stage("transport", [&] {
        return transport_by_displacement(s.phi, s.rho, s.Fe, eq.u, nearest, setup.exec);
    });
    MixedResult mixed = stage("evolve_phase_mixed", [&] {
        return evolve_phase_mixed(next, setup.temperature, p, dt, setup.exec, setup.newton);
    });
    next.phi = std::move(mixed.phi);
    next.t = s.t + dt;
    if (info) {
        info->y0 = setup.load.y0;
        info->mechanics = eq.info;
        info->phase = std::move(mixed.info);
    }
    return next;
}

}  // namespace egrow
