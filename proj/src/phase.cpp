#include "egrow/phase.hpp"

#include <cmath>
#include <stdexcept>

namespace egrow {

void PhaseParams::validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("phase: epsilon must be positive");
    if (!(sigma > 0.0)) throw std::invalid_argument("phase: sigma must be positive");
    if (!(l > 0.0)) throw std::invalid_argument("phase: l must be positive");
}

double smooth_heaviside(double phi, double l) { return 0.5 * (1.0 + std::tanh(l * phi)); }

double smooth_heaviside_deriv(double phi, double l) {
    const double c = std::cosh(l * phi);
    return 0.5 * l / (c * c);
}

std::optional<Vec2> interface_normal(const Field& phi, const Vec2& x, double g_min) {
    const PointLocation loc = phi.mesh().locate(x);
    if (!loc.inside) return std::nullopt;
    const FieldGradient g = grad_local(phi, loc.triangle, loc.bary);
    const Vec2 grad(g(0, 0), g(0, 1));
    const double n = grad.norm();
    if (n <= g_min) return std::nullopt;
    return Vec2(-grad / n);
}

namespace {

class RegFunctional final : public EnergyFunctional {
public:
    RegFunctional(const Field& phi_in, const PhaseParams& p, Exec exec)
        : in_(phi_in), p_(p), exec_(exec), pat_(AssemblyPattern::get(*phi_in.space, 1)) {}

    std::size_t size() const override { return in_.num_dofs(); }

    double gradient_scale() const override {
        // Fidelity-term gradient of a unit perturbation over the domain.
        const Rect& r = in_.mesh().domain();
        return p_.sigma * std::sqrt(r.width() * r.height()) * in_.mesh().mesh_size();
    }

    double value(const Vector& x) const override {
        return assemble_energy(pat_, exec_, [&](std::size_t t) {
            double e = 0.0;
            for_points(t, x, [&](double w, double v, double v0, const Vec2& g, const double*, const Vec2*) {
                const double dw = v * v - 1.0;
                e += w * (p_.sigma * (v - v0) * (v - v0) + 0.5 * p_.epsilon * g.squaredNorm() +
                          dw * dw / (2.0 * p_.epsilon));
            });
            return e;
        });
    }

    void gradient(const Vector& x, Vector& out) const override {
        const int nloc = pat_.local_size();
        assemble_vector(pat_, exec_, out, [&](std::size_t t, double* loc) {
            for_points(t, x, [&](double w, double v, double v0, const Vec2& g, const double* n, const Vec2* dn) {
                const double dv = 2.0 * p_.sigma * (v - v0) + 2.0 * v * (v * v - 1.0) / p_.epsilon;
                for (int a = 0; a < nloc; ++a) loc[a] += w * (dv * n[a] + p_.epsilon * g.dot(dn[a]));
            });
        });
    }

    void hessian(const Vector& x, SparseMatrix& h) const override {
        const int nloc = pat_.local_size();
        assemble_matrix(pat_, exec_, h, [&](std::size_t t, double* loc) {
            for_points(t, x, [&](double w, double v, double, const Vec2&, const double* n, const Vec2* dn) {
                const double c = std::max(0.0, 2.0 * p_.sigma + (6.0 * v * v - 2.0) / p_.epsilon);
                for (int a = 0; a < nloc; ++a)
                    for (int b = 0; b < nloc; ++b)
                        loc[a * nloc + b] += w * (c * n[a] * n[b] + p_.epsilon * dn[a].dot(dn[b]));
            });
        });
    }

private:
    template <class Fn>
    void for_points(std::size_t t, const Vector& x, Fn&& fn) const {
        const auto& cache = in_.space->cache();
        const auto dofs = in_.space->element_dofs(t);
        for (std::size_t q = 0; q < cache.num_points(); ++q) {
            const double* n = cache.value_row(q);
            const Vec2* dn = cache.grad_row(t, q);
            double v = 0.0, v0 = 0.0;
            Vec2 g = Vec2::Zero();
            for (std::size_t a = 0; a < dofs.size(); ++a) {
                v += n[a] * x[dofs[a]];
                v0 += n[a] * in_.coeffs[dofs[a]];
                g += x[dofs[a]] * dn[a];
            }
            fn(cache.weight(t, q), v, v0, g, n, dn);
        }
    }

    const Field& in_;
    const PhaseParams& p_;
    Exec exec_;
    const AssemblyPattern& pat_;
};

}  // namespace

double regularization_energy(const Field& phi_bar, const Field& phi_in, const PhaseParams& p, Exec exec) {
    if (phi_bar.space != phi_in.space || phi_in.ncomp != 1)
        throw std::invalid_argument("regularization_energy: fields must be scalars on one space");
    RegFunctional f(phi_in, p, exec);
    return f.value(Eigen::Map<const Vector>(phi_bar.coeffs.data(), phi_bar.coeffs.size()));
}

Field regularize(const Field& phi_in, const PhaseParams& p, Exec exec, const NewtonOptions& opts,
                 NewtonResult* info) {
    p.validate();
    if (phi_in.ncomp != 1) throw std::invalid_argument("regularize: phi must be a scalar field");
    RegFunctional f(phi_in, p, exec);
    Vector x0 = Eigen::Map<const Vector>(phi_in.coeffs.data(), phi_in.coeffs.size());
    NewtonResult r = newton_minimize(f, std::move(x0), {}, opts);
    Field out = phi_in;
    for (std::size_t i = 0; i < out.coeffs.size(); ++i) out.coeffs[i] = r.x[i];
    if (info) *info = std::move(r);
    return out;
}

double body_area(const Field& phi, double l) {
    const auto& cache = phi.space->cache();
    const auto& pat = AssemblyPattern::get(*phi.space, 1);
    return assemble_energy(pat, Exec::Serial, [&](std::size_t t) {
        const auto dofs = phi.space->element_dofs(t);
        double e = 0.0;
        for (std::size_t q = 0; q < cache.num_points(); ++q) {
            const double* n = cache.value_row(q);
            double v = 0.0;
            for (std::size_t a = 0; a < dofs.size(); ++a) v += n[a] * phi(dofs[a]);
            e += cache.weight(t, q) * smooth_heaviside(v, l);
        }
        return e;
    });
}

double body_mass(const Field& phi, const Field& rho, double l) {
    if (phi.space != rho.space) throw std::invalid_argument("body_mass: phi and rho must share a space");
    const auto& cache = phi.space->cache();
    const auto& pat = AssemblyPattern::get(*phi.space, 1);
    return assemble_energy(pat, Exec::Serial, [&](std::size_t t) {
        const auto dofs = phi.space->element_dofs(t);
        double e = 0.0;
        for (std::size_t q = 0; q < cache.num_points(); ++q) {
            const double* n = cache.value_row(q);
            double v = 0.0, r = 0.0;
            for (std::size_t a = 0; a < dofs.size(); ++a) {
                v += n[a] * phi(dofs[a]);
                r += n[a] * rho(dofs[a]);
            }
            e += cache.weight(t, q) * smooth_heaviside(v, l) * r;
        }
        return e;
    });
}

}  // namespace egrow
