#include "egrow/elasticity.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "egrow/phase.hpp"

namespace egrow {

void NeoHookeanParams::validate() const {
    if (!(mu > 0.0)) throw std::invalid_argument("neo-Hookean mu must be positive");
    if (!(lambda >= 0.0)) throw std::invalid_argument("neo-Hookean lambda must be nonnegative");
}

void ExteriorParams::validate() const {
    if (!(mu_c > 0.0) || !(lambda_c > 0.0)) throw std::invalid_argument("exterior Lame parameters must be positive");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Blend weights below this are dropped so far-field inversions of a phase
// that is absent there cannot poison the energy.
constexpr double kMinWeight = 1e-12;

Mat2 cofactor(const Mat2& F) {
    Mat2 c;
    c << F(1, 1), -F(1, 0), -F(0, 1), F(0, 0);
    return c;
}

Eigen::Vector4d flat(const Mat2& m) { return {m(0, 0), m(0, 1), m(1, 0), m(1, 1)}; }

double nh_energy_raw(const Mat2& F, const NeoHookeanParams& p) {
    const double J = F.determinant();
    if (!(J > 0.0)) return kInf;
    return 0.5 * p.mu * (F.squaredNorm() - 2.0 - 2.0 * std::log(J)) + 0.5 * p.lambda * (J - 1.0) * (J - 1.0);
}

Mat2 nh_stress_raw(const Mat2& F, const NeoHookeanParams& p) {
    const double J = F.determinant();
    const double g = -p.mu / J + p.lambda * (J - 1.0);
    return p.mu * F + g * cofactor(F);
}

Mat4 nh_tangent_raw(const Mat2& F, const NeoHookeanParams& p) {
    const double J = F.determinant();
    const double g = -p.mu / J + p.lambda * (J - 1.0);
    const double dg = p.mu / (J * J) + p.lambda;
    const Eigen::Vector4d c = flat(cofactor(F));
    Mat4 C = p.mu * Mat4::Identity() + dg * c * c.transpose();
    // d cof / dF is constant in 2-D.
    C(0, 3) += g;
    C(3, 0) += g;
    C(1, 2) -= g;
    C(2, 1) -= g;
    return C;
}

void project_psd(Mat4& C) {
    Eigen::LLT<Mat4> llt(C);
    if (llt.info() == Eigen::Success) return;
    Eigen::SelfAdjointEigenSolver<Mat4> es(C);
    Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0);
    C = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

/// Adds weight * phase(G) with F = (I + G) Fe to mp.
void add_phase(MaterialPoint& mp, const PhaseMaterial& m, double weight, const Mat2& G, const Mat2& Fe, bool deriv,
               bool tangent) {
    if (weight < kMinWeight) return;
    if (m.kind == PhaseMaterial::Kind::Linear) {
        mp.energy += weight * exterior_energy(G, m.lin);
        if (deriv) mp.stress += weight * exterior_stress(G, m.lin);
        if (tangent) mp.tangent += weight * exterior_tangent(m.lin);
        return;
    }
    const Mat2 F = m.scale * (Mat2::Identity() + G) * Fe;
    const double w = nh_energy_raw(F, m.nh);
    if (!std::isfinite(w)) {
        mp.admissible = false;
        mp.energy = kInf;
        return;
    }
    mp.energy += weight * w;
    if (!deriv) return;
    // dF/dG_im = s Fe_mj, so dW/dG = s P Fe^T and the tangent transforms with A.
    const Mat2 P = nh_stress_raw(F, m.nh);
    mp.stress += weight * m.scale * P * Fe.transpose();
    if (!tangent) return;
    const Mat4 CF = nh_tangent_raw(F, m.nh);
    Mat4 A = Mat4::Zero();  // A[(i,j)][(i,m)] = s Fe_mj
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) A(2 * i + j, 2 * i + k) = m.scale * Fe(k, j);
    mp.tangent += weight * A.transpose() * CF * A;
}

}  // namespace

double neo_hookean_energy(const Mat2& F, const NeoHookeanParams& p) {
    const double w = nh_energy_raw(F, p);
    if (!std::isfinite(w)) throw std::domain_error("neo-Hookean energy: det F <= 0 (inverted state)");
    return w;
}

Mat2 neo_hookean_stress(const Mat2& F, const NeoHookeanParams& p) {
    if (!(F.determinant() > 0.0)) throw std::domain_error("neo-Hookean stress: det F <= 0 (inverted state)");
    return nh_stress_raw(F, p);
}

Mat4 neo_hookean_tangent(const Mat2& F, const NeoHookeanParams& p) {
    if (!(F.determinant() > 0.0)) throw std::domain_error("neo-Hookean tangent: det F <= 0 (inverted state)");
    return nh_tangent_raw(F, p);
}

Mat2 cauchy_stress(const Mat2& Fe, double rho, const NeoHookeanParams& p) {
    const double J = Fe.determinant();
    if (!(J > 0.0)) throw std::domain_error("Cauchy stress: det Fe <= 0 (inverted state)");
    return rho * (p.mu * (Fe * Fe.transpose() - Mat2::Identity()) + p.lambda * (J - 1.0) * J * Mat2::Identity());
}

double exterior_energy(const Mat2& G, const ExteriorParams& p) {
    const Mat2 s = G + G.transpose();
    const double tr = G.trace();
    return 0.25 * p.mu_c * s.squaredNorm() + 0.5 * p.lambda_c * tr * tr;
}

Mat2 exterior_stress(const Mat2& G, const ExteriorParams& p) {
    return p.mu_c * (G + G.transpose()) + p.lambda_c * G.trace() * Mat2::Identity();
}

Mat4 exterior_tangent(const ExteriorParams& p) {
    Mat4 C = Mat4::Zero();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l)
                    C(2 * i + j, 2 * k + l) = p.mu_c * ((i == k && j == l) + (i == l && j == k)) +
                                              p.lambda_c * (i == j && k == l);
    return C;
}

double PhaseMaterial::stiffness() const {
    if (kind == Kind::Linear) return std::max(lin.mu_c, lin.lambda_c);
    return std::max(nh.mu, nh.lambda) * scale * scale;
}

BlendedMaterial BlendedMaterial::solid_exterior(const NeoHookeanParams& solid, const ExteriorParams& ext, double l) {
    return {PhaseMaterial::neo_hookean(solid), PhaseMaterial::linear(ext), l};
}

MaterialPoint blended_material_point(const BlendedMaterial& m, const Mat2& G, const Mat2& Fe, double phi, bool deriv,
                                     bool tangent) {
    MaterialPoint mp;
    const double h = smooth_heaviside(phi, m.l);
    add_phase(mp, m.positive, h, G, Fe, deriv, tangent);
    if (mp.admissible) add_phase(mp, m.negative, 1.0 - h, G, Fe, deriv, tangent);
    if (mp.admissible && tangent) project_psd(mp.tangent);
    return mp;
}

double blended_energy_density(const Mat2& G, const Mat2& Fe_g, double phi, const NeoHookeanParams& solid,
                              const ExteriorParams& ext, double l) {
    const MaterialPoint mp =
        blended_material_point(BlendedMaterial::solid_exterior(solid, ext, l), G, Fe_g, phi, false, false);
    if (!mp.admissible) throw std::domain_error("blended energy: inverted solid state");
    return mp.energy;
}

Mat2 blended_cauchy_stress(const BlendedMaterial& m, const Mat2& Fe, double rho, double phi) {
    const double h = smooth_heaviside(phi, m.l);
    Mat2 s = Mat2::Zero();
    auto add = [&](const PhaseMaterial& pm, double w) {
        if (pm.kind != PhaseMaterial::Kind::NeoHookean || w < kMinWeight) return;
        const Mat2 F = pm.scale * Fe;
        if (!(F.determinant() > 0.0)) throw std::domain_error("Cauchy stress: inverted state");
        s += w * pm.scale * nh_stress_raw(F, pm.nh) * Fe.transpose();
    };
    add(m.positive, h);
    add(m.negative, 1.0 - h);
    return rho * s;
}

DirichletData dirichlet_data(const FunctionSpace& space, const BoundaryConditions& bcs) {
    const Mesh2D& mesh = space.mesh();
    DirichletData d;
    d.fixed.assign(space.num_dofs() * 2, 0);
    d.values.setZero(static_cast<Eigen::Index>(space.num_dofs() * 2));
    auto edge_dofs = [&](const BoundaryEdge& be) {
        std::vector<int> out{mesh.edge(be.edge)[0], mesh.edge(be.edge)[1]};
        if (space.degree() == 2) out.push_back(static_cast<int>(mesh.num_nodes()) + be.edge);
        return out;
    };
    // Rollers first, then full clamps, so clamps win at shared corners.
    for (int pass = 0; pass < 2; ++pass) {
        for (const BoundaryEdge& be : mesh.boundary_edges()) {
            const BoundaryCondition& bc = bcs[be.tag];
            if (pass == 0 && bc.kind == BoundaryCondition::Kind::FixedComponent) {
                for (int dof : edge_dofs(be)) {
                    d.fixed[2 * dof + bc.axis] = 1;
                    d.values[2 * dof + bc.axis] = bc.component_value;
                }
            } else if (pass == 1 && bc.kind == BoundaryCondition::Kind::FixedDisplacement) {
                for (int dof : edge_dofs(be)) {
                    const Vec2 v = bc.profile ? bc.profile(space.dof_point(dof)) : bc.value;
                    d.fixed[2 * dof] = d.fixed[2 * dof + 1] = 1;
                    d.values[2 * dof] = v.x();
                    d.values[2 * dof + 1] = v.y();
                }
            }
        }
    }
    return d;
}

IncrementalEnergy::IncrementalEnergy(const ElasticProblem& problem, SpacePtr u_space, Exec exec)
    : problem_(problem), space_(std::move(u_space)), exec_(exec), pattern_(AssemblyPattern::get(*space_, 2)) {
    if (!problem.phi || !problem.rho || !problem.Fe) throw std::invalid_argument("ElasticProblem: missing state field");
    const Field& phi = *problem.phi;
    const Field& rho = *problem.rho;
    const Field& Fe = *problem.Fe;
    const MeshPtr& mesh_ptr = space_->mesh_ptr();
    auto same_mesh = [&](const Field& f) { return f.space && f.space->mesh_ptr() == mesh_ptr; };
    if (!same_mesh(phi) || !same_mesh(rho) || !same_mesh(Fe))
        throw std::invalid_argument("ElasticProblem: state fields are on a different mesh");
    if (phi.ncomp != 1 || rho.ncomp != 1 || Fe.ncomp != 4)
        throw std::invalid_argument("ElasticProblem: state field ranks are wrong");
    if (problem.body_force && (!same_mesh(*problem.body_force) || problem.body_force->ncomp != 2))
        throw std::invalid_argument("ElasticProblem: body force must be a vector field on the same mesh");
    const Field* tb = problem.bcs.diffuse_traction ? &*problem.bcs.diffuse_traction : nullptr;
    if (tb && (!same_mesh(*tb) || tb->ncomp != 2))
        throw std::invalid_argument("ElasticProblem: diffuse traction must be a vector field on the same mesh");

    const Mesh2D& mesh = *mesh_ptr;
    const auto& ucache = space_->cache();
    nq_ = ucache.num_points();
    qp_.resize(mesh.num_triangles() * nq_);
    const double l = problem.material.l;
    for_each_index(mesh.num_triangles(), exec_, [&](std::size_t t) {
        for (std::size_t q = 0; q < nq_; ++q) {
            const auto& b = ucache.rule.points[q];
            QPoint& p = qp_[t * nq_ + q];
            p.w = ucache.weight(t, q);
            p.x = mesh.point(t, b);
            p.phi = eval_local(phi, t, b)(0);
            p.rho = eval_local(rho, t, b)(0);
            p.Fe = as_tensor(eval_local(Fe, t, b));
            p.load = Vec2::Zero();
            if (problem.body_force) {
                const FieldValue bf = eval_local(*problem.body_force, t, b);
                p.load += p.rho * Vec2(bf(0), bf(1));
            }
            if (tb) {
                const FieldGradient gp = grad_local(phi, t, b);
                const double gh = smooth_heaviside_deriv(p.phi, l) * Vec2(gp(0, 0), gp(0, 1)).norm();
                const FieldValue tv = eval_local(*tb, t, b);
                p.load += gh * Vec2(tv(0), tv(1));
            }
        }
    });

    const QuadratureRule line = line_rule(3);
    for (const BoundaryEdge& be : mesh.boundary_edges()) {
        const BoundaryCondition& bc = problem.bcs[be.tag];
        if (bc.kind != BoundaryCondition::Kind::Traction) continue;
        const auto& e = mesh.edge(be.edge);
        const Vec2 xa = mesh.node(e[0]), xb = mesh.node(e[1]);
        const double len = (xb - xa).norm();
        for (std::size_t q = 0; q < line.size(); ++q) {
            const double s = line.points[q][0];
            EdgePoint ep;
            ep.w = line.weights[q] * len;
            ep.x = s * xa + (1.0 - s) * xb;
            ep.t = bc.value;
            ep.dofs = {e[0], e[1], -1};
            if (space_->degree() == 1) {
                ep.shape = {s, 1.0 - s, 0.0};
                ep.nshape = 2;
            } else {
                ep.shape = {s * (2.0 * s - 1.0), (1.0 - s) * (1.0 - 2.0 * s), 4.0 * s * (1.0 - s)};
                ep.dofs[2] = static_cast<int>(mesh.num_nodes()) + be.edge;
                ep.nshape = 3;
            }
            edge_qp_.push_back(ep);
        }
    }

    double rho_max = 0.0;
    for (double r : rho.coeffs) rho_max = std::max(rho_max, std::abs(r));
    const double stiff = std::max(problem.material.positive.stiffness(), problem.material.negative.stiffness());
    const Rect& r = mesh.domain();
    scale_ = std::max(rho_max, 1e-300) * stiff * std::sqrt(r.width() * r.height());
}

std::size_t IncrementalEnergy::size() const { return space_->num_dofs() * 2; }

Mat2 IncrementalEnergy::grad_at(std::size_t t, std::size_t q, const Vector& u) const {
    const Vec2* dn = space_->cache().grad_row(t, q);
    const auto dofs = space_->element_dofs(t);
    Mat2 G = Mat2::Zero();
    for (std::size_t a = 0; a < dofs.size(); ++a) {
        const double ux = u[2 * dofs[a]], uy = u[2 * dofs[a] + 1];
        G(0, 0) += ux * dn[a].x();
        G(0, 1) += ux * dn[a].y();
        G(1, 0) += uy * dn[a].x();
        G(1, 1) += uy * dn[a].y();
    }
    return G;
}

double IncrementalEnergy::value(const Vector& u) const {
    const auto& cache = space_->cache();
    double e = assemble_energy(pattern_, exec_, [&](std::size_t t) {
        const auto dofs = space_->element_dofs(t);
        double et = 0.0;
        for (std::size_t q = 0; q < nq_; ++q) {
            const QPoint& p = qp_[t * nq_ + q];
            const MaterialPoint mp =
                blended_material_point(problem_.material, grad_at(t, q, u), p.Fe, p.phi, false, false);
            if (!mp.admissible) return kInf;
            const double* n = cache.value_row(q);
            Vec2 uq = Vec2::Zero();
            for (std::size_t a = 0; a < dofs.size(); ++a) uq += n[a] * Vec2(u[2 * dofs[a]], u[2 * dofs[a] + 1]);
            et += p.w * (p.rho * mp.energy - p.load.dot(p.x + uq));
        }
        return et;
    });
    for (const EdgePoint& ep : edge_qp_) {
        Vec2 uq = Vec2::Zero();
        for (int a = 0; a < ep.nshape; ++a) uq += ep.shape[a] * Vec2(u[2 * ep.dofs[a]], u[2 * ep.dofs[a] + 1]);
        e -= ep.w * ep.t.dot(ep.x + uq);
    }
    return e;
}

void IncrementalEnergy::gradient(const Vector& u, Vector& g) const {
    const auto& cache = space_->cache();
    assemble_vector(pattern_, exec_, g, [&](std::size_t t, double* loc) {
        const auto dofs = space_->element_dofs(t);
        for (std::size_t q = 0; q < nq_; ++q) {
            const QPoint& p = qp_[t * nq_ + q];
            const MaterialPoint mp = blended_material_point(problem_.material, grad_at(t, q, u), p.Fe, p.phi, true, false);
            const double* n = cache.value_row(q);
            const Vec2* dn = cache.grad_row(t, q);
            for (std::size_t a = 0; a < dofs.size(); ++a) {
                for (int i = 0; i < 2; ++i) {
                    loc[2 * a + i] += p.w * (p.rho * (mp.stress(i, 0) * dn[a].x() + mp.stress(i, 1) * dn[a].y()) -
                                             p.load[i] * n[a]);
                }
            }
        }
    });
    for (const EdgePoint& ep : edge_qp_)
        for (int a = 0; a < ep.nshape; ++a)
            for (int i = 0; i < 2; ++i) g[2 * ep.dofs[a] + i] -= ep.w * ep.t[i] * ep.shape[a];
}

void IncrementalEnergy::hessian(const Vector& u, SparseMatrix& h) const {
    const auto& cache = space_->cache();
    const int m = pattern_.local_size();
    assemble_matrix(pattern_, exec_, h, [&](std::size_t t, double* loc) {
        const int nloc = space_->dofs_per_element();
        for (std::size_t q = 0; q < nq_; ++q) {
            const QPoint& p = qp_[t * nq_ + q];
            const MaterialPoint mp = blended_material_point(problem_.material, grad_at(t, q, u), p.Fe, p.phi, true, true);
            const Vec2* dn = cache.grad_row(t, q);
            const double c = p.w * p.rho;
            for (int a = 0; a < nloc; ++a) {
                for (int b = 0; b < nloc; ++b) {
                    for (int i = 0; i < 2; ++i) {
                        for (int j = 0; j < 2; ++j) {
                            double k = 0.0;
                            for (int mm = 0; mm < 2; ++mm)
                                for (int nn = 0; nn < 2; ++nn)
                                    k += mp.tangent(2 * i + mm, 2 * j + nn) * dn[a][mm] * dn[b][nn];
                            loc[(2 * a + i) * m + 2 * b + j] += c * k;
                        }
                    }
                }
            }
        }
    });
}

EquilibriumResult solve_equilibrium(const ElasticProblem& problem, const SpacePtr& u_space, const NewtonOptions& opts,
                                    Exec exec) {
    for (const PhaseMaterial* pm : {&problem.material.positive, &problem.material.negative}) {
        if (pm->kind == PhaseMaterial::Kind::NeoHookean) pm->nh.validate();
        else pm->lin.validate();
    }
    IncrementalEnergy energy(problem, u_space, exec);
    DirichletData dd = dirichlet_data(*u_space, problem.bcs);
    if (const Field* g = problem.initial_guess) {
        if (g->space != u_space || g->ncomp != 2) throw std::invalid_argument("solve_equilibrium: bad initial guess");
        for (Eigen::Index i = 0; i < dd.values.size(); ++i)
            if (!dd.fixed[i]) dd.values[i] = g->coeffs[i];
    }
    NewtonResult r = newton_minimize(energy, dd.values, dd.fixed, opts);
    EquilibriumResult out{Field(u_space, Rank::Vector), {}};
    for (std::size_t i = 0; i < out.u.coeffs.size(); ++i) out.u.coeffs[i] = r.x[i];
    out.info = std::move(r);
    return out;
}

}  // namespace egrow
