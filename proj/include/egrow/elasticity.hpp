#pragma once

#include <array>
#include <functional>
#include <optional>

#include <Eigen/Core>

#include "egrow/assembly.hpp"
#include "egrow/field.hpp"
#include "egrow/solver.hpp"

namespace egrow {

using Mat4 = Eigen::Matrix4d;

struct NeoHookeanParams {
    double mu = 1.0;
    double lambda = 1.0;
    void validate() const;
};

/// Soft linear material filling the exterior of the body.
struct ExteriorParams {
    double mu_c = 1e-3;
    double lambda_c = 1e-3;
    void validate() const;
    static ExteriorParams soft_copy(const NeoHookeanParams& solid, double factor = 1e-3) {
        return {factor * solid.mu, factor * solid.lambda};
    }
};

// Tensor conventions: 2x2 tensors are flattened row-major, k = 2 i + j, and
// fourth-order tangents are 4x4 matrices C[2i+j][2k+l] = d^2 W / dF_ij dF_kl.

/// W(F) = mu/2 (tr F^T F - 2 - 2 ln J) + lambda/2 (J - 1)^2. Throws
/// std::domain_error if det F <= 0.
double neo_hookean_energy(const Mat2& F, const NeoHookeanParams& p);
/// First Piola stress dW/dF.
Mat2 neo_hookean_stress(const Mat2& F, const NeoHookeanParams& p);
/// d^2W/dF^2.
Mat4 neo_hookean_tangent(const Mat2& F, const NeoHookeanParams& p);

/// sigma = rho dW/dFe Fe^T = rho [mu (Fe Fe^T - I) + lambda (J - 1) J I].
Mat2 cauchy_stress(const Mat2& Fe, double rho, const NeoHookeanParams& p);

/// W_lin(G) = mu_c/4 |G + G^T|^2 + lambda_c/2 tr(G)^2.
double exterior_energy(const Mat2& grad_u, const ExteriorParams& p);
Mat2 exterior_stress(const Mat2& grad_u, const ExteriorParams& p);
Mat4 exterior_tangent(const ExteriorParams& p);

/// One of the two materials mixed by H_l(phi). A neo-Hookean phase can carry
/// a scale s so that its energy is W(s F) (stress-free at F = I / s).
struct PhaseMaterial {
    enum class Kind { NeoHookean, Linear };
    Kind kind = Kind::NeoHookean;
    NeoHookeanParams nh;
    ExteriorParams lin;
    double scale = 1.0;

    static PhaseMaterial neo_hookean(NeoHookeanParams p, double scale = 1.0) {
        return {Kind::NeoHookean, p, {}, scale};
    }
    static PhaseMaterial linear(ExteriorParams p) { return {Kind::Linear, {}, p, 1.0}; }
    /// Largest Lame parameter, used for scaling tolerances.
    double stiffness() const;
};

/// H_l(phi) * positive + (1 - H_l(phi)) * negative, as a function of the
/// displacement gradient G with F = (I + G) Fe_g.
struct BlendedMaterial {
    PhaseMaterial positive;
    PhaseMaterial negative;
    double l = 2.0;

    /// Growth convention: solid where phi > 0, soft exterior elsewhere.
    static BlendedMaterial solid_exterior(const NeoHookeanParams& solid, const ExteriorParams& ext, double l);
};

struct MaterialPoint {
    double energy = 0.0;
    Mat2 stress = Mat2::Zero();    ///< dW/dG
    Mat4 tangent = Mat4::Zero();   ///< d^2W/dG^2
    bool admissible = true;
};

/// Blended energy density and its G-derivatives. When `want_tangent` is set
/// the tangent is projected onto the positive semidefinite cone.
MaterialPoint blended_material_point(const BlendedMaterial& m, const Mat2& grad_u, const Mat2& Fe_g, double phi,
                                     bool want_derivatives, bool want_tangent);

/// H_l(phi) W_s((I + G) Fe_g) + (1 - H_l(phi)) W_lin(G). Throws
/// std::domain_error for an inverted solid state.
double blended_energy_density(const Mat2& grad_u, const Mat2& Fe_g, double phi, const NeoHookeanParams& solid,
                              const ExteriorParams& ext, double l);

/// Cauchy stress of the blended material at G = 0: rho sum_k w_k s_k dW_k(s_k Fe) Fe^T
/// over the neo-Hookean phases.
Mat2 blended_cauchy_stress(const BlendedMaterial& m, const Mat2& Fe, double rho, double phi);

/// Boundary condition on one side of R.
struct BoundaryCondition {
    enum class Kind { Free, FixedDisplacement, FixedComponent, Traction };
    Kind kind = Kind::Free;
    Vec2 value = Vec2::Zero();   ///< displacement or traction
    int axis = 0;                ///< component for FixedComponent
    double component_value = 0.0;
    /// Position-dependent displacement (overrides `value` when set).
    std::function<Vec2(const Vec2&)> profile;

    static BoundaryCondition free() { return {}; }
    static BoundaryCondition clamped(Vec2 v = Vec2::Zero()) { return {Kind::FixedDisplacement, v, 0, 0.0, {}}; }
    static BoundaryCondition displacement(std::function<Vec2(const Vec2&)> f) {
        return {Kind::FixedDisplacement, Vec2::Zero(), 0, 0.0, std::move(f)};
    }
    static BoundaryCondition roller(int axis, double v = 0.0) { return {Kind::FixedComponent, Vec2::Zero(), axis, v, {}}; }
    static BoundaryCondition traction(Vec2 t) { return {Kind::Traction, t, 0, 0.0, {}}; }
};

struct BoundaryConditions {
    /// Indexed by BoundaryTag.
    std::array<BoundaryCondition, kNumBoundaryTags> sides;
    /// Diffuse traction t_b on R, applied as t_b |grad H_l(phi)|.
    std::optional<Field> diffuse_traction;

    BoundaryCondition& operator[](BoundaryTag tag) { return sides[static_cast<std::size_t>(tag)]; }
    const BoundaryCondition& operator[](BoundaryTag tag) const { return sides[static_cast<std::size_t>(tag)]; }
};

/// Inputs of one incremental equilibrium problem. phi, rho, Fe_g (and the
/// optional body force per unit mass) live on one scalar/tensor space.
struct ElasticProblem {
    BlendedMaterial material;
    const Field* phi = nullptr;
    const Field* rho = nullptr;
    const Field* Fe = nullptr;
    const Field* body_force = nullptr;
    BoundaryConditions bcs;
    /// Optional Newton starting point (free dofs only; Dirichlet dofs always
    /// take their prescribed values). Zero when null.
    const Field* initial_guess = nullptr;
};

/// Dirichlet data for a displacement space: mask and prescribed values.
struct DirichletData {
    std::vector<char> fixed;
    Vector values;
};
DirichletData dirichlet_data(const FunctionSpace& u_space, const BoundaryConditions& bcs);

/// I[u] = int rho_g (W - b.(x+u)) - int t_b.(x+u) |grad H_l(phi)| - sum_sides int t.(x+u).
class IncrementalEnergy final : public EnergyFunctional {
public:
    IncrementalEnergy(const ElasticProblem& problem, SpacePtr u_space, Exec exec = Exec::Parallel);

    std::size_t size() const override;
    double value(const Vector& u) const override;
    void gradient(const Vector& u, Vector& g) const override;
    void hessian(const Vector& u, SparseMatrix& h) const override;
    double gradient_scale() const override { return scale_; }

    const SpacePtr& space() const { return space_; }

private:
    struct QPoint {
        double w;       ///< quadrature weight times area
        double phi;
        double rho;
        Mat2 Fe;
        Vec2 load;      ///< rho b + t_b |grad H| (force per area)
        Vec2 x;
    };
    /// Quadrature point on a boundary edge carrying a traction.
    struct EdgePoint {
        double w;
        Vec2 x;
        Vec2 t;
        std::array<double, 3> shape;
        std::array<int, 3> dofs;
        int nshape;
    };

    Mat2 grad_at(std::size_t t, std::size_t q, const Vector& u) const;

    const ElasticProblem& problem_;
    SpacePtr space_;
    Exec exec_;
    const AssemblyPattern& pattern_;
    std::size_t nq_;
    std::vector<QPoint> qp_;
    std::vector<EdgePoint> edge_qp_;
    double scale_ = 1.0;
};

struct EquilibriumResult {
    Field u;
    NewtonResult info;
};

/// Minimize I[u] over u in `u_space` with Dirichlet data imposed by
/// elimination. Throws SolverError on failure.
EquilibriumResult solve_equilibrium(const ElasticProblem& problem, const SpacePtr& u_space,
                                    const NewtonOptions& opts = {}, Exec exec = Exec::Parallel);

}  // namespace egrow
