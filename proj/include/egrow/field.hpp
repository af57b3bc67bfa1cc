#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include "egrow/mesh.hpp"
#include "egrow/quadrature.hpp"

namespace egrow {

/// Thrown when a field is evaluated outside the computational domain without
/// an out-of-domain policy.
class OutsideDomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class AssemblyPattern;

inline constexpr int kMaxLocalDofs = 6;
using LocalGradients = Eigen::Matrix<double, kMaxLocalDofs, 2>;

/// Precomputed basis data on every element for one quadrature rule.
struct ElementBasisCache {
    QuadratureRule rule;
    int nloc = 0;
    /// values[q * nloc + a]; identical on every element.
    std::vector<double> values;
    /// grads[(t * nqp + q) * nloc + a]
    std::vector<Vec2> grads;
    /// jxw[t * nqp + q] = quadrature weight times the area scale.
    std::vector<double> jxw;

    std::size_t num_points() const { return rule.size(); }
    const double* value_row(std::size_t q) const { return values.data() + q * nloc; }
    const Vec2* grad_row(std::size_t t, std::size_t q) const { return grads.data() + (t * num_points() + q) * nloc; }
    double weight(std::size_t t, std::size_t q) const { return jxw[t * num_points() + q]; }
};

/// Continuous Lagrange space of degree 1 or 2 on a Mesh2D.
///
/// Degree-1 dofs are the mesh nodes. Degree-2 dofs are the nodes followed by
/// the edge midpoints, numbered by mesh edge index.
class FunctionSpace {
public:
    FunctionSpace(MeshPtr mesh, int degree);

    const Mesh2D& mesh() const { return *mesh_; }
    const MeshPtr& mesh_ptr() const { return mesh_; }
    int degree() const { return degree_; }
    int dofs_per_element() const { return nloc_; }
    std::size_t num_dofs() const { return dof_points_.size(); }

    std::span<const int> element_dofs(std::size_t t) const {
        return {elem_dofs_.data() + t * nloc_, static_cast<std::size_t>(nloc_)};
    }
    const Vec2& dof_point(std::size_t d) const { return dof_points_[d]; }
    /// One element containing dof d and the dof's local index there.
    int dof_element(std::size_t d) const { return dof_elem_[d]; }
    int dof_local_index(std::size_t d) const { return dof_local_[d]; }

    /// Basis values at a barycentric point (nloc entries).
    void basis_values(const std::array<double, 3>& bary, double* out) const;
    /// Basis gradients on element t at a barycentric point.
    void basis_gradients(std::size_t t, const std::array<double, 3>& bary, Vec2* out) const;
    /// Barycentric coordinates of local dof k.
    std::array<double, 3> local_dof_bary(int k) const;

    /// Basis data for the order-4 rule used by all energy assembly.
    const ElementBasisCache& cache() const { return cache_; }

    /// Sparsity pattern for `ncomp` (1, 2 or 4) unknowns per dof, built on first use.
    const AssemblyPattern& pattern(int ncomp) const;

private:
    MeshPtr mesh_;
    int degree_;
    int nloc_;
    std::vector<int> elem_dofs_;
    std::vector<Vec2> dof_points_;
    std::vector<int> dof_elem_;
    std::vector<int> dof_local_;
    ElementBasisCache cache_;
    mutable std::mutex pattern_mutex_;
    mutable std::shared_ptr<const AssemblyPattern> patterns_[5];
};

using SpacePtr = std::shared_ptr<const FunctionSpace>;

SpacePtr make_space(MeshPtr mesh, int degree);

using FieldValue = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1>;
/// Row c holds the gradient of component c.
using FieldGradient = Eigen::Matrix<double, Eigen::Dynamic, 2, 0, 4, 2>;

enum class Rank : int { Scalar = 1, Vector = 2, Tensor = 4 };

/// Nodal coefficients of a scalar, vector or 2x2 tensor field.
///
/// Coefficients are dof-major: coeffs[d * ncomp + c]. Tensor components are
/// stored row-major (F11, F12, F21, F22).
struct Field {
    SpacePtr space;
    int ncomp = 1;
    std::vector<double> coeffs;

    Field() = default;
    Field(SpacePtr s, Rank rank);

    Rank rank() const { return static_cast<Rank>(ncomp); }
    std::size_t num_dofs() const { return space->num_dofs(); }
    const Mesh2D& mesh() const { return space->mesh(); }

    double& operator()(std::size_t dof, int c = 0) { return coeffs[dof * ncomp + c]; }
    double operator()(std::size_t dof, int c = 0) const { return coeffs[dof * ncomp + c]; }

    Vec2 vector_at(std::size_t dof) const { return {coeffs[dof * 2], coeffs[dof * 2 + 1]}; }
    Mat2 tensor_at(std::size_t dof) const;
    void set_vector(std::size_t dof, const Vec2& v);
    void set_tensor(std::size_t dof, const Mat2& m);
};

Field make_scalar(SpacePtr s, double value = 0.0);
Field make_vector(SpacePtr s, const Vec2& value = Vec2::Zero());
Field make_tensor(SpacePtr s, const Mat2& value = Mat2::Zero());

/// Nodal interpolation of a function given as components at a point.
Field interpolate(SpacePtr s, Rank rank, const std::function<FieldValue(const Vec2&)>& fn);
Field interpolate_scalar(SpacePtr s, const std::function<double(const Vec2&)>& fn);

/// Value on element t at barycentric coordinates.
FieldValue eval_local(const Field& f, std::size_t t, const std::array<double, 3>& bary);
FieldGradient grad_local(const Field& f, std::size_t t, const std::array<double, 3>& bary);

/// Value at a located point (inside or at the nearest boundary point).
FieldValue eval_field(const Field& f, const PointLocation& loc);
/// Value at x; throws OutsideDomainError if x is outside the domain.
FieldValue eval_field(const Field& f, const Vec2& x);
FieldGradient grad_field(const Field& f, const Vec2& x);

double eval_scalar(const Field& f, const Vec2& x);
Vec2 eval_vector(const Field& f, const Vec2& x);
Mat2 eval_tensor(const Field& f, const Vec2& x);

inline Mat2 as_tensor(const FieldValue& v) {
    Mat2 m;
    m << v(0), v(1), v(2), v(3);
    return m;
}

/// Gradient of `f` averaged onto the dofs of `target` with element-area
/// weights. Row c of the result at each dof is grad of component c; stored
/// as a field with ncomp = 2 * f.ncomp (component-major, then x/y).
Field nodal_gradient(const Field& f, const SpacePtr& target);

}  // namespace egrow
