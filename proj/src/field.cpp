#include "egrow/field.hpp"

#include "egrow/assembly.hpp"

#include <stdexcept>

namespace egrow {

FunctionSpace::FunctionSpace(MeshPtr mesh, int degree) : mesh_(std::move(mesh)), degree_(degree) {
    if (degree_ != 1 && degree_ != 2) throw std::invalid_argument("FunctionSpace: degree must be 1 or 2");
    const Mesh2D& m = *mesh_;
    nloc_ = degree_ == 1 ? 3 : 6;
    const std::size_t nt = m.num_triangles();
    elem_dofs_.resize(nt * nloc_);
    dof_points_ = m.nodes();
    if (degree_ == 2) {
        for (std::size_t e = 0; e < m.num_edges(); ++e)
            dof_points_.push_back(0.5 * (m.node(m.edge(e)[0]) + m.node(m.edge(e)[1])));
    }
    dof_elem_.assign(dof_points_.size(), -1);
    dof_local_.assign(dof_points_.size(), -1);
    for (std::size_t t = 0; t < nt; ++t) {
        for (int k = 0; k < 3; ++k) elem_dofs_[t * nloc_ + k] = m.triangle(t)[k];
        if (degree_ == 2) {
            for (int k = 0; k < 3; ++k)
                elem_dofs_[t * nloc_ + 3 + k] = static_cast<int>(m.num_nodes()) + m.triangle_edges(t)[k];
        }
        for (int a = 0; a < nloc_; ++a) {
            const int d = elem_dofs_[t * nloc_ + a];
            if (dof_elem_[d] < 0) {
                dof_elem_[d] = static_cast<int>(t);
                dof_local_[d] = a;
            }
        }
    }

    cache_.rule = triangle_rule(4);
    cache_.nloc = nloc_;
    const std::size_t nq = cache_.rule.size();
    cache_.values.resize(nq * nloc_);
    cache_.grads.resize(nt * nq * nloc_);
    cache_.jxw.resize(nt * nq);
    for (std::size_t q = 0; q < nq; ++q) basis_values(cache_.rule.points[q], cache_.values.data() + q * nloc_);
    for (std::size_t t = 0; t < nt; ++t) {
        for (std::size_t q = 0; q < nq; ++q) {
            basis_gradients(t, cache_.rule.points[q], cache_.grads.data() + (t * nq + q) * nloc_);
            cache_.jxw[t * nq + q] = 2.0 * m.area(t) * cache_.rule.weights[q];
        }
    }
}

void FunctionSpace::basis_values(const std::array<double, 3>& b, double* out) const {
    if (degree_ == 1) {
        out[0] = b[0];
        out[1] = b[1];
        out[2] = b[2];
        return;
    }
    for (int i = 0; i < 3; ++i) out[i] = b[i] * (2.0 * b[i] - 1.0);
    for (int k = 0; k < 3; ++k) out[3 + k] = 4.0 * b[k] * b[(k + 1) % 3];
}

void FunctionSpace::basis_gradients(std::size_t t, const std::array<double, 3>& b, Vec2* out) const {
    const auto& g = mesh_->bary_gradients(t);
    if (degree_ == 1) {
        for (int i = 0; i < 3; ++i) out[i] = g.row(i).transpose();
        return;
    }
    for (int i = 0; i < 3; ++i) out[i] = (4.0 * b[i] - 1.0) * g.row(i).transpose();
    for (int k = 0; k < 3; ++k) {
        const int j = (k + 1) % 3;
        out[3 + k] = 4.0 * (b[j] * g.row(k).transpose() + b[k] * g.row(j).transpose());
    }
}

std::array<double, 3> FunctionSpace::local_dof_bary(int k) const {
    std::array<double, 3> b{0.0, 0.0, 0.0};
    if (k < 3) {
        b[k] = 1.0;
    } else {
        b[k - 3] = 0.5;
        b[(k - 2) % 3] = 0.5;
    }
    return b;
}

const AssemblyPattern& FunctionSpace::pattern(int ncomp) const {
    if (ncomp < 1 || ncomp > 4) throw std::invalid_argument("FunctionSpace::pattern: bad component count");
    std::lock_guard lock(pattern_mutex_);
    if (!patterns_[ncomp]) patterns_[ncomp] = std::make_shared<const AssemblyPattern>(*this, ncomp);
    return *patterns_[ncomp];
}

SpacePtr make_space(MeshPtr mesh, int degree) { return std::make_shared<const FunctionSpace>(std::move(mesh), degree); }

Field::Field(SpacePtr s, Rank r) : space(std::move(s)), ncomp(static_cast<int>(r)) {
    coeffs.assign(space->num_dofs() * ncomp, 0.0);
}

Mat2 Field::tensor_at(std::size_t dof) const {
    const double* c = coeffs.data() + dof * 4;
    Mat2 m;
    m << c[0], c[1], c[2], c[3];
    return m;
}

void Field::set_vector(std::size_t dof, const Vec2& v) {
    coeffs[dof * 2] = v.x();
    coeffs[dof * 2 + 1] = v.y();
}

void Field::set_tensor(std::size_t dof, const Mat2& m) {
    double* c = coeffs.data() + dof * 4;
    c[0] = m(0, 0);
    c[1] = m(0, 1);
    c[2] = m(1, 0);
    c[3] = m(1, 1);
}

Field make_scalar(SpacePtr s, double value) {
    Field f(std::move(s), Rank::Scalar);
    std::fill(f.coeffs.begin(), f.coeffs.end(), value);
    return f;
}

Field make_vector(SpacePtr s, const Vec2& value) {
    Field f(std::move(s), Rank::Vector);
    for (std::size_t d = 0; d < f.num_dofs(); ++d) f.set_vector(d, value);
    return f;
}

Field make_tensor(SpacePtr s, const Mat2& value) {
    Field f(std::move(s), Rank::Tensor);
    for (std::size_t d = 0; d < f.num_dofs(); ++d) f.set_tensor(d, value);
    return f;
}

Field interpolate(SpacePtr s, Rank rank, const std::function<FieldValue(const Vec2&)>& fn) {
    Field f(std::move(s), rank);
    for (std::size_t d = 0; d < f.num_dofs(); ++d) {
        const FieldValue v = fn(f.space->dof_point(d));
        if (v.size() != f.ncomp) throw std::invalid_argument("interpolate: component count mismatch");
        for (int c = 0; c < f.ncomp; ++c) f(d, c) = v(c);
    }
    return f;
}

Field interpolate_scalar(SpacePtr s, const std::function<double(const Vec2&)>& fn) {
    Field f(std::move(s), Rank::Scalar);
    for (std::size_t d = 0; d < f.num_dofs(); ++d) f(d) = fn(f.space->dof_point(d));
    return f;
}

FieldValue eval_local(const Field& f, std::size_t t, const std::array<double, 3>& bary) {
    double n[kMaxLocalDofs];
    f.space->basis_values(bary, n);
    const auto dofs = f.space->element_dofs(t);
    FieldValue v = FieldValue::Zero(f.ncomp);
    for (std::size_t a = 0; a < dofs.size(); ++a)
        for (int c = 0; c < f.ncomp; ++c) v(c) += n[a] * f(dofs[a], c);
    return v;
}

FieldGradient grad_local(const Field& f, std::size_t t, const std::array<double, 3>& bary) {
    Vec2 g[kMaxLocalDofs];
    f.space->basis_gradients(t, bary, g);
    const auto dofs = f.space->element_dofs(t);
    FieldGradient out = FieldGradient::Zero(f.ncomp, 2);
    for (std::size_t a = 0; a < dofs.size(); ++a)
        for (int c = 0; c < f.ncomp; ++c) out.row(c) += f(dofs[a], c) * g[a].transpose();
    return out;
}

FieldValue eval_field(const Field& f, const PointLocation& loc) { return eval_local(f, loc.triangle, loc.bary); }

namespace {
PointLocation locate_inside(const Field& f, const Vec2& x) {
    const PointLocation loc = f.mesh().locate(x);
    if (!loc.inside) throw OutsideDomainError("field evaluated outside the computational domain");
    return loc;
}
}  // namespace

FieldValue eval_field(const Field& f, const Vec2& x) {
    const auto loc = locate_inside(f, x);
    return eval_local(f, loc.triangle, loc.bary);
}

FieldGradient grad_field(const Field& f, const Vec2& x) {
    const auto loc = locate_inside(f, x);
    return grad_local(f, loc.triangle, loc.bary);
}

double eval_scalar(const Field& f, const Vec2& x) { return eval_field(f, x)(0); }

Vec2 eval_vector(const Field& f, const Vec2& x) {
    const FieldValue v = eval_field(f, x);
    return {v(0), v(1)};
}

Mat2 eval_tensor(const Field& f, const Vec2& x) { return as_tensor(eval_field(f, x)); }

Field nodal_gradient(const Field& f, const SpacePtr& target) {
    if (target->mesh_ptr() != f.space->mesh_ptr()) throw std::invalid_argument("nodal_gradient: mesh mismatch");
    Field out;
    out.space = target;
    out.ncomp = 2 * f.ncomp;
    out.coeffs.assign(target->num_dofs() * out.ncomp, 0.0);
    std::vector<double> weight(target->num_dofs(), 0.0);
    const Mesh2D& mesh = f.mesh();
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto dofs = target->element_dofs(t);
        const double w = mesh.area(t);
        for (std::size_t k = 0; k < dofs.size(); ++k) {
            const FieldGradient g = grad_local(f, t, target->local_dof_bary(static_cast<int>(k)));
            for (int c = 0; c < f.ncomp; ++c) {
                out(dofs[k], 2 * c) += w * g(c, 0);
                out(dofs[k], 2 * c + 1) += w * g(c, 1);
            }
            weight[dofs[k]] += w;
        }
    }
    for (std::size_t d = 0; d < target->num_dofs(); ++d)
        for (int c = 0; c < out.ncomp; ++c) out(d, c) /= weight[d];
    return out;
}

}  // namespace egrow
