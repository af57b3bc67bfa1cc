#include "egrow/transport.hpp"

#include <cmath>
#include <sstream>

namespace egrow {

OutOfDomainPolicy OutOfDomainPolicy::inflow(FieldValue v, std::optional<std::pair<double, double>> window) {
    if (!v.allFinite()) throw std::invalid_argument("inflow value must be finite");
    OutOfDomainPolicy p;
    p.kind = Kind::ConstantInflow;
    p.value = std::move(v);
    p.window = window;
    return p;
}

OutOfDomainPolicy OutOfDomainPolicy::inflow(double v, std::optional<std::pair<double, double>> window) {
    FieldValue fv(1);
    fv << v;
    return inflow(std::move(fv), window);
}

OutOfDomainPolicy OutOfDomainPolicy::inflow(const Mat2& v, std::optional<std::pair<double, double>> window) {
    FieldValue fv(4);
    fv << v(0, 0), v(0, 1), v(1, 0), v(1, 1);
    return inflow(std::move(fv), window);
}

OutOfDomainPolicy OutOfDomainPolicy::inflow_profile(std::function<FieldValue(const Vec2&)> f,
                                                    std::optional<std::pair<double, double>> window) {
    if (!f) throw std::invalid_argument("inflow profile must be callable");
    OutOfDomainPolicy p;
    p.kind = Kind::ProfileInflow;
    p.profile = std::move(f);
    p.window = window;
    return p;
}

std::vector<PointLocation> back_trace(const FunctionSpace& target, const Field& v, double dt, Exec exec) {
    if (v.ncomp != 2) throw std::invalid_argument("back_trace: velocity must be a vector field");
    if (&v.mesh() != &target.mesh()) throw std::invalid_argument("back_trace: velocity on a different mesh");
    if (dt < 0.0) throw std::invalid_argument("back_trace: dt must be nonnegative");
    const Mesh2D& mesh = target.mesh();
    std::vector<PointLocation> out(target.num_dofs());
    for_each_index(out.size(), exec, [&](std::size_t i) {
        const int t = target.dof_element(i);
        const FieldValue vi = eval_local(v, t, target.local_dof_bary(target.dof_local_index(i)));
        const Vec2 x = target.dof_point(i) - dt * Vec2(vi(0), vi(1));
        out[i] = mesh.locate(x, t);
    });
    return out;
}

namespace {

// For an inflow node x_i whose trace left the domain by a depth delta along
// the inward direction d, the exact field is the inflow value S on [0, delta)
// and roughly the neighbour value F1 on [delta, h], with h the element depth
// along d. The linear profile (F0 + F1) h / 2 matches that integral when
// F0 = (2 delta / h) S + (1 - 2 delta / h) F1.
bool on_side(const Mesh2D& mesh, const Vec2& p, BoundaryTag side) {
    const Rect& r = mesh.domain();
    const double tol = mesh.geom_tol();
    switch (side) {
        case BoundaryTag::Bottom: return std::abs(p.y() - r.y0) <= tol;
        case BoundaryTag::Right: return std::abs(p.x() - r.x1) <= tol;
        case BoundaryTag::Top: return std::abs(p.y() - r.y1) <= tol;
        case BoundaryTag::Left: return std::abs(p.x() - r.x0) <= tol;
    }
    return false;
}

void conserve_inflow_layer(Field& out, const std::vector<PointLocation>& trace, const std::vector<char>& inflow_node) {
    const Mesh2D& mesh = out.mesh();
    const Field inflow = out;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (!inflow_node[i]) continue;
        const Vec2& xi = mesh.node(i);
        const Vec2 step = xi - trace[i].query;
        const double len = step.norm();
        if (!(len > 0.0)) continue;
        const Vec2 d = step / len;
        const double delta = (trace[i].nearest - trace[i].query).norm();
        const PointLocation probe = mesh.locate(xi + 1e-6 * mesh.mesh_size() * d, mesh.node_triangle(i));
        if (!probe.inside) continue;
        const auto& tri = mesh.triangle(probe.triangle);
        int k = 0;
        while (k < 3 && tri[k] != static_cast<int>(i)) ++k;
        if (k == 3) continue;
        const double rate = -mesh.bary_gradients(probe.triangle).row(k).dot(d);
        if (!(rate > 0.0)) continue;
        const double h = 1.0 / rate;
        if (delta >= h) continue;
        const PointLocation far = mesh.locate(xi + h * d, probe.triangle);
        if (!far.inside) continue;
        const FieldValue f1 = eval_field(inflow, far);
        const double w = 2.0 * delta / h;
        for (int c = 0; c < out.ncomp; ++c) out(i, c) = w * inflow(i, c) + (1.0 - w) * f1(c);
    }
}

}  // namespace

Field advect_traced(const Field& f, const std::vector<PointLocation>& trace, const OutOfDomainPolicy& policy,
                    Exec exec) {
    if (trace.size() != f.num_dofs()) throw std::invalid_argument("advect_traced: trace size mismatch");
    const bool inflow = policy.kind != OutOfDomainPolicy::Kind::NearestBoundaryValue;
    if (policy.kind == OutOfDomainPolicy::Kind::ConstantInflow && policy.value.size() != f.ncomp)
        throw std::invalid_argument("advect_traced: inflow value does not match field rank");
    const Mesh2D& mesh = f.mesh();
    Field out(f.space, f.rank());
    std::vector<char> inflow_node(trace.size(), 0);
    for_each_index(trace.size(), exec, [&](std::size_t i) {
        const PointLocation& loc = trace[i];
        bool use_inflow = inflow && !loc.inside;
        if (use_inflow && policy.window)
            use_inflow = loc.nearest.x() >= policy.window->first && loc.nearest.x() <= policy.window->second;
        if (use_inflow && policy.side) use_inflow = on_side(mesh, loc.nearest, *policy.side);
        FieldValue val;
        if (!use_inflow) {
            val = eval_field(f, loc);
        } else if (policy.kind == OutOfDomainPolicy::Kind::ConstantInflow) {
            val = policy.value;
        } else {
            val = policy.profile(loc.nearest);
            if (val.size() != f.ncomp) throw std::invalid_argument("advect_traced: inflow profile has wrong rank");
        }
        for (int c = 0; c < f.ncomp; ++c) out(i, c) = val(c);
        if (use_inflow) inflow_node[i] = 1;
    });
    if (policy.conserve_layer && f.space->degree() == 1) conserve_inflow_layer(out, trace, inflow_node);
    return out;
}

Field semi_lagrangian_advect(const Field& f, const Field& v, double dt, const OutOfDomainPolicy& policy, Exec exec) {
    return advect_traced(f, back_trace(*f.space, v, dt, exec), policy, exec);
}

Field source_update_Fe(const Field& Fe_g, const Field& u, Exec exec) {
    if (Fe_g.ncomp != 4 || u.ncomp != 2) throw std::invalid_argument("source_update_Fe: rank mismatch");
    const Field gu = nodal_gradient(u, Fe_g.space);
    Field out(Fe_g.space, Rank::Tensor);
    for_each_index(out.num_dofs(), exec, [&](std::size_t i) {
        const Mat2 f = Mat2::Identity() + gu.tensor_at(i);
        out.set_tensor(i, f * Fe_g.tensor_at(i));
    });
    return out;
}

Field source_update_rho(const Field& rho_g, const Field& u, Exec exec) {
    if (rho_g.ncomp != 1 || u.ncomp != 2) throw std::invalid_argument("source_update_rho: rank mismatch");
    const Field gu = nodal_gradient(u, rho_g.space);
    Field out(rho_g.space, Rank::Scalar);
    std::vector<char> bad(out.num_dofs(), 0);
    for_each_index(out.num_dofs(), exec, [&](std::size_t i) {
        const double j = (Mat2::Identity() + gu.tensor_at(i)).determinant();
        if (!(j > 0.0)) {
            bad[i] = 1;
            out(i) = rho_g(i);
        } else {
            out(i) = rho_g(i) / j;
        }
    });
    for (std::size_t i = 0; i < bad.size(); ++i) {
        if (bad[i]) {
            const Vec2& x = rho_g.space->dof_point(i);
            std::ostringstream msg;
            msg << "det(I + grad u) <= 0 at (" << x.x() << ", " << x.y() << "); reduce the time step";
            throw InversionError(msg.str(), x);
        }
    }
    return out;
}

}  // namespace egrow
