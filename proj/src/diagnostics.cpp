#include "egrow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "egrow/phase.hpp"

namespace egrow {

std::vector<Polyline> extract_interface(const Field& phi, double level) {
    if (phi.ncomp != 1) throw std::invalid_argument("extract_interface: phi must be scalar");
    const Mesh2D& mesh = phi.mesh();
    // Crossing point per mesh edge and the segments (pairs of edges).
    std::map<int, Vec2> cross;
    std::vector<std::array<int, 2>> segs;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangle(t);
        const auto& te = mesh.triangle_edges(t);
        int found[2];
        int nf = 0;
        for (int k = 0; k < 3; ++k) {
            const int a = tri[k], b = tri[(k + 1) % 3];
            const double fa = phi(a) - level, fb = phi(b) - level;
            if ((fa >= 0.0) == (fb >= 0.0)) continue;
            if (nf < 2) found[nf] = te[k];
            ++nf;
            if (!cross.count(te[k])) {
                const double s = fa / (fa - fb);
                cross[te[k]] = (1.0 - s) * mesh.node(a) + s * mesh.node(b);
            }
        }
        if (nf == 2) segs.push_back({found[0], found[1]});
    }
    std::map<int, std::vector<int>> at_edge;
    for (std::size_t s = 0; s < segs.size(); ++s)
        for (int e : segs[s]) at_edge[e].push_back(static_cast<int>(s));

    std::vector<char> used(segs.size(), 0);
    std::vector<Polyline> out;
    auto extend = [&](std::vector<int>& chain, int seg, int from_edge) {
        int e = from_edge;
        while (true) {
            used[seg] = 1;
            const int next_edge = segs[seg][0] == e ? segs[seg][1] : segs[seg][0];
            chain.push_back(next_edge);
            int next = -1;
            for (int s : at_edge[next_edge])
                if (!used[s]) next = s;
            if (next < 0) return;
            seg = next;
            e = next_edge;
        }
    };
    for (std::size_t s0 = 0; s0 < segs.size(); ++s0) {
        if (used[s0]) continue;
        std::vector<int> fwd{segs[s0][0]};
        extend(fwd, static_cast<int>(s0), segs[s0][0]);
        // Grow backwards from the first edge when the curve is open.
        std::vector<int> back;
        for (int s : at_edge[segs[s0][0]]) {
            if (!used[s]) {
                back.push_back(segs[s0][0]);
                extend(back, s, segs[s0][0]);
            }
        }
        std::vector<int> chain(back.rbegin(), back.rend());
        if (!chain.empty()) chain.pop_back();
        chain.insert(chain.end(), fwd.begin(), fwd.end());
        Polyline pl;
        for (int e : chain) pl.push_back(cross[e]);
        out.push_back(std::move(pl));
    }
    return out;
}

double tilt_slope(const std::vector<Polyline>& curves, double y_lo, double y_hi, double x_lo, double x_hi) {
    double sy = 0, sx = 0, syy = 0, sxy = 0;
    int n = 0;
    for (const auto& pl : curves) {
        const bool closed = pl.size() > 2 && (pl.front() - pl.back()).norm() == 0.0;
        for (std::size_t i = 0; i + (closed ? 1 : 0) < pl.size(); ++i) {
            const Vec2& p = pl[i];
            if (p.y() < y_lo || p.y() > y_hi || p.x() < x_lo || p.x() > x_hi) continue;
            sy += p.y();
            sx += p.x();
            syy += p.y() * p.y();
            sxy += p.x() * p.y();
            ++n;
        }
    }
    if (n < 3) throw std::runtime_error("tilt_slope: fewer than 3 interface points in the band");
    const double den = n * syy - sy * sy;
    if (std::abs(den) <= 1e-300) throw std::runtime_error("tilt_slope: degenerate band");
    return (n * sxy - sx * sy) / den;
}

double column_tilt_slope(const std::vector<Polyline>& curves, double y_lo, double y_hi) {
    double sx = 0.0;
    int n = 0;
    for (const auto& pl : curves)
        for (const Vec2& p : pl)
            if (p.y() >= y_lo && p.y() <= y_hi) {
                sx += p.x();
                ++n;
            }
    if (n == 0) throw std::runtime_error("tilt_slope: no interface points in the band");
    const double split = sx / n;
    const double inf = std::numeric_limits<double>::infinity();
    return 0.5 * (tilt_slope(curves, y_lo, y_hi, -inf, split) + tilt_slope(curves, y_lo, y_hi, split, inf));
}

namespace {

double point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 d = b - a;
    const double l2 = d.squaredNorm();
    const double s = l2 > 0.0 ? std::clamp((p - a).dot(d) / l2, 0.0, 1.0) : 0.0;
    return (p - (a + s * d)).norm();
}

double directed(const std::vector<Polyline>& a, const std::vector<Polyline>& b) {
    double worst = 0.0;
    for (const auto& pa : a) {
        for (const Vec2& p : pa) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& pb : b) {
                if (pb.size() == 1) best = std::min(best, (p - pb[0]).norm());
                for (std::size_t i = 0; i + 1 < pb.size(); ++i) best = std::min(best, point_segment(p, pb[i], pb[i + 1]));
            }
            worst = std::max(worst, best);
        }
    }
    return worst;
}

}  // namespace

double hausdorff_distance(const std::vector<Polyline>& a, const std::vector<Polyline>& b) {
    const bool ea = a.empty(), eb = b.empty();
    if (ea && eb) return 0.0;
    if (ea || eb) return std::numeric_limits<double>::infinity();
    return std::max(directed(a, b), directed(b, a));
}

double total_length(const std::vector<Polyline>& curves) {
    double len = 0.0;
    for (const auto& pl : curves)
        for (std::size_t i = 0; i + 1 < pl.size(); ++i) len += (pl[i + 1] - pl[i]).norm();
    return len;
}

double lowest_point(const std::vector<Polyline>& curves) {
    double y = std::numeric_limits<double>::infinity();
    for (const auto& pl : curves)
        for (const Vec2& p : pl) y = std::min(y, p.y());
    if (!std::isfinite(y)) throw std::runtime_error("no interface found");
    return y;
}

std::vector<double> stress_norms(const Field& phi, const Field& rho, const Field& Fe, const BlendedMaterial& m) {
    std::vector<double> out(phi.num_dofs());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = blended_cauchy_stress(m, Fe.tensor_at(i), rho(i), phi(i)).norm();
    return out;
}

double body_mass_direct(const Field& phi, const Field& rho, double l) {
    const auto& cache = phi.space->cache();
    double sum = 0.0;
    for (std::size_t t = 0; t < phi.mesh().num_triangles(); ++t) {
        for (std::size_t q = 0; q < cache.num_points(); ++q) {
            const auto& b = cache.rule.points[q];
            sum += cache.weight(t, q) * smooth_heaviside(eval_local(phi, t, b)(0), l) * eval_local(rho, t, b)(0);
        }
    }
    return sum;
}

}  // namespace egrow
