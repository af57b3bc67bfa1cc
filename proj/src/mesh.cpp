#include "egrow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

namespace egrow {

double Rect::diagonal() const { return std::hypot(width(), height()); }

bool Rect::contains(const Vec2& p, double tol) const {
    return p.x() >= x0 - tol && p.x() <= x1 + tol && p.y() >= y0 - tol && p.y() <= y1 + tol;
}

Vec2 Rect::clamp(const Vec2& p) const {
    return {std::clamp(p.x(), x0, x1), std::clamp(p.y(), y0, y1)};
}

Mesh2D::Mesh2D(Rect domain, std::vector<Vec2> nodes, std::vector<std::array<int, 3>> triangles)
    : domain_(domain), nodes_(std::move(nodes)), tris_(std::move(triangles)) {
    tol_geom_ = 1e-10 * domain_.diagonal();
    area_.resize(tris_.size());
    grad_bary_.resize(tris_.size());
    double area_sum = 0.0;
    for (std::size_t t = 0; t < tris_.size(); ++t) {
        const auto& tri = tris_[t];
        for (int v : tri) {
            if (v < 0 || static_cast<std::size_t>(v) >= nodes_.size())
                throw std::invalid_argument("triangle references a missing node");
        }
        const Vec2& a = nodes_[tri[0]];
        const Vec2& b = nodes_[tri[1]];
        const Vec2& c = nodes_[tri[2]];
        const double twice = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
        if (!(twice > 0.0))
            throw std::invalid_argument("triangle " + std::to_string(t) + " has non-positive area");
        area_[t] = 0.5 * twice;
        area_sum += area_[t];
        // grad lambda_k = rot90(opposite edge) / (2A), pointing towards vertex k.
        const std::array<Vec2, 3> p{a, b, c};
        for (int k = 0; k < 3; ++k) {
            const Vec2& q1 = p[(k + 1) % 3];
            const Vec2& q2 = p[(k + 2) % 3];
            grad_bary_[t](k, 0) = (q1.y() - q2.y()) / twice;
            grad_bary_[t](k, 1) = (q2.x() - q1.x()) / twice;
        }
    }
    for (const auto& n : nodes_) {
        if (!domain_.contains(n, tol_geom_)) throw std::invalid_argument("mesh node outside the domain");
    }
    h_ = tris_.empty() ? 0.0 : std::sqrt(2.0 * area_sum / static_cast<double>(tris_.size()));
    build_topology();
    build_buckets();
}

void Mesh2D::build_topology() {
    std::map<std::pair<int, int>, int> edge_index;
    tri_edges_.assign(tris_.size(), {-1, -1, -1});
    std::vector<std::array<int, 2>> edge_tris;
    for (std::size_t t = 0; t < tris_.size(); ++t) {
        for (int k = 0; k < 3; ++k) {
            int a = tris_[t][k];
            int b = tris_[t][(k + 1) % 3];
            auto key = std::minmax(a, b);
            auto [it, inserted] = edge_index.try_emplace({key.first, key.second}, static_cast<int>(edges_.size()));
            if (inserted) {
                edges_.push_back({key.first, key.second});
                edge_tris.push_back({static_cast<int>(t), -1});
            } else {
                auto& et = edge_tris[it->second];
                if (et[1] != -1) throw std::invalid_argument("edge shared by more than two triangles");
                et[1] = static_cast<int>(t);
            }
            tri_edges_[t][k] = it->second;
        }
    }
    neighbors_.assign(tris_.size(), {-1, -1, -1});
    for (std::size_t t = 0; t < tris_.size(); ++t) {
        for (int k = 0; k < 3; ++k) {
            // edge opposite vertex k is local edge (k+1)%3
            const auto& et = edge_tris[tri_edges_[t][(k + 1) % 3]];
            neighbors_[t][k] = et[0] == static_cast<int>(t) ? et[1] : et[0];
        }
    }
    const double tol = tol_geom_;
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        if (edge_tris[e][1] != -1) continue;
        const Vec2 mid = 0.5 * (nodes_[edges_[e][0]] + nodes_[edges_[e][1]]);
        BoundaryTag tag;
        if (std::abs(mid.y() - domain_.y0) <= tol) tag = BoundaryTag::Bottom;
        else if (std::abs(mid.x() - domain_.x1) <= tol) tag = BoundaryTag::Right;
        else if (std::abs(mid.y() - domain_.y1) <= tol) tag = BoundaryTag::Top;
        else if (std::abs(mid.x() - domain_.x0) <= tol) tag = BoundaryTag::Left;
        else throw std::invalid_argument("boundary edge not on the domain rectangle");
        boundary_.push_back({static_cast<int>(e), edge_tris[e][0], tag});
    }
    node_tri_.assign(nodes_.size(), -1);
    for (std::size_t t = 0; t < tris_.size(); ++t)
        for (int v : tris_[t])
            if (node_tri_[v] < 0) node_tri_[v] = static_cast<int>(t);
}

void Mesh2D::build_buckets() {
    const double n = std::max<double>(1.0, std::sqrt(static_cast<double>(tris_.size()) / 2.0));
    const double aspect = domain_.width() / domain_.height();
    bx_ = std::max(1, static_cast<int>(std::round(n * std::sqrt(aspect))));
    by_ = std::max(1, static_cast<int>(std::round(n / std::sqrt(aspect))));
    std::vector<std::vector<int>> cells(static_cast<std::size_t>(bx_) * by_);
    auto cell_of = [&](double v, double lo, double len, int count) {
        return std::clamp(static_cast<int>(std::floor((v - lo) / len * count)), 0, count - 1);
    };
    for (std::size_t t = 0; t < tris_.size(); ++t) {
        double xmin = std::numeric_limits<double>::max(), xmax = -xmin, ymin = xmin, ymax = -xmin;
        for (int v : tris_[t]) {
            xmin = std::min(xmin, nodes_[v].x());
            xmax = std::max(xmax, nodes_[v].x());
            ymin = std::min(ymin, nodes_[v].y());
            ymax = std::max(ymax, nodes_[v].y());
        }
        const int i0 = cell_of(xmin - tol_geom_, domain_.x0, domain_.width(), bx_);
        const int i1 = cell_of(xmax + tol_geom_, domain_.x0, domain_.width(), bx_);
        const int j0 = cell_of(ymin - tol_geom_, domain_.y0, domain_.height(), by_);
        const int j1 = cell_of(ymax + tol_geom_, domain_.y0, domain_.height(), by_);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) cells[static_cast<std::size_t>(j) * bx_ + i].push_back(static_cast<int>(t));
    }
    bucket_start_.assign(cells.size() + 1, 0);
    for (std::size_t c = 0; c < cells.size(); ++c)
        bucket_start_[c + 1] = bucket_start_[c] + static_cast<int>(cells[c].size());
    bucket_items_.reserve(bucket_start_.back());
    for (const auto& c : cells) bucket_items_.insert(bucket_items_.end(), c.begin(), c.end());
}

std::array<double, 3> Mesh2D::barycentric(std::size_t t, const Vec2& p) const {
    const auto& g = grad_bary_[t];
    std::array<double, 3> b{};
    // lambda_k vanishes on the opposite edge, which contains vertex (k+1)%3.
    for (int k = 0; k < 3; ++k) {
        const Vec2 d = p - nodes_[tris_[t][(k + 1) % 3]];
        b[k] = g(k, 0) * d.x() + g(k, 1) * d.y();
    }
    return b;
}

Vec2 Mesh2D::point(std::size_t t, const std::array<double, 3>& bary) const {
    const auto& tri = tris_[t];
    return bary[0] * nodes_[tri[0]] + bary[1] * nodes_[tri[1]] + bary[2] * nodes_[tri[2]];
}

bool Mesh2D::contains(std::size_t t, const std::array<double, 3>& bary) const {
    for (int k = 0; k < 3; ++k) {
        // bary / |grad bary| is the signed distance to the opposite edge
        if (bary[k] < -tol_geom_ * grad_bary_[t].row(k).norm()) return false;
    }
    return true;
}

int Mesh2D::walk(const Vec2& p, int start, std::array<double, 3>& bary) const {
    int t = start;
    const int max_steps = 4 * (bx_ + by_) + 64;
    for (int step = 0; step < max_steps; ++step) {
        bary = barycentric(t, p);
        int worst = -1;
        double worst_dist = 0.0;
        for (int k = 0; k < 3; ++k) {
            const double dist = bary[k] / grad_bary_[t].row(k).norm();
            if (dist < -tol_geom_ && dist < worst_dist) {
                worst_dist = dist;
                worst = k;
            }
        }
        if (worst < 0) return t;
        const int next = neighbors_[t][worst];
        if (next < 0) return -1;
        t = next;
    }
    return -1;
}

int Mesh2D::bucket_search(const Vec2& p, std::array<double, 3>& bary) const {
    const int i = std::clamp(static_cast<int>(std::floor((p.x() - domain_.x0) / domain_.width() * bx_)), 0, bx_ - 1);
    const int j = std::clamp(static_cast<int>(std::floor((p.y() - domain_.y0) / domain_.height() * by_)), 0, by_ - 1);
    const std::size_t c = static_cast<std::size_t>(j) * bx_ + i;
    int best = -1;
    double best_violation = std::numeric_limits<double>::max();
    std::array<double, 3> best_bary{};
    for (int k = bucket_start_[c]; k < bucket_start_[c + 1]; ++k) {
        const int t = bucket_items_[k];
        auto b = barycentric(t, p);
        double violation = 0.0;
        for (int m = 0; m < 3; ++m)
            violation = std::max(violation, -b[m] / grad_bary_[t].row(m).norm());
        if (violation <= tol_geom_) {
            bary = b;
            return t;
        }
        if (violation < best_violation) {
            best_violation = violation;
            best = t;
            best_bary = b;
        }
    }
    // Points within roundoff of the rectangle boundary can miss every
    // triangle by a hair; take the closest candidate.
    if (best >= 0 && best_violation <= 1e3 * tol_geom_) {
        bary = best_bary;
        return best;
    }
    return -1;
}

PointLocation Mesh2D::locate(const Vec2& p, int hint) const {
    PointLocation loc;
    const bool in_rect = domain_.contains(p, tol_geom_);
    const Vec2 q = in_rect ? p : domain_.clamp(p);
    std::array<double, 3> bary{};
    int t = -1;
    if (hint >= 0 && static_cast<std::size_t>(hint) < tris_.size()) t = walk(q, hint, bary);
    if (t < 0) t = bucket_search(q, bary);
    if (t < 0) {
        // Last resort: the nearest mesh node's triangle, with clamped barycentrics.
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::max();
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const double d = (nodes_[i] - q).squaredNorm();
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        t = node_tri_[best];
        bary = barycentric(t, q);
    }
    // Snap tiny negative coordinates so evaluations stay convex combinations.
    double sum = 0.0;
    for (double& b : bary) {
        b = std::max(b, 0.0);
        sum += b;
    }
    for (double& b : bary) b /= sum;
    loc.inside = in_rect;
    loc.query = p;
    loc.triangle = t;
    loc.bary = bary;
    loc.nearest = q;
    return loc;
}

MeshPtr build_rect_mesh(const Rect& domain, int nx, int ny, Diagonals diagonals) {
    if (nx < 1 || ny < 1) throw std::invalid_argument("build_rect_mesh: subdivision counts must be >= 1");
    if (!(domain.x1 > domain.x0) || !(domain.y1 > domain.y0))
        throw std::invalid_argument("build_rect_mesh: empty domain rectangle");
    std::vector<Vec2> nodes;
    nodes.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j) {
        const double y = j == ny ? domain.y1 : domain.y0 + domain.height() * j / ny;
        for (int i = 0; i <= nx; ++i) {
            const double x = i == nx ? domain.x1 : domain.x0 + domain.width() * i / nx;
            nodes.emplace_back(x, y);
        }
    }
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    std::vector<std::array<int, 3>> tris;
    tris.reserve(2 * static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
            if (diagonals == Diagonals::Uniform || (i + j) % 2 == 0) {
                tris.push_back({a, b, c});
                tris.push_back({a, c, d});
            } else {
                tris.push_back({a, b, d});
                tris.push_back({b, c, d});
            }
        }
    }
    return std::make_shared<const Mesh2D>(domain, std::move(nodes), std::move(tris));
}

PointLocation locate_point(const Mesh2D& mesh, const Vec2& p, int hint) { return mesh.locate(p, hint); }

}  // namespace egrow
