#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace egrow {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

struct Rect {
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double diagonal() const;
    bool contains(const Vec2& p, double tol = 0.0) const;
    Vec2 clamp(const Vec2& p) const;
};

enum class BoundaryTag : std::uint8_t { Bottom = 0, Right = 1, Top = 2, Left = 3 };
inline constexpr std::size_t kNumBoundaryTags = 4;

struct BoundaryEdge {
    int edge;
    int triangle;
    BoundaryTag tag;
};

/// Result of a point query. When `inside` is false, `triangle` and `bary`
/// refer to the nearest boundary point `nearest`.
struct PointLocation {
    bool inside = false;
    int triangle = -1;
    std::array<double, 3> bary{0.0, 0.0, 0.0};
    Vec2 nearest = Vec2::Zero();
    /// The queried point itself.
    Vec2 query = Vec2::Zero();
};

/// Fixed triangulation of a rectangular computational domain.
///
/// Immutable after construction. Besides the connectivity it caches the
/// per-triangle barycentric gradients, the edge list used by quadratic
/// fields, neighbour links for the barycentric walk, and a bucket grid used
/// when a walk cannot be started from a good hint.
class Mesh2D {
public:
    Mesh2D(Rect domain, std::vector<Vec2> nodes, std::vector<std::array<int, 3>> triangles);

    const Rect& domain() const { return domain_; }
    std::size_t num_nodes() const { return nodes_.size(); }
    std::size_t num_triangles() const { return tris_.size(); }
    std::size_t num_edges() const { return edges_.size(); }

    const Vec2& node(std::size_t i) const { return nodes_[i]; }
    const std::vector<Vec2>& nodes() const { return nodes_; }
    const std::array<int, 3>& triangle(std::size_t t) const { return tris_[t]; }
    const std::vector<std::array<int, 3>>& triangles() const { return tris_; }

    /// Edge endpoints, lower node index first.
    const std::array<int, 2>& edge(std::size_t e) const { return edges_[e]; }
    /// Local edge k of triangle t joins local vertices k and (k+1)%3.
    const std::array<int, 3>& triangle_edges(std::size_t t) const { return tri_edges_[t]; }
    /// Triangle across the edge opposite local vertex k, or -1 on the boundary.
    const std::array<int, 3>& neighbors(std::size_t t) const { return neighbors_[t]; }
    const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }

    double area(std::size_t t) const { return area_[t]; }
    /// Rows are the (constant) gradients of the three barycentric coordinates.
    const Eigen::Matrix<double, 3, 2>& bary_gradients(std::size_t t) const { return grad_bary_[t]; }
    /// One triangle incident to node i.
    int node_triangle(std::size_t i) const { return node_tri_[i]; }
    /// Typical element diameter (sqrt of the mean doubled triangle area).
    double mesh_size() const { return h_; }
    double geom_tol() const { return tol_geom_; }

    std::array<double, 3> barycentric(std::size_t t, const Vec2& p) const;
    Vec2 point(std::size_t t, const std::array<double, 3>& bary) const;
    /// Signed-distance containment test with tolerance `geom_tol()`.
    bool contains(std::size_t t, const std::array<double, 3>& bary) const;

    /// Locate p, walking from `hint` when it is a valid triangle.
    PointLocation locate(const Vec2& p, int hint = -1) const;

private:
    int walk(const Vec2& p, int start, std::array<double, 3>& bary) const;
    int bucket_search(const Vec2& p, std::array<double, 3>& bary) const;
    void build_topology();
    void build_buckets();

    Rect domain_;
    std::vector<Vec2> nodes_;
    std::vector<std::array<int, 3>> tris_;
    std::vector<std::array<int, 2>> edges_;
    std::vector<std::array<int, 3>> tri_edges_;
    std::vector<std::array<int, 3>> neighbors_;
    std::vector<BoundaryEdge> boundary_;
    std::vector<double> area_;
    std::vector<Eigen::Matrix<double, 3, 2>> grad_bary_;
    std::vector<int> node_tri_;
    double h_ = 0.0;
    double tol_geom_ = 0.0;

    int bx_ = 1, by_ = 1;
    std::vector<int> bucket_start_;
    std::vector<int> bucket_items_;
};

using MeshPtr = std::shared_ptr<const Mesh2D>;

/// Diagonal layout of a structured triangulation.
///  - Alternating: checkerboard diagonals, no preferred shear direction, but
///    node valence alternates between 4 and 8.
///  - Uniform: every cell split along the same diagonal; all interior nodes
///    have valence 6, so lumped-mass nodal operators are consistent.
enum class Diagonals { Alternating, Uniform };

/// Structured triangulation of `domain` with nx*ny cells, two triangles per
/// cell. Throws std::invalid_argument for nx, ny < 1 or an empty rectangle.
MeshPtr build_rect_mesh(const Rect& domain, int nx, int ny, Diagonals diagonals = Diagonals::Alternating);

/// Free-function form of Mesh2D::locate.
PointLocation locate_point(const Mesh2D& mesh, const Vec2& p, int hint = -1);

}  // namespace egrow
