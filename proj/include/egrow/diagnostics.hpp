#pragma once

#include <limits>
#include <vector>

#include "egrow/elasticity.hpp"
#include "egrow/field.hpp"

namespace egrow {

using Polyline = std::vector<Vec2>;

/// Zero level set of a scalar field by marching triangles, joined into
/// polylines. Vertices lie on mesh edges; closed curves repeat their first
/// vertex at the end. Quadratic fields use their vertex values.
std::vector<Polyline> extract_interface(const Field& phi, double level = 0.0);

/// Least-squares slope dx/dy through all polyline vertices with y in
/// [y_lo, y_hi] (and x in [x_lo, x_hi]). For a column this is the slope of
/// its midline. Throws std::runtime_error with fewer than 3 points.
double tilt_slope(const std::vector<Polyline>& curves, double y_lo, double y_hi,
                  double x_lo = -std::numeric_limits<double>::infinity(),
                  double x_hi = std::numeric_limits<double>::infinity());

/// Tilt of a column: the two sides (split at the mean x of the band points)
/// are fitted separately and the slopes averaged, so an uneven number of
/// points per side cannot bias the result.
double column_tilt_slope(const std::vector<Polyline>& curves, double y_lo, double y_hi);

/// Symmetric Hausdorff distance between two polyline sets (segment-based).
double hausdorff_distance(const std::vector<Polyline>& a, const std::vector<Polyline>& b);

/// Total length of a polyline set.
double total_length(const std::vector<Polyline>& curves);

/// Lowest vertex y over all curves. Throws std::runtime_error if empty.
double lowest_point(const std::vector<Polyline>& curves);

/// Frobenius norm of the blended Cauchy stress at each dof of the state space.
std::vector<double> stress_norms(const Field& phi, const Field& rho, const Field& Fe, const BlendedMaterial& m);

/// int H_l(phi) rho by a flat quadrature loop (independent of body_mass).
double body_mass_direct(const Field& phi, const Field& rho, double l);

}  // namespace egrow
