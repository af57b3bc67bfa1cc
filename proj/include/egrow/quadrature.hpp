#pragma once

#include <array>
#include <vector>

namespace egrow {

/// Quadrature on the reference triangle. Points are barycentric, weights sum
/// to the reference area 1/2.
struct QuadratureRule {
    int order = 0;
    std::vector<std::array<double, 3>> points;
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
};

/// Symmetric rule exact for polynomials of total degree `order` (1..4).
QuadratureRule triangle_rule(int order);

/// Gauss-Legendre rule on [0,1] with `n` points (1..3).
QuadratureRule line_rule(int n);

}  // namespace egrow
