#include "egrow/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace egrow {

namespace {

void add_orbit_3(QuadratureRule& q, double a, double w) {
    const double b = 1.0 - 2.0 * a;
    q.points.push_back({a, a, b});
    q.points.push_back({a, b, a});
    q.points.push_back({b, a, a});
    for (int i = 0; i < 3; ++i) q.weights.push_back(0.5 * w);
}

}  // namespace

QuadratureRule triangle_rule(int order) {
    QuadratureRule q;
    q.order = order;
    switch (order) {
        case 1:
            q.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
            q.weights.push_back(0.5);
            break;
        case 2:
            add_orbit_3(q, 1.0 / 6.0, 1.0 / 3.0);
            break;
        case 3:
        case 4:
            // Strang-Fix / Dunavant 6-point rule, degree 4.
            q.order = 4;
            add_orbit_3(q, 0.44594849091596488632, 0.22338158967801146570);
            add_orbit_3(q, 0.09157621350977074346, 0.10995174365532186764);
            break;
        default:
            throw std::invalid_argument("triangle_rule: supported orders are 1..4");
    }
    return q;
}

QuadratureRule line_rule(int n) {
    QuadratureRule q;
    q.order = 2 * n - 1;
    auto push = [&](double s, double w) {
        q.points.push_back({s, 1.0 - s, 0.0});
        q.weights.push_back(w);
    };
    switch (n) {
        case 1: push(0.5, 1.0); break;
        case 2: {
            const double d = 0.5 / std::sqrt(3.0);
            push(0.5 - d, 0.5);
            push(0.5 + d, 0.5);
            break;
        }
        case 3: {
            const double d = 0.5 * std::sqrt(0.6);
            push(0.5 - d, 5.0 / 18.0);
            push(0.5, 8.0 / 18.0);
            push(0.5 + d, 5.0 / 18.0);
            break;
        }
        default: throw std::invalid_argument("line_rule: supported sizes are 1..3");
    }
    return q;
}

}  // namespace egrow
