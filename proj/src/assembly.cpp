#include "egrow/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace egrow {

AssemblyPattern::AssemblyPattern(const FunctionSpace& space, int ncomp) : space_(&space), ncomp_(ncomp) {
    const std::size_t nt = num_elements();
    const int m = local_size();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(nt * m * m);
    for (std::size_t t = 0; t < nt; ++t)
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) trips.emplace_back(global_index(t, r), global_index(t, c), 0.0);
    const auto n = static_cast<Eigen::Index>(size());
    zero_.resize(n, n);
    zero_.setFromTriplets(trips.begin(), trips.end());
    zero_.makeCompressed();
    scatter_.resize(nt * m * m);
    const int* outer = zero_.outerIndexPtr();
    const int* inner = zero_.innerIndexPtr();
    for (std::size_t t = 0; t < nt; ++t) {
        for (int r = 0; r < m; ++r) {
            const int gr = global_index(t, r);
            for (int c = 0; c < m; ++c) {
                // column-major: column gc holds sorted row indices
                const int gc = global_index(t, c);
                const int* pos = std::lower_bound(inner + outer[gc], inner + outer[gc + 1], gr);
                scatter_[(t * m + r) * m + c] = static_cast<int>(pos - inner);
            }
        }
    }
}

double compensated_sum(const std::vector<double>& values) {
    double sum = 0.0, comp = 0.0;
    for (double v : values) {
        if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) comp += (sum - t) + v;
        else comp += (v - t) + sum;
        sum = t;
    }
    return sum + comp;
}

}  // namespace egrow
