#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "egrow/field.hpp"

namespace egrow {

/// Execution policy for element and node kernels. `Serial` is the reference
/// path; `Parallel` runs the same kernel under OpenMP.
enum class Exec { Serial, Parallel };

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Sparsity pattern and element scatter map for a block system with `ncomp`
/// unknowns per dof (global index = dof * ncomp + component).
class AssemblyPattern {
public:
    AssemblyPattern(const FunctionSpace& space, int ncomp);

    const FunctionSpace& space() const { return *space_; }
    int ncomp() const { return ncomp_; }
    std::size_t size() const { return space_->num_dofs() * ncomp_; }
    std::size_t num_elements() const { return space_->mesh().num_triangles(); }
    int local_size() const { return space_->dofs_per_element() * ncomp_; }
    /// Global index of local entry l = a * ncomp + i on element t.
    int global_index(std::size_t t, int l) const { return space_->element_dofs(t)[l / ncomp_] * ncomp_ + l % ncomp_; }

    /// Zero matrix with the full pattern.
    const SparseMatrix& zero_matrix() const { return zero_; }
    /// Positions into the value array of `zero_matrix()` for element t,
    /// row-major over local indices.
    const int* scatter(std::size_t t) const { return scatter_.data() + t * local_size() * local_size(); }

    /// Pattern owned by `space`, built on first use.
    static const AssemblyPattern& get(const FunctionSpace& space, int ncomp) { return space.pattern(ncomp); }

private:
    const FunctionSpace* space_;
    int ncomp_;
    SparseMatrix zero_;
    std::vector<int> scatter_;
};

/// Run `fn(i)` for i in [0, n).
template <class Fn>
void for_each_index(std::size_t n, Exec exec, Fn&& fn) {
    if (exec == Exec::Serial) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const long count = static_cast<long>(n);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
}

/// Neumaier-compensated sum, used for energies assembled from many elements.
/// Any non-finite term makes the result +inf (inadmissible state).
double compensated_sum(const std::vector<double>& values);

// Element assembly. Kernels write element-local contributions into private
// buffers (in parallel under Exec::Parallel); the buffers are then summed in
// element order, so both execution paths give bit-identical results.

/// Sum of `fn(t)` over elements.
template <class Fn>
double assemble_energy(const AssemblyPattern& p, Exec exec, Fn&& fn) {
    std::vector<double> e(p.num_elements());
    for_each_index(e.size(), exec, [&](std::size_t t) { e[t] = fn(t); });
    return compensated_sum(e);
}

/// Global vector from `fn(t, local)`, where local has local_size() entries.
template <class Fn>
void assemble_vector(const AssemblyPattern& p, Exec exec, Vector& out, Fn&& fn) {
    const std::size_t nt = p.num_elements();
    const int m = p.local_size();
    std::vector<double> loc(nt * m, 0.0);
    for_each_index(nt, exec, [&](std::size_t t) { fn(t, loc.data() + t * m); });
    out.setZero(static_cast<Eigen::Index>(p.size()));
    for (std::size_t t = 0; t < nt; ++t)
        for (int l = 0; l < m; ++l) out[p.global_index(t, l)] += loc[t * m + l];
}

/// Global matrix from `fn(t, local)`, where local is local_size()^2 row-major.
template <class Fn>
void assemble_matrix(const AssemblyPattern& p, Exec exec, SparseMatrix& out, Fn&& fn) {
    const std::size_t nt = p.num_elements();
    const int m = p.local_size();
    const std::size_t mm = static_cast<std::size_t>(m) * m;
    std::vector<double> loc(nt * mm, 0.0);
    for_each_index(nt, exec, [&](std::size_t t) { fn(t, loc.data() + t * mm); });
    out = p.zero_matrix();
    double* values = out.valuePtr();
    for (std::size_t t = 0; t < nt; ++t) {
        const int* sc = p.scatter(t);
        for (std::size_t k = 0; k < mm; ++k) values[sc[k]] += loc[t * mm + k];
    }
}

}  // namespace egrow
