#pragma once

#include <stdexcept>
#include <string>
#include <vector>


#include "egrow/assembly.hpp"

namespace egrow {


/// Raised when a linear or nonlinear solve fails. Carries the last residual
/// and the iteration count for diagnostics.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual, int iterations)
        : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
    double residual() const { return residual_; }
    int iterations() const { return iterations_; }

private:
    double residual_;
    int iterations_;
};

/// Smooth energy of a flat unknown vector. `value` may return +inf for
/// inadmissible states (e.g. inverted elements); the line search treats
/// those as rejected trial points.
class EnergyFunctional {
public:
    virtual ~EnergyFunctional() = default;
    virtual std::size_t size() const = 0;
    virtual double value(const Vector& x) const = 0;
    virtual void gradient(const Vector& x, Vector& g) const = 0;
    /// Symmetric positive semidefinite approximation of the Hessian; the
    /// exact Hessian wherever that is already positive definite.
    virtual void hessian(const Vector& x, SparseMatrix& h) const = 0;
    /// Natural gradient magnitude of the problem; the relative tolerance is
    /// measured against max(|g(x0)|, gradient_scale()).
    virtual double gradient_scale() const { return 1.0; }
};

struct NewtonOptions {
    double rel_tol = 1e-8;
    double abs_tol = 0.0;
    int max_iter = 50;
    double backtrack = 0.5;
    double armijo = 1e-4;
    int max_backtracks = 50;
};

struct NewtonResult {
    Vector x;
    int iterations = 0;
    double initial_residual = 0.0;
    double residual = 0.0;
    /// Relative residual residual / max(initial_residual, gradient_scale).
    double relative_residual = 0.0;
    /// Energy at x0 followed by the energy of every accepted iterate.
    std::vector<double> energies;
    /// True when the line search could not decrease the energy further
    /// because the predicted decrease was at roundoff level.
    bool stalled = false;
};

/// Projected Newton with Armijo backtracking. Entries with fixed[i] != 0 keep
/// their value from x0 (Dirichlet elimination). Throws SolverError when the
/// residual does not reach tolerance within max_iter.
NewtonResult newton_minimize(const EnergyFunctional& energy, Vector x0, const std::vector<char>& fixed,
                             const NewtonOptions& opts = {});

/// Solve A x = b for symmetric positive (semi)definite A with a sparse Cholesky
/// factorization. Throws SolverError if the factorization fails.
Vector solve_sparse_spd(const SparseMatrix& a, const Vector& b);

/// 2-norm of the entries of g not marked fixed.
double free_norm(const Vector& g, const std::vector<char>& fixed);

}  // namespace egrow
