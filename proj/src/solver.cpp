#include "egrow/solver.hpp"

#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>
#ifdef EGROW_HAVE_CHOLMOD
#include <Eigen/CholmodSupport>
#endif

namespace egrow {

double free_norm(const Vector& g, const std::vector<char>& fixed) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < g.size(); ++i)
        if (fixed.empty() || !fixed[i]) s += g[i] * g[i];
    return std::sqrt(s);
}

namespace {

void eliminate_fixed(SparseMatrix& h, const std::vector<char>& fixed) {
    if (fixed.empty()) return;
    for (int k = 0; k < h.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(h, k); it; ++it) {
            if (fixed[it.row()] || fixed[it.col()]) it.valueRef() = it.row() == it.col() ? 1.0 : 0.0;
        }
    }
}

void zero_fixed(Vector& g, const std::vector<char>& fixed) {
    if (fixed.empty()) return;
    for (Eigen::Index i = 0; i < g.size(); ++i)
        if (fixed[i]) g[i] = 0.0;
}

double mean_abs_diagonal(const SparseMatrix& h) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < h.rows(); ++i) s += std::abs(h.coeff(i, i));
    return h.rows() > 0 ? s / static_cast<double>(h.rows()) : 1.0;
}

// Supernodal CHOLMOD when available, Eigen's simplicial LDLT otherwise.
// Either way a failed factorization (matrix not positive definite) is
// reported through info().
#ifdef EGROW_HAVE_CHOLMOD
using SpdFactorization = Eigen::CholmodSupernodalLLT<SparseMatrix>;
#else
using SpdFactorization = Eigen::SimplicialLDLT<SparseMatrix>;
#endif

}  // namespace

Vector solve_sparse_spd(const SparseMatrix& a, const Vector& b) {
    SpdFactorization ldlt(a);
    if (ldlt.info() != Eigen::Success) throw SolverError("sparse Cholesky factorization failed", b.norm(), 0);
    Vector x = ldlt.solve(b);
    if (ldlt.info() != Eigen::Success || !x.allFinite())
        throw SolverError("sparse Cholesky solve failed", b.norm(), 0);
    return x;
}

NewtonResult newton_minimize(const EnergyFunctional& energy, Vector x0, const std::vector<char>& fixed,
                             const NewtonOptions& opts) {
    const auto n = static_cast<Eigen::Index>(energy.size());
    if (x0.size() != n) throw std::invalid_argument("newton_minimize: initial guess has wrong size");
    if (!fixed.empty() && static_cast<Eigen::Index>(fixed.size()) != n)
        throw std::invalid_argument("newton_minimize: fixed mask has wrong size");

    NewtonResult res;
    res.x = std::move(x0);
    double e = energy.value(res.x);
    if (!std::isfinite(e)) throw SolverError("initial state has non-finite energy", 0.0, 0);
    res.energies.push_back(e);

    Vector g(n), d(n), trial(n);
    energy.gradient(res.x, g);
    zero_fixed(g, fixed);
    res.initial_residual = g.norm();
    res.residual = res.initial_residual;
    const double ref = std::max(res.initial_residual, energy.gradient_scale());
    const double tol = std::max(opts.rel_tol * ref, opts.abs_tol);
    res.relative_residual = ref > 0.0 ? res.residual / ref : 0.0;
    if (res.residual <= tol) return res;

    SparseMatrix h;
    SpdFactorization ldlt;
    bool analyzed = false;

    for (int it = 1; it <= opts.max_iter; ++it) {
        energy.hessian(res.x, h);
        eliminate_fixed(h, fixed);
        if (!analyzed) {
            ldlt.analyzePattern(h);
            analyzed = true;
        }
        // Factorize, shifting the diagonal if the matrix is not positive
        // definite enough to give a descent direction.
        double shift = 0.0;
        const double diag_scale = mean_abs_diagonal(h);
        bool have_dir = false;
        for (int attempt = 0; attempt < 8 && !have_dir; ++attempt) {
            ldlt.setShift(shift);
            ldlt.factorize(h);
            if (ldlt.info() == Eigen::Success) {
                d = -ldlt.solve(g);
                zero_fixed(d, fixed);
                if (d.allFinite() && d.dot(g) < 0.0) have_dir = true;
            }
            shift = shift == 0.0 ? 1e-8 * diag_scale : shift * 100.0;
        }
        if (!have_dir) throw SolverError("Newton: could not compute a descent direction", res.residual, it);

        const double slope = g.dot(d);
        const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(e));
        double e_new = e;
        if (-slope <= noise) {
            // Near the minimizer the predicted decrease drowns in roundoff
            // and the energy can no longer rank trial points. Take the full
            // step if it lowers the residual, otherwise stop here.
            trial = res.x + d;
            e_new = energy.value(trial);
            Vector g_trial(n);
            if (std::isfinite(e_new)) {
                energy.gradient(trial, g_trial);
                zero_fixed(g_trial, fixed);
            }
            if (!std::isfinite(e_new) || !(g_trial.norm() < res.residual)) {
                res.stalled = true;
                res.iterations = it;
                return res;
            }
        } else {
            double step = 1.0;
            bool accepted = false;
            for (int k = 0; k < opts.max_backtracks; ++k) {
                trial = res.x + step * d;
                e_new = energy.value(trial);
                if (std::isfinite(e_new) && e_new <= e + opts.armijo * step * slope) {
                    accepted = true;
                    break;
                }
                step *= opts.backtrack;
            }
            if (!accepted) throw SolverError("Newton: line search failed", res.residual, it);
        }
        res.x = trial;
        e = e_new;
        res.energies.push_back(e);
        energy.gradient(res.x, g);
        zero_fixed(g, fixed);
        res.residual = g.norm();
        res.relative_residual = ref > 0.0 ? res.residual / ref : 0.0;
        res.iterations = it;
        if (res.residual <= tol) return res;
    }
    throw SolverError("Newton: no convergence within max_iter", res.residual, opts.max_iter);
}

}  // namespace egrow
