#include <doctest.h>

#include <cmath>

#include "egrow/assembly.hpp"
#include "egrow/field.hpp"
#include "egrow/solver.hpp"

using namespace egrow;

namespace {

SpacePtr unit_space(int n, int degree) { return make_space(build_rect_mesh({0, 1, 0, 1}, n, n), degree); }

}  // namespace

TEST_CASE("constant and linear fields are reproduced exactly") {
    for (int degree : {1, 2}) {
        auto s = unit_space(5, degree);
        auto c = make_scalar(s, 2.5);
        auto lin = interpolate_scalar(s, [](const Vec2& x) { return 2 * x.x() + 3 * x.y(); });
        for (const Vec2 p : {Vec2(0.123, 0.456), Vec2(0.9, 0.01), Vec2(0.5, 0.5)}) {
            CHECK(eval_scalar(c, p) == doctest::Approx(2.5));
            CHECK(eval_scalar(lin, p) == doctest::Approx(2 * p.x() + 3 * p.y()));
            auto g = grad_field(lin, p);
            CHECK(g(0, 0) == doctest::Approx(2.0));
            CHECK(g(0, 1) == doctest::Approx(3.0));
            auto gc = grad_field(c, p);
            CHECK(std::abs(gc(0, 0)) < 1e-12);
            CHECK(std::abs(gc(0, 1)) < 1e-12);
        }
    }
}

TEST_CASE("quadratic fields reproduce quadratics") {
    auto s = unit_space(4, 2);
    auto f = interpolate_scalar(s, [](const Vec2& x) { return x.x() * x.x() - x.x() * x.y(); });
    const Vec2 p(0.37, 0.61);
    CHECK(eval_scalar(f, p) == doctest::Approx(p.x() * p.x() - p.x() * p.y()));
    auto g = grad_field(f, p);
    CHECK(g(0, 0) == doctest::Approx(2 * p.x() - p.y()));
    CHECK(g(0, 1) == doctest::Approx(-p.x()));
}

TEST_CASE("linear interpolation error of x^2 decays like h^2") {
    double prev = 0;
    for (int n : {8, 16, 32}) {
        auto s = unit_space(n, 1);
        auto f = interpolate_scalar(s, [](const Vec2& x) { return x.x() * x.x(); });
        double err = 0;
        const auto& m = s->mesh();
        for (std::size_t t = 0; t < m.num_triangles(); ++t) {
            const Vec2 c = m.point(t, {1.0 / 3, 1.0 / 3, 1.0 / 3});
            err = std::max(err, std::abs(eval_local(f, t, {1.0 / 3, 1.0 / 3, 1.0 / 3})(0) - c.x() * c.x()));
        }
        if (prev > 0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.05));
        prev = err;
    }
}

TEST_CASE("evaluation outside the domain throws") {
    auto s = unit_space(3, 1);
    auto f = make_scalar(s, 1.0);
    CHECK_THROWS_AS(eval_scalar(f, Vec2(1.5, 0.5)), OutsideDomainError);
}

TEST_CASE("tensor fields store row-major components") {
    auto s = unit_space(2, 1);
    Mat2 a;
    a << 1, 2, 3, 4;
    auto f = make_tensor(s, a);
    CHECK(f(0, 1) == 2.0);
    CHECK(f(0, 2) == 3.0);
    CHECK((eval_tensor(f, Vec2(0.3, 0.3)) - a).norm() < 1e-14);
}

TEST_CASE("nodal gradient of a tanh profile is close to the analytic derivative") {
    const double w = 0.1;
    auto s = make_space(build_rect_mesh({0, 1, 0, 1}, 100, 4, Diagonals::Uniform), 1);
    auto f = interpolate_scalar(s, [&](const Vec2& x) { return std::tanh((x.x() - 0.5) / w); });
    auto g = nodal_gradient(f, s);
    double gmax = 0;
    for (std::size_t d = 0; d < s->num_dofs(); ++d) gmax = std::max(gmax, g(d, 0));
    CHECK(gmax == doctest::Approx(1.0 / w).epsilon(0.05));
}

TEST_CASE("nodal gradient of a linear field is exact everywhere") {
    auto s = unit_space(6, 1);
    auto f = interpolate_scalar(s, [](const Vec2& x) { return 2 * x.x() + 3 * x.y(); });
    auto g = nodal_gradient(f, s);
    for (std::size_t d = 0; d < s->num_dofs(); ++d) {
        CHECK(g(d, 0) == doctest::Approx(2.0));
        CHECK(g(d, 1) == doctest::Approx(3.0));
    }
}

namespace {

/// E(x) = 1/2 x^T A x - b^T x on a tridiagonal SPD matrix.
class Quadratic : public EnergyFunctional {
public:
    explicit Quadratic(int n) : a_(n, n), b_(Vector::LinSpaced(n, 1.0, 2.0)) {
        std::vector<Eigen::Triplet<double>> t;
        for (int i = 0; i < n; ++i) {
            t.emplace_back(i, i, 3.0);
            if (i + 1 < n) {
                t.emplace_back(i, i + 1, -1.0);
                t.emplace_back(i + 1, i, -1.0);
            }
        }
        a_.setFromTriplets(t.begin(), t.end());
    }
    std::size_t size() const override { return b_.size(); }
    double value(const Vector& x) const override { return 0.5 * x.dot(a_ * x) - b_.dot(x); }
    void gradient(const Vector& x, Vector& g) const override { g = a_ * x - b_; }
    void hessian(const Vector&, SparseMatrix& h) const override { h = a_; }
    SparseMatrix a_;
    Vector b_;
};

/// sum_i cosh(x_i - c_i) + (x_i - x_{i+1})^2 with a known minimizer when c is constant.
class Manufactured : public EnergyFunctional {
public:
    explicit Manufactured(Vector c) : c_(std::move(c)) {}
    std::size_t size() const override { return c_.size(); }
    double value(const Vector& x) const override {
        double e = 0;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            e += std::cosh(x[i] - c_[i]);
            if (i + 1 < x.size()) e += (x[i] - x[i + 1]) * (x[i] - x[i + 1]);
        }
        return e;
    }
    void gradient(const Vector& x, Vector& g) const override {
        g.resize(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) g[i] = std::sinh(x[i] - c_[i]);
        for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
            g[i] += 2 * (x[i] - x[i + 1]);
            g[i + 1] -= 2 * (x[i] - x[i + 1]);
        }
    }
    void hessian(const Vector& x, SparseMatrix& h) const override {
        std::vector<Eigen::Triplet<double>> t;
        for (Eigen::Index i = 0; i < x.size(); ++i) t.emplace_back(i, i, std::cosh(x[i] - c_[i]));
        for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
            t.emplace_back(i, i, 2.0);
            t.emplace_back(i + 1, i + 1, 2.0);
            t.emplace_back(i, i + 1, -2.0);
            t.emplace_back(i + 1, i, -2.0);
        }
        h.resize(x.size(), x.size());
        h.setFromTriplets(t.begin(), t.end());
    }
    Vector c_;
};

}  // namespace

TEST_CASE("Newton solves a quadratic in one step") {
    Quadratic q(20);
    auto r = newton_minimize(q, Vector::Zero(20), std::vector<char>(20, 0));
    CHECK(r.iterations == 1);
    Vector g;
    q.gradient(r.x, g);
    CHECK(g.norm() < 1e-10);
}

TEST_CASE("Newton keeps fixed entries and solves the reduced system") {
    Quadratic q(10);
    Vector x0 = Vector::Zero(10);
    x0[0] = 0.7;
    x0[9] = -0.2;
    std::vector<char> fixed(10, 0);
    fixed[0] = fixed[9] = 1;
    auto r = newton_minimize(q, x0, fixed);
    CHECK(r.x[0] == 0.7);
    CHECK(r.x[9] == -0.2);
    Vector g;
    q.gradient(r.x, g);
    CHECK(free_norm(g, fixed) < 1e-10);
}

TEST_CASE("Newton recovers a manufactured minimizer with decreasing energy") {
    const Vector c = Vector::Constant(15, 0.8);
    Manufactured e(c);
    NewtonOptions opts;
    opts.rel_tol = 1e-12;
    auto r = newton_minimize(e, Vector::LinSpaced(15, -3.0, 3.0), std::vector<char>(15, 0), opts);
    CHECK((r.x - c).lpNorm<Eigen::Infinity>() < 1e-9);
    for (std::size_t k = 1; k < r.energies.size(); ++k) CHECK(r.energies[k] <= r.energies[k - 1]);
}

TEST_CASE("Newton reports failure when the iteration budget is too small") {
    Manufactured e(Vector::Constant(5, 0.0));
    NewtonOptions opts;
    opts.max_iter = 1;
    opts.rel_tol = 1e-14;
    CHECK_THROWS_AS(newton_minimize(e, Vector::Constant(5, 4.0), std::vector<char>(5, 0), opts), SolverError);
}

TEST_CASE("sparse SPD solve") {
    Quadratic q(30);
    Vector x = solve_sparse_spd(q.a_, q.b_);
    CHECK((q.a_ * x - q.b_).norm() < 1e-12);
}

TEST_CASE("compensated sum keeps small terms and flags non-finite input") {
    CHECK(compensated_sum({1e16, 1.0, -1e16}) == 1.0);
    CHECK(std::isinf(compensated_sum({1.0, std::nan("")})));
}

TEST_CASE("serial and parallel assembly are bit-identical") {
    auto s = unit_space(12, 2);
    const auto& p = AssemblyPattern::get(*s, 2);
    auto kernel = [&](std::size_t t, double* loc) {
        for (int l = 0; l < p.local_size(); ++l) loc[l] = std::sin(0.1 * t + l) * s->mesh().area(t);
    };
    Vector a, b;
    assemble_vector(p, Exec::Serial, a, kernel);
    assemble_vector(p, Exec::Parallel, b, kernel);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    SparseMatrix ma, mb;
    auto mk = [&](std::size_t t, double* loc) {
        const int m = p.local_size();
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) loc[r * m + c] = std::cos(0.01 * t * (r + 1) * (c + 1));
    };
    assemble_matrix(p, Exec::Serial, ma, mk);
    assemble_matrix(p, Exec::Parallel, mb, mk);
    CHECK(SparseMatrix(ma - mb).norm() == 0.0);
}
