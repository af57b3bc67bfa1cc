// Serial vs OpenMP timings of the main kernels on the relaxation setup.

#include <map>
#include <memory>

#include <benchmark/benchmark.h>

#include "egrow/scenarios.hpp"

using namespace egrow;

namespace {

struct Fixture {
    Simulation sim;
    ElasticProblem problem;

    explicit Fixture(int n) : sim(make_config(n)) {
        const State& s = sim.state();
        problem.material = sim.material();
        problem.phi = &s.phi;
        problem.rho = &s.rho;
        problem.Fe = &s.Fe;
        problem.bcs = sim.mechanics().bcs;
    }

    static ScenarioConfig make_config(int n) {
        ScenarioConfig c = preset("relax_prestressed");
        c.nx = 2 * n;
        c.ny = n;
        return c;
    }
};

Fixture& fixture(int n) {
    static std::map<int, std::unique_ptr<Fixture>> cache;
    auto& f = cache[n];
    if (!f) f = std::make_unique<Fixture>(n);
    return *f;
}

Exec exec_of(const benchmark::State& st) { return st.range(1) ? Exec::Parallel : Exec::Serial; }

void BM_Hessian(benchmark::State& st) {
    Fixture& f = fixture(static_cast<int>(st.range(0)));
    const IncrementalEnergy e(f.problem, f.sim.mechanics().u_space, exec_of(st));
    const Vector u = Vector::Zero(static_cast<Eigen::Index>(e.size()));
    SparseMatrix h;
    for (auto _ : st) {
        e.hessian(u, h);
        benchmark::DoNotOptimize(h.valuePtr());
    }
}

void BM_Gradient(benchmark::State& st) {
    Fixture& f = fixture(static_cast<int>(st.range(0)));
    const IncrementalEnergy e(f.problem, f.sim.mechanics().u_space, exec_of(st));
    const Vector u = Vector::Zero(static_cast<Eigen::Index>(e.size()));
    Vector g;
    for (auto _ : st) {
        e.gradient(u, g);
        benchmark::DoNotOptimize(g.data());
    }
}

void BM_Advect(benchmark::State& st) {
    Fixture& f = fixture(static_cast<int>(st.range(0)));
    const Field v = make_vector(f.sim.space(), Vec2(0.01, -0.02));
    for (auto _ : st) {
        Field out = semi_lagrangian_advect(f.sim.state().Fe, v, 1.0, OutOfDomainPolicy::nearest(), exec_of(st));
        benchmark::DoNotOptimize(out.coeffs.data());
    }
}

void BM_Regularize(benchmark::State& st) {
    Fixture& f = fixture(static_cast<int>(st.range(0)));
    const auto& ph = f.sim.mechanics().phase;
    for (auto _ : st) {
        Field out = regularize(f.sim.state().phi, ph, exec_of(st));
        benchmark::DoNotOptimize(out.coeffs.data());
    }
}

}  // namespace

BENCHMARK(BM_Hessian)->ArgsProduct({{32, 64}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Gradient)->ArgsProduct({{32, 64}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Advect)->ArgsProduct({{32, 64}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Regularize)->ArgsProduct({{32, 64}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
