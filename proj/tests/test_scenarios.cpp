#include <doctest.h>

#include <cmath>

#include "egrow/scenarios.hpp"

using namespace egrow;

namespace {

ScenarioConfig small(const std::string& name) {
    ScenarioConfig c = preset(name);
    if (c.kind == ScenarioKind::RegelationWire) {
        c.nx = 24;
        c.ny = 30;
    } else if (c.kind != ScenarioKind::RelaxPrestressed) {
        c.nx = 32;
        c.ny = 16;
    }
    c.steps = 2;
    c.split_steps_for_guard();
    return c;
}

struct Counter : OutputSink {
    std::vector<int> steps;
    void on_output(int step, const State&, const DiagnosticsRow&) override { steps.push_back(step); }
};

bool same_rows(const std::vector<DiagnosticsRow>& a, const std::vector<DiagnosticsRow>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].area != b[i].area || a[i].mass != b[i].mass || a[i].max_stress != b[i].max_stress) return false;
        if (!(a[i].tilt_slope == b[i].tilt_slope || (std::isnan(a[i].tilt_slope) && std::isnan(b[i].tilt_slope))))
            return false;
    }
    return true;
}

}  // namespace

TEST_CASE("relaxation removes the prestress") {
    auto rows = run(small("relax_prestressed"));
    REQUIRE(rows.size() == 3);
    CHECK(rows.front().max_stress > 0.05);
    CHECK(rows.back().max_stress < 1e-3);
    CHECK(std::isnan(rows.back().tilt_slope));
}

TEST_CASE("output cadence includes the first and last step") {
    ScenarioConfig c = small("relax_prestressed");
    c.steps = 5;
    c.output_every = 2;
    Counter sink;
    run(c, &sink);
    CHECK(sink.steps == std::vector<int>{0, 2, 4, 5});
}

TEST_CASE("growth raises the body and accretes mass") {
    ScenarioConfig c = small("non_normal_fixed");
    auto rows = run(c);
    CHECK(rows.back().area > rows.front().area);
    CHECK(rows.back().mass > rows.front().mass);
    CHECK(rows.back().t == doctest::Approx(preset("non_normal_fixed").dt * 2));
}

TEST_CASE("serial and parallel runs give identical diagnostics") {
    for (const char* name : {"relax_prestressed", "non_normal_fixed"}) {
        ScenarioConfig a = small(name);
        ScenarioConfig b = a;
        a.parallel = false;
        b.parallel = true;
        CHECK(same_rows(run(a), run(b)));
    }
}

TEST_CASE("the regelation wire opens a melt pocket") {
    ScenarioConfig c = small("regelation_wire");
    Simulation sim(c);
    CHECK(phase_area_below(sim.state().phi, c.interface_y) < 1e-12);
    sim.step();
    CHECK(phase_area_below(sim.state().phi, c.interface_y) > 0.0);
    CHECK(std::isfinite(sim.diagnostics().y0));
}
