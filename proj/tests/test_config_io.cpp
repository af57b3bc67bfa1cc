#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "egrow/config.hpp"
#include "egrow/diagnostics.hpp"
#include "egrow/io.hpp"

using namespace egrow;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("egrow_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

/// Message of the ConfigError raised by parsing `text`.
std::string config_error(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("a minimal file gives the preset defaults") {
    for (const auto& name : scenario_names()) {
        const ScenarioConfig c = parse_config_text("scenario = \"" + name + "\"\n");
        CHECK(config_echo(c) == config_echo(preset(name)));
    }
}

TEST_CASE("overrides work in sections and at the top level") {
    auto a = parse_config_text("scenario = \"relax_prestressed\"\ndt = 0.005\n");
    CHECK(a.dt == 0.005);
    auto b = parse_config_text("scenario = \"relax_prestressed\"\n[time]\ndt = 0.005 # comment\nsteps = 7\n");
    CHECK(b.dt == 0.005);
    CHECK(b.steps == 7);
    CHECK(config_echo(a).find("dt = 0.005") != std::string::npos);
}

TEST_CASE("echo parses back to the same configuration") {
    for (const auto& name : scenario_names()) {
        ScenarioConfig c = preset(name);
        c.dt *= 0.37;
        c.mu = 1.0 / 3.0;
        const std::string echo = config_echo(c);
        CHECK(config_echo(parse_config_text(echo)) == echo);
    }
}

TEST_CASE("invalid configurations name the key") {
    CHECK(config_error("scenario = \"relax_prestressed\"\ndt = -1\n").find("time.dt") != std::string::npos);
    CHECK(config_error("scenario = \"relax_prestressed\"\n[mesh]\nnx = 0\n").find("mesh.nx") != std::string::npos);
    CHECK(config_error("scenario = \"relax_prestressed\"\nbogus = 1\n").find("bogus") != std::string::npos);
    CHECK(config_error("scenario = \"relax_prestressed\"\ndt = 1\ndt = 2\n").find("duplicate") != std::string::npos);
    CHECK(config_error("scenario = \"relax_prestressed\"\nnx = 2.5\n").find("integer") != std::string::npos);
    CHECK(config_error("dt = 1\n").find("scenario") != std::string::npos);
    CHECK(config_error("scenario = \"unknown\"\n").find("unknown") != std::string::npos);
    CHECK(config_error("scenario = \"relax_prestressed\"\n[time\n").find(":2:") != std::string::npos);
    CHECK(config_error("scenario = \"non_normal_fixed\"\ndt = 1.0\n").find("time.dt") != std::string::npos);
    CHECK_THROWS_AS(parse_config_file("/nonexistent/missing.toml"), ConfigError);
}

TEST_CASE("guard splitting keeps the output times") {
    auto c = preset("non_normal_fixed");
    c.dt = 0.05;
    c.steps = 10;
    c.output_every = 2;
    const double t_end = c.dt * c.steps, t_out = c.dt * c.output_every;
    c.split_steps_for_guard();
    CHECK(c.dt * c.v0 < c.dx());
    CHECK(c.dt * c.steps == doctest::Approx(t_end));
    CHECK(c.dt * c.output_every == doctest::Approx(t_out));
    CHECK_NOTHROW(c.validate());

    auto paper = preset("non_normal_oscillating");
    paper.use_paper_resolution();
    CHECK(paper.resolution == "paper");
    CHECK(paper.dx() == doctest::Approx(1.6e-3).epsilon(0.05));
    CHECK_NOTHROW(paper.validate());
}

TEST_CASE("box signed distance ignores sides on the domain boundary") {
    const Rect dom{0, 2, 0, 1}, box{0.5, 1.5, 0.0, 0.5};
    CHECK(box_signed_distance(Vec2(1.0, 0.01), box, dom) == doctest::Approx(0.49));
    CHECK(box_signed_distance(Vec2(1.0, 0.3), box, dom) == doctest::Approx(0.2));
    CHECK(box_signed_distance(Vec2(0.4, 0.2), box, dom) == doctest::Approx(-0.1));
}

TEST_CASE("VTK round trip") {
    auto dir = scratch_dir("vtk");
    auto mesh = build_rect_mesh({0, 1, 0, 1}, 1, 1);
    auto s = make_space(mesh, 1);
    auto phi = interpolate_scalar(s, [](const Vec2& x) { return 0.5 - x.y() + 1e-7 * x.x(); });
    Mat2 F;
    F << 1.0, 0.123456789, 0.0, 0.987654321;
    State st = make_state(phi, make_scalar(s, 0.9), make_tensor(s, F), s);
    st.u_last.set_vector(3, Vec2(1e-3, -2e-3));
    const auto mat = BlendedMaterial::solid_exterior({1.0, 1.0}, {1e-3, 1e-3}, 2.0);
    write_vtk((dir / "a.vtk").string(), st, mat, 2.0);
    const VtkData d = read_vtk((dir / "a.vtk").string());
    CHECK(d.num_points == 4);
    CHECK(d.num_cells == 2);
    for (int t : d.cell_types) CHECK(t == 5);
    CHECK(d.arrays.size() == 6);
    for (const char* name : {"phi", "H", "rho", "Fe", "stress_norm", "u"}) CHECK(d.arrays.count(name) == 1);
    CHECK(d.components.at("Fe") == 4);
    CHECK(d.components.at("u") == 3);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(std::abs(d.arrays.at("phi")[i] - phi(i)) <= 1e-6 * (1 + std::abs(phi(i))));
        CHECK(std::abs(d.arrays.at("Fe")[4 * i + 1] - F(0, 1)) <= 1e-6);
        CHECK(std::abs(d.points[3 * i] - mesh->node(i).x()) <= 1e-12);
    }
    CHECK(std::abs(d.arrays.at("u")[3 * 3 + 1] + 2e-3) <= 1e-9);
    const auto norms = stress_norms(st.phi, st.rho, st.Fe, mat);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(d.arrays.at("stress_norm")[i] - norms[i]) <= 1e-6 * (1 + norms[i]));
    CHECK_THROWS_AS(write_vtk("/nonexistent/dir/a.vtk", st, mat, 2.0), IoError);
}

TEST_CASE("CSV round trip") {
    auto dir = scratch_dir("csv");
    const auto path = (dir / "d.csv").string();
    write_csv(path, {});
    const std::string header = slurp(path);
    CHECK(std::count(header.begin(), header.end(), '\n') == 1);
    CHECK(read_csv(path).empty());

    DiagnosticsRow r;
    r.step = 3;
    r.t = 0.1 + 0.2;
    r.area = 1.0 / 3.0;
    r.mass = 2.0 / 7.0;
    r.max_stress = 1.234567890123456e-5;
    r.mean_stress = 3e-300;
    r.tilt_slope = -0.15;
    write_csv(path, {r});
    const std::string text = slurp(path);
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
    auto back = read_csv(path);
    REQUIRE(back.size() == 1);
    CHECK(back[0].step == 3);
    CHECK(std::abs(back[0].t - r.t) <= 1e-12 * r.t);
    CHECK(std::abs(back[0].area - r.area) <= 1e-12);
    CHECK(std::abs(back[0].mass - r.mass) <= 1e-12);
    CHECK(std::abs(back[0].max_stress - r.max_stress) <= 1e-12 * r.max_stress);
    CHECK(back[0].tilt_slope == r.tilt_slope);
    CHECK(std::isnan(back[0].y0));
}

TEST_CASE("run manifest records the configuration and timings") {
    auto dir = scratch_dir("manifest");
    const auto path = (dir / "manifest.json").string();
    ScenarioConfig c = preset("relax_prestressed");
    c.dt = 0.005;
    RunManifest m(path, "cfg.toml", dir.string(), c);
    {
        auto j = nlohmann::json::parse(slurp(path));
        CHECK(j["status"] == "running");
    }
    m.add_time("solve", 1.5);
    m.add_time("solve", 0.5);
    m.set_status("ok");
    m.finalize();
    auto j = nlohmann::json::parse(slurp(path));
    CHECK(j["scenario"] == "relax_prestressed");
    CHECK(j["version"] == kToolVersion);
    CHECK(j["status"] == "ok");
    CHECK(j["wall_clock_seconds"]["solve"].get<double>() == 2.0);
    CHECK(j["config"].get<std::string>().find("dt = 0.005") != std::string::npos);
    CHECK(config_echo(parse_config_text(j["config"].get<std::string>())) == config_echo(c));
}
