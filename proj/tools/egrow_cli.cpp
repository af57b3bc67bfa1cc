// Command-line entry point: run a configuration, print presets, run the
// property suite.

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "egrow/config.hpp"
#include "egrow/io.hpp"
#include "egrow/verify.hpp"

namespace fs = std::filesystem;
using namespace egrow;

namespace {

class DirectorySink : public OutputSink {
public:
    DirectorySink(fs::path dir, const Simulation& sim, RunManifest& manifest)
        : dir_(std::move(dir)), sim_(sim), manifest_(manifest) {}

    void on_output(int step, const State& state, const DiagnosticsRow& row) override {
        StageTimer timer(manifest_, "output");
        char name[32];
        std::snprintf(name, sizeof name, "state_%05d.vtk", step);
        write_vtk((dir_ / name).string(), state, sim_.material(), sim_.config().l);
        rows_.push_back(row);
        write_csv((dir_ / "diagnostics.csv").string(), rows_);
        std::printf("step %5d  t=%-10.5g area=%-12.6g mass=%-12.6g max_stress=%.4g\n", step, row.t, row.area,
                    row.mass, row.max_stress);
        std::fflush(stdout);
    }

private:
    fs::path dir_;
    const Simulation& sim_;
    RunManifest& manifest_;
    std::vector<DiagnosticsRow> rows_;
};

int cmd_run(const std::string& path, std::string out, const std::string& resolution, int steps) {
    ScenarioConfig cfg;
    try {
        cfg = parse_config_file(path);
        if (resolution == "paper") cfg.use_paper_resolution();
        else if (!resolution.empty()) cfg.resolution = resolution;
        if (steps >= 0) cfg.steps = steps;
        cfg.validate();
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: config: %s\n", e.what());
        return 2;
    }
    if (out.empty()) out = "out/" + cfg.scenario;
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) {
        std::fprintf(stderr, "error: io: cannot create %s: %s\n", out.c_str(), ec.message().c_str());
        return 3;
    }
    try {
        RunManifest manifest((fs::path(out) / "manifest.json").string(), path, out, cfg);
        try {
            std::unique_ptr<Simulation> sim;
            {
                StageTimer timer(manifest, "setup");
                sim = std::make_unique<Simulation>(cfg);
            }
            DirectorySink sink(out, *sim, manifest);
            sink.on_output(0, sim->state(), sim->diagnostics());
            for (int n = 1; n <= cfg.steps; ++n) {
                {
                    StageTimer timer(manifest, "step");
                    sim->step();
                }
                if (n % cfg.output_every == 0 || n == cfg.steps) sink.on_output(n, sim->state(), sim->diagnostics());
            }
        } catch (const std::exception& e) {
            manifest.set_status("failed", e.what());
            manifest.finalize();
            std::fprintf(stderr, "error: %s\n", e.what());
            return 4;
        }
        manifest.finalize();
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: io: %s\n", e.what());
        return 3;
    }
    std::printf("wrote %s\n", out.c_str());
    return 0;
}

int cmd_preset(const std::string& name, bool print) {
    try {
        const ScenarioConfig c = preset(name);
        if (print) std::fputs(config_echo(c).c_str(), stdout);
        else std::printf("%s: %d x %d mesh, %d steps of dt = %g\n", name.c_str(), c.nx, c.ny, c.steps, c.dt);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}

int cmd_verify(const std::string& filter) {
    const auto results = run_checks(filter);
    if (results.empty()) {
        std::fprintf(stderr, "error: no check matches '%s'\n", filter.c_str());
        return 2;
    }
    int failed = 0;
    for (const CheckResult& r : results) {
        std::printf("%-4s %-26s value=%-12.4g tol=%-10.3g %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.value,
                    r.tolerance, r.detail.c_str());
        failed += !r.passed;
    }
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Embedded-domain growth and regelation simulator"};
    app.require_subcommand(1);

    std::string run_path, out_dir, resolution;
    int steps = -1;
    auto* run = app.add_subcommand("run", "Run a configuration file");
    run->add_option("config", run_path, "TOML configuration")->required();
    run->add_option("--out", out_dir, "Output directory (default out/<scenario>)");
    run->add_option("--resolution", resolution, "Mesh resolution")->check(CLI::IsMember({"paper", "desk"}));
    run->add_option("--steps", steps, "Override the number of steps")->check(CLI::NonNegativeNumber);

    std::string preset_name;
    bool print = false;
    auto* pre = app.add_subcommand("preset", "Show a built-in scenario");
    pre->add_option("name", preset_name, "Scenario name")->required();
    pre->add_flag("--print", print, "Print the full configuration");

    std::string filter;
    auto* ver = app.add_subcommand("verify", "Run the numerical property suite");
    ver->add_option("--filter", filter, "Only run checks whose name contains this");

    CLI11_PARSE(app, argc, argv);
    if (*run) return cmd_run(run_path, out_dir, resolution, steps);
    if (*pre) return cmd_preset(preset_name, print);
    return cmd_verify(filter);
}
