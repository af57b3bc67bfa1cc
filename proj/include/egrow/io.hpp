#pragma once

#include <chrono>
#include <map>
#include <string>
#include <vector>

#include "egrow/scenarios.hpp"

namespace egrow {

/// Thrown when an output file cannot be written or an input cannot be read.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kToolVersion = "0.3.0";

/// Legacy ASCII VTK unstructured grid with point arrays phi, H, rho, Fe
/// (4 components, row-major), stress_norm and u (3-vector, z = 0).
void write_vtk(const std::string& path, const State& state, const BlendedMaterial& material, double l);

/// Contents of a legacy VTK file written by write_vtk.
struct VtkData {
    std::size_t num_points = 0;
    std::size_t num_cells = 0;
    std::vector<double> points;  ///< xyz triples
    std::vector<int> cell_types;
    /// Point arrays by name, flattened over components.
    std::map<std::string, std::vector<double>> arrays;
    std::map<std::string, int> components;
};

VtkData read_vtk(const std::string& path);

/// Header row plus one row per entry; NaN columns are written as empty fields.
void write_csv(const std::string& path, const std::vector<DiagnosticsRow>& rows);
std::vector<DiagnosticsRow> read_csv(const std::string& path);

/// JSON record of a run: config, output directory, version and timings.
/// Written at construction, rewritten by finalize().
class RunManifest {
public:
    RunManifest(std::string path, std::string config_path, std::string out_dir, const ScenarioConfig& config);

    /// Accumulate wall-clock seconds under `stage`.
    void add_time(const std::string& stage, double seconds);
    void set_status(std::string status, std::string message = {});
    /// Write the final manifest; safe to call more than once.
    void finalize();

private:
    void write() const;

    std::string path_, config_path_, out_dir_, echo_, scenario_;
    std::map<std::string, double> times_;
    std::string status_ = "running", message_;
};

/// Scoped timer that adds its lifetime to a manifest stage.
class StageTimer {
public:
    StageTimer(RunManifest& m, std::string stage) : m_(m), stage_(std::move(stage)) {}
    ~StageTimer() {
        m_.add_time(stage_, std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count());
    }
    StageTimer(const StageTimer&) = delete;
    StageTimer& operator=(const StageTimer&) = delete;

private:
    RunManifest& m_;
    std::string stage_;
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace egrow
