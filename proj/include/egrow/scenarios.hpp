#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "egrow/diagnostics.hpp"
#include "egrow/growth.hpp"
#include "egrow/regelation.hpp"

namespace egrow {

/// Invalid or unknown configuration; the message names the key.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ScenarioKind { RelaxPrestressed, NonNormalFixed, NonNormalOscillating, RegelationWire };

ScenarioKind scenario_kind(const std::string& name);
const char* scenario_name(ScenarioKind kind);
std::vector<std::string> scenario_names();

/// Fully resolved parameters of one experiment. Lengths are in the units of
/// the scenario (nondimensional for the growth examples, meters for the
/// regelation example).
struct ScenarioConfig {
    std::string scenario = "relax_prestressed";
    ScenarioKind kind = ScenarioKind::RelaxPrestressed;

    // mesh and time
    std::string resolution = "desk";
    Rect domain{0.0, 2.0, 0.0, 1.0};
    int nx = 64, ny = 32;
    int u_degree = 1;
    double dt = 1.0;
    int steps = 3;
    int output_every = 1;
    bool parallel = true;

    // solid and exterior
    double mu = 1.0, lambda = 1.0;
    double exterior_factor = 1e-3;
    double l = 2.0;
    double epsilon_cells = 3.0;  ///< epsilon = epsilon_cells * dx
    double sigma_cells = 5.0;    ///< sigma_phi = sigma_cells / dx

    // initial body
    Rect body{0.5, 1.5, 0.0, 0.5};
    Mat2 Fe0 = Mat2::Identity();
    double rho0 = 1.0;

    // non-normal growth: alpha(t) = alpha * sin(alpha_omega t), or alpha if alpha_omega = 0
    double alpha = 0.0;
    double alpha_omega = 0.0;
    double v0 = 0.0;
    double window_x0 = 0.5, window_x1 = 1.5;

    // regelation
    double interface_y = 0.1;
    double interface_width = 0.01;
    double undercooling = 0.02;
    double load_magnitude = 48.0;
    double load_radius = 0.02;
    double load_sharpness = 1e4;
    int load_off_step = -1;  ///< remove the load from this step on (-1: never)
    ThermoParams thermo;

    // solver
    double newton_tol = 1e-8;
    int newton_max_iter = 50;

    double dx() const { return std::min(domain.width() / nx, domain.height() / ny); }
    double epsilon() const { return epsilon_cells * dx(); }
    double sigma() const { return sigma_cells / dx(); }
    double alpha_at(double t) const { return alpha_omega == 0.0 ? alpha : alpha * std::sin(alpha_omega * t); }
    bool is_growth() const { return kind == ScenarioKind::NonNormalFixed || kind == ScenarioKind::NonNormalOscillating; }

    /// Throws ConfigError naming the offending key.
    void validate() const;
    /// Switch nx, ny to the paper's element size (growth scenarios also
    /// split their steps, see below).
    void use_paper_resolution();
    /// Divide dt by the smallest integer that gives dt * v0 < 0.9 dx,
    /// multiplying steps and output_every by the same factor.
    void split_steps_for_guard();
};

/// Defaults for a named experiment. Throws ConfigError for unknown names.
ScenarioConfig preset(const std::string& name);

/// One row of the diagnostics time series. tilt_slope and y0 are NaN when
/// they do not apply to the scenario.
struct DiagnosticsRow {
    int step = 0;
    double t = 0.0;
    double area = 0.0;
    double mass = 0.0;
    double max_stress = 0.0;
    double mean_stress = 0.0;
    double tilt_slope = std::numeric_limits<double>::quiet_NaN();
    double y0 = std::numeric_limits<double>::quiet_NaN();
};

/// Receives output at the configured cadence.
class OutputSink {
public:
    virtual ~OutputSink() = default;
    virtual void on_output(int step, const State& state, const DiagnosticsRow& row) = 0;
};

/// Step-by-step driver for one scenario.
class Simulation {
public:
    explicit Simulation(ScenarioConfig config);

    const ScenarioConfig& config() const { return cfg_; }
    const State& state() const { return state_; }
    int step_index() const { return step_; }
    const MeshPtr& mesh() const { return mesh_; }
    const SpacePtr& space() const { return space_; }
    const BlendedMaterial& material() const { return material_; }
    /// Regelation setup (load, temperature); null for other scenarios.
    RegelationSetup* regelation() { return regel_ ? regel_.get() : nullptr; }
    const GrowthSpec& growth_spec() const { return spec_; }
    const MechanicsSetup& mechanics() const { return mech_; }

    /// Advance one time step; throws StepError tagged with the step index.
    void step();
    DiagnosticsRow diagnostics() const;
    /// Mask of dofs in the body interior used for stress statistics.
    std::vector<char> interior_mask() const;

    /// Wire position used by the last regelation step.
    double last_y0() const { return last_y0_; }

private:
    void update_growth_spec();

    ScenarioConfig cfg_;
    MeshPtr mesh_;
    SpacePtr space_;
    SpacePtr u_space_;
    BlendedMaterial material_;
    GrowthSpec spec_;
    MechanicsSetup mech_;
    std::unique_ptr<RegelationSetup> regel_;
    State state_;
    int step_ = 0;
    double last_y0_ = std::numeric_limits<double>::quiet_NaN();
};

/// Run `config.steps` steps, emitting output at step 0, every
/// output_every steps and at the final step. Returns every emitted row.
std::vector<DiagnosticsRow> run(const ScenarioConfig& config, OutputSink* sink = nullptr);

/// Signed distance to an axis-aligned box (positive inside). Sides lying on
/// the domain boundary are ignored, so a body resting on a wall has no
/// interface there.
double box_signed_distance(const Vec2& x, const Rect& box, const Rect& domain);

/// Area of {phi > 0} with y < y_cut, by quadrature.
double phase_area_below(const Field& phi, double y_cut);

}  // namespace egrow
