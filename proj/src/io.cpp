#include "egrow/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "egrow/config.hpp"

namespace egrow {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f.imbue(std::locale::classic());
    return f;
}

void check_written(std::ofstream& f, const std::string& path) {
    f.flush();
    if (!f) throw IoError("write failed for " + path);
}

// Locale-independent shortest round-trip formatting.
std::string num(double x, int digits = 17) {
    if (std::isnan(x)) return {};
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

}  // namespace

void write_vtk(const std::string& path, const State& state, const BlendedMaterial& material, double l) {
    const Mesh2D& mesh = state.phi.mesh();
    const std::size_t np = mesh.num_nodes(), nc = mesh.num_triangles();
    std::ofstream f = open_out(path);
    f << "# vtk DataFile Version 3.0\nembedded growth state t=" << num(state.t) << "\nASCII\n"
      << "DATASET UNSTRUCTURED_GRID\nPOINTS " << np << " double\n";
    for (std::size_t i = 0; i < np; ++i) f << num(mesh.node(i).x()) << ' ' << num(mesh.node(i).y()) << " 0\n";
    f << "CELLS " << nc << ' ' << 4 * nc << '\n';
    for (std::size_t t = 0; t < nc; ++t) {
        const auto& tri = mesh.triangle(t);
        f << "3 " << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
    }
    f << "CELL_TYPES " << nc << '\n';
    for (std::size_t t = 0; t < nc; ++t) f << "5\n";

    // Fields live on degree-1 spaces; u may be degree 2, whose first dofs are the nodes.
    const std::vector<double> sn = stress_norms(state.phi, state.rho, state.Fe, material);
    f << "POINT_DATA " << np << '\n';
    f << "SCALARS phi double 1\nLOOKUP_TABLE default\n";
    for (std::size_t i = 0; i < np; ++i) f << num(state.phi(i)) << '\n';
    f << "SCALARS H double 1\nLOOKUP_TABLE default\n";
    for (std::size_t i = 0; i < np; ++i) f << num(smooth_heaviside(state.phi(i), l)) << '\n';
    f << "SCALARS rho double 1\nLOOKUP_TABLE default\n";
    for (std::size_t i = 0; i < np; ++i) f << num(state.rho(i)) << '\n';
    f << "SCALARS Fe double 4\nLOOKUP_TABLE default\n";
    for (std::size_t i = 0; i < np; ++i)
        f << num(state.Fe(i, 0)) << ' ' << num(state.Fe(i, 1)) << ' ' << num(state.Fe(i, 2)) << ' '
          << num(state.Fe(i, 3)) << '\n';
    f << "SCALARS stress_norm double 1\nLOOKUP_TABLE default\n";
    for (std::size_t i = 0; i < np; ++i) f << num(sn[i]) << '\n';
    f << "VECTORS u double\n";
    for (std::size_t i = 0; i < np; ++i) {
        const bool has_u = !state.u_last.coeffs.empty();
        f << num(has_u ? state.u_last(i, 0) : 0.0) << ' ' << num(has_u ? state.u_last(i, 1) : 0.0) << " 0\n";
    }
    check_written(f, path);
}

VtkData read_vtk(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path);
    f.imbue(std::locale::classic());
    VtkData d;
    std::string line;
    std::getline(f, line);
    if (line != "# vtk DataFile Version 3.0") throw IoError(path + ": not a legacy VTK file");
    std::getline(f, line);  // title
    std::getline(f, line);
    if (line != "ASCII") throw IoError(path + ": only ASCII VTK is supported");
    std::string word;
    while (f >> word) {
        if (word == "DATASET") {
            f >> word;
        } else if (word == "POINTS") {
            f >> d.num_points >> word;
            d.points.resize(3 * d.num_points);
            for (double& x : d.points) f >> x;
        } else if (word == "CELLS") {
            std::size_t total = 0;
            f >> d.num_cells >> total;
            for (std::size_t k = 0; k < total; ++k) f >> word;
        } else if (word == "CELL_TYPES") {
            std::size_t n = 0;
            f >> n;
            d.cell_types.resize(n);
            for (int& c : d.cell_types) f >> c;
        } else if (word == "POINT_DATA") {
            std::size_t n = 0;
            f >> n;
        } else if (word == "SCALARS" || word == "VECTORS") {
            std::string name, type;
            int nc = 3;
            f >> name >> type;
            if (word == "SCALARS") {
                f >> nc;
                f >> word >> word;  // LOOKUP_TABLE default
            }
            std::vector<double> v(d.num_points * nc);
            for (double& x : v) f >> x;
            d.arrays[name] = std::move(v);
            d.components[name] = nc;
        } else {
            throw IoError(path + ": unexpected token '" + word + "'");
        }
        if (!f) throw IoError(path + ": truncated file");
    }
    return d;
}

void write_csv(const std::string& path, const std::vector<DiagnosticsRow>& rows) {
    std::ofstream f = open_out(path);
    f << "step,t,area,mass,max_stress,mean_stress,tilt_slope,y0\n";
    for (const DiagnosticsRow& r : rows)
        f << r.step << ',' << num(r.t) << ',' << num(r.area) << ',' << num(r.mass) << ',' << num(r.max_stress) << ','
          << num(r.mean_stress) << ',' << num(r.tilt_slope) << ',' << num(r.y0) << '\n';
    check_written(f, path);
}

std::vector<DiagnosticsRow> read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path);
    std::string line;
    std::getline(f, line);
    std::vector<DiagnosticsRow> rows;
    while (std::getline(f, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        while (cells.size() < 8) cells.emplace_back();
        auto val = [&](int k) {
            if (cells[k].empty()) return std::numeric_limits<double>::quiet_NaN();
            std::istringstream is(cells[k]);
            is.imbue(std::locale::classic());
            double x = 0.0;
            is >> x;
            if (!is) throw IoError(path + ": bad number '" + cells[k] + "'");
            return x;
        };
        DiagnosticsRow r;
        r.step = static_cast<int>(val(0));
        r.t = val(1);
        r.area = val(2);
        r.mass = val(3);
        r.max_stress = val(4);
        r.mean_stress = val(5);
        r.tilt_slope = val(6);
        r.y0 = val(7);
        rows.push_back(r);
    }
    return rows;
}

RunManifest::RunManifest(std::string path, std::string config_path, std::string out_dir, const ScenarioConfig& config)
    : path_(std::move(path)),
      config_path_(std::move(config_path)),
      out_dir_(std::move(out_dir)),
      echo_(config_echo(config)),
      scenario_(config.scenario) {
    write();
}

void RunManifest::add_time(const std::string& stage, double seconds) { times_[stage] += seconds; }

void RunManifest::set_status(std::string status, std::string message) {
    status_ = std::move(status);
    message_ = std::move(message);
}

void RunManifest::finalize() {
    if (status_ == "running") status_ = "ok";
    write();
}

void RunManifest::write() const {
    nlohmann::json j;
    j["tool"] = "egrow";
    j["version"] = kToolVersion;
    j["scenario"] = scenario_;
    j["config_path"] = config_path_;
    j["output_dir"] = out_dir_;
    j["config"] = echo_;
    j["wall_clock_seconds"] = times_;
    j["status"] = status_;
    if (!message_.empty()) j["message"] = message_;
    std::ofstream f = open_out(path_);
    f << j.dump(2) << '\n';
    check_written(f, path_);
}

}  // namespace egrow
