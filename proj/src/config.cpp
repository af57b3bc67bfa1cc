#include "egrow/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace egrow {

namespace {

struct Value {
    enum class Kind { Number, Bool, String, Array } kind = Kind::Number;
    double number = 0.0;
    bool boolean = false;
    std::string text;
    std::vector<Value> items;
};

class Parser {
public:
    Parser(const std::string& line, std::string where) : s_(line), where_(std::move(where)) {}

    Value value() {
        skip_ws();
        if (pos_ >= s_.size()) fail("missing value");
        const char c = s_[pos_];
        if (c == '"') return string_value();
        if (c == '[') return array_value();
        if (s_.compare(pos_, 4, "true") == 0) {
            pos_ += 4;
            Value v;
            v.kind = Value::Kind::Bool;
            v.boolean = true;
            return v;
        }
        if (s_.compare(pos_, 5, "false") == 0) {
            pos_ += 5;
            Value v;
            v.kind = Value::Kind::Bool;
            return v;
        }
        return number_value();
    }

    void finish() {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] != '#') fail("unexpected trailing characters");
    }

private:
    [[noreturn]] void fail(const std::string& why) const { throw ConfigError(where_ + ": " + why); }

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    }

    Value string_value() {
        ++pos_;
        Value v;
        v.kind = Value::Kind::String;
        while (pos_ < s_.size() && s_[pos_] != '"') {
            if (s_[pos_] == '\\') fail("escape sequences are not supported");
            v.text += s_[pos_++];
        }
        if (pos_ >= s_.size()) fail("unterminated string");
        ++pos_;
        return v;
    }

    Value array_value() {
        ++pos_;
        Value v;
        v.kind = Value::Kind::Array;
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == ']') {
            ++pos_;
            return v;
        }
        for (;;) {
            v.items.push_back(value());
            skip_ws();
            if (pos_ >= s_.size()) fail("unterminated array");
            if (s_[pos_] == ']') {
                ++pos_;
                return v;
            }
            if (s_[pos_] != ',') fail("expected ',' or ']' in array");
            ++pos_;
        }
    }

    Value number_value() {
        std::size_t end = pos_;
        while (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '.' ||
                                   s_[end] == '-' || s_[end] == '+' || s_[end] == '_'))
            ++end;
        std::string tok = s_.substr(pos_, end - pos_);
        std::erase(tok, '_');
        const char* first = tok.c_str();
        if (!tok.empty() && tok[0] == '+') ++first;
        Value v;
        const auto [ptr, ec] = std::from_chars(first, tok.c_str() + tok.size(), v.number);
        if (tok.empty() || ec != std::errc() || ptr != tok.c_str() + tok.size())
            fail("malformed value '" + s_.substr(pos_, end - pos_) + "'");
        pos_ = end;
        return v;
    }

    const std::string& s_;
    std::string where_;
    std::size_t pos_ = 0;
};

// Typed accessors; `key` is the full key path for messages.
double as_number(const Value& v, const std::string& key) {
    if (v.kind != Value::Kind::Number) throw ConfigError(key + ": expected a number");
    return v.number;
}

int as_int(const Value& v, const std::string& key) {
    const double x = as_number(v, key);
    if (x != std::floor(x) || std::abs(x) > 1e9) throw ConfigError(key + ": expected an integer");
    return static_cast<int>(x);
}

bool as_bool(const Value& v, const std::string& key) {
    if (v.kind != Value::Kind::Bool) throw ConfigError(key + ": expected true or false");
    return v.boolean;
}

std::string as_string(const Value& v, const std::string& key) {
    if (v.kind != Value::Kind::String) throw ConfigError(key + ": expected a quoted string");
    return v.text;
}

std::vector<double> as_numbers(const Value& v, const std::string& key, std::size_t n) {
    if (v.kind != Value::Kind::Array || v.items.size() != n)
        throw ConfigError(key + ": expected an array of " + std::to_string(n) + " numbers");
    std::vector<double> out;
    for (const Value& item : v.items) out.push_back(as_number(item, key));
    return out;
}

Mat2 as_matrix(const Value& v, const std::string& key) {
    if (v.kind != Value::Kind::Array || v.items.size() != 2)
        throw ConfigError(key + ": expected [[a, b], [c, d]]");
    const auto r0 = as_numbers(v.items[0], key, 2);
    const auto r1 = as_numbers(v.items[1], key, 2);
    Mat2 m;
    m << r0[0], r0[1], r1[0], r1[1];
    return m;
}

Rect as_rect(const Value& v, const std::string& key) {
    const auto a = as_numbers(v, key, 4);
    return {a[0], a[1], a[2], a[3]};
}

using Setter = std::function<void(ScenarioConfig&, const Value&, const std::string&)>;

struct KeySpec {
    const char* section;
    const char* name;
    Setter set;
};

#define EGROW_NUM(sec, key, member) \
    {sec, key, [](ScenarioConfig& c, const Value& v, const std::string& k) { c.member = as_number(v, k); }}
#define EGROW_INT(sec, key, member) \
    {sec, key, [](ScenarioConfig& c, const Value& v, const std::string& k) { c.member = as_int(v, k); }}

const std::vector<KeySpec>& key_table() {
    static const std::vector<KeySpec> table = {
        {"", "resolution", [](ScenarioConfig& c, const Value& v, const std::string& k) { c.resolution = as_string(v, k); }},
        {"mesh", "domain", [](ScenarioConfig& c, const Value& v, const std::string& k) { c.domain = as_rect(v, k); }},
        EGROW_INT("mesh", "nx", nx),
        EGROW_INT("mesh", "ny", ny),
        EGROW_INT("mesh", "u_degree", u_degree),
        EGROW_NUM("time", "dt", dt),
        EGROW_INT("time", "steps", steps),
        EGROW_INT("output", "output_every", output_every),
        {"solver", "parallel", [](ScenarioConfig& c, const Value& v, const std::string& k) { c.parallel = as_bool(v, k); }},
        EGROW_NUM("solver", "newton_tol", newton_tol),
        EGROW_INT("solver", "newton_max_iter", newton_max_iter),
        EGROW_NUM("material", "mu", mu),
        EGROW_NUM("material", "lambda", lambda),
        EGROW_NUM("material", "exterior_factor", exterior_factor),
        EGROW_NUM("phase", "l", l),
        EGROW_NUM("phase", "epsilon_cells", epsilon_cells),
        EGROW_NUM("phase", "sigma_cells", sigma_cells),
        {"body", "box", [](ScenarioConfig& c, const Value& v, const std::string& k) { c.body = as_rect(v, k); }},
        {"body", "fe0", [](ScenarioConfig& c, const Value& v, const std::string& k) { c.Fe0 = as_matrix(v, k); }},
        EGROW_NUM("body", "rho0", rho0),
        EGROW_NUM("growth", "alpha", alpha),
        EGROW_NUM("growth", "alpha_omega", alpha_omega),
        EGROW_NUM("growth", "v0", v0),
        {"growth", "window",
         [](ScenarioConfig& c, const Value& v, const std::string& k) {
             const auto w = as_numbers(v, k, 2);
             c.window_x0 = w[0];
             c.window_x1 = w[1];
         }},
        EGROW_NUM("regelation", "interface_y", interface_y),
        EGROW_NUM("regelation", "interface_width", interface_width),
        EGROW_NUM("regelation", "undercooling", undercooling),
        EGROW_NUM("regelation", "load_magnitude", load_magnitude),
        EGROW_NUM("regelation", "load_radius", load_radius),
        EGROW_NUM("regelation", "load_sharpness", load_sharpness),
        EGROW_INT("regelation", "load_off_step", load_off_step),
        EGROW_NUM("regelation", "latent_heat", thermo.L),
        EGROW_NUM("regelation", "heat_capacity", thermo.c_p),
        EGROW_NUM("regelation", "T_m0", thermo.T_m0),
        EGROW_NUM("regelation", "kappa", thermo.kappa),
        EGROW_NUM("regelation", "kappa1", thermo.kappa1),
        EGROW_NUM("regelation", "kappa2", thermo.kappa2),
        EGROW_NUM("regelation", "rho_solid", thermo.rho_solid),
        EGROW_NUM("regelation", "rho_melt", thermo.rho_melt),
        EGROW_NUM("regelation", "mu_solid", thermo.solid.mu),
        EGROW_NUM("regelation", "lambda_solid", thermo.solid.lambda),
        EGROW_NUM("regelation", "mu_melt", thermo.melt.mu),
        EGROW_NUM("regelation", "lambda_melt", thermo.melt.lambda),
    };
    return table;
}

#undef EGROW_NUM
#undef EGROW_INT

const KeySpec* find_key(const std::string& section, const std::string& name) {
    for (const KeySpec& k : key_table()) {
        if (name != k.name) continue;
        if (section.empty() || section == k.section) return &k;
    }
    return nullptr;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    return true;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    std::string s = buf;
    // keep floats recognizable as floats in other TOML readers
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

}  // namespace

ScenarioConfig parse_config_text(const std::string& text, const std::string& origin) {
    struct Entry {
        std::string section, key, path;
        Value value;
    };
    std::vector<Entry> entries;
    std::map<std::string, int> seen;
    std::string section;
    std::string scenario;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string where = origin + ":" + std::to_string(lineno);
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (line[0] == '[') {
            const auto close = line.find(']');
            if (close == std::string::npos) throw ConfigError(where + ": unterminated section header");
            const std::string rest = trim(line.substr(close + 1));
            if (!rest.empty() && rest[0] != '#') throw ConfigError(where + ": unexpected text after section header");
            section = trim(line.substr(1, close - 1));
            if (!valid_key(section)) throw ConfigError(where + ": bad section name '" + section + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (!valid_key(key)) throw ConfigError(where + ": bad key '" + key + "'");
        const std::string path = section.empty() ? key : section + "." + key;
        const std::string rhs = line.substr(eq + 1);
        Parser p(rhs, where + " (" + path + ")");
        Value v = p.value();
        p.finish();
        if (seen.count(path)) throw ConfigError(where + ": duplicate key " + path);
        seen[path] = lineno;
        if (path == "scenario") {
            scenario = as_string(v, "scenario");
            continue;
        }
        if (!find_key(section, key)) throw ConfigError(where + ": unknown key " + path);
        entries.push_back({section, key, path, std::move(v)});
    }
    if (scenario.empty()) throw ConfigError(origin + ": scenario: missing required key");
    ScenarioConfig c = preset(scenario);
    bool resolution_set = false;
    for (const Entry& e : entries) {
        if (e.key == "resolution") resolution_set = true;
        find_key(e.section, e.key)->set(c, e.value, e.path);
    }
    // "paper" switches the mesh unless nx/ny were given explicitly.
    if (resolution_set && c.resolution == "paper" && !seen.count("mesh.nx") && !seen.count("nx")) c.use_paper_resolution();
    c.validate();
    return c;
}

ScenarioConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError(path + ": file not found or unreadable");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str(), path);
}

std::string config_echo(const ScenarioConfig& c) {
    std::ostringstream o;
    auto rect = [](const Rect& r) {
        return "[" + fmt(r.x0) + ", " + fmt(r.x1) + ", " + fmt(r.y0) + ", " + fmt(r.y1) + "]";
    };
    o << "scenario = \"" << c.scenario << "\"\n";
    o << "resolution = \"" << c.resolution << "\"\n\n";
    o << "[mesh]\ndomain = " << rect(c.domain) << "\nnx = " << c.nx << "\nny = " << c.ny
      << "\nu_degree = " << c.u_degree << "\n\n";
    o << "[time]\ndt = " << fmt(c.dt) << "\nsteps = " << c.steps << "\n\n";
    o << "[output]\noutput_every = " << c.output_every << "\n\n";
    o << "[solver]\nparallel = " << (c.parallel ? "true" : "false") << "\nnewton_tol = " << fmt(c.newton_tol)
      << "\nnewton_max_iter = " << c.newton_max_iter << "\n\n";
    o << "[material]\nmu = " << fmt(c.mu) << "\nlambda = " << fmt(c.lambda)
      << "\nexterior_factor = " << fmt(c.exterior_factor) << "\n\n";
    o << "[phase]\nl = " << fmt(c.l) << "\nepsilon_cells = " << fmt(c.epsilon_cells)
      << "\nsigma_cells = " << fmt(c.sigma_cells) << "\n\n";
    o << "[body]\nbox = " << rect(c.body) << "\nfe0 = [[" << fmt(c.Fe0(0, 0)) << ", " << fmt(c.Fe0(0, 1)) << "], ["
      << fmt(c.Fe0(1, 0)) << ", " << fmt(c.Fe0(1, 1)) << "]]\nrho0 = " << fmt(c.rho0) << "\n\n";
    o << "[growth]\nalpha = " << fmt(c.alpha) << "\nalpha_omega = " << fmt(c.alpha_omega) << "\nv0 = " << fmt(c.v0)
      << "\nwindow = [" << fmt(c.window_x0) << ", " << fmt(c.window_x1) << "]\n\n";
    const ThermoParams& t = c.thermo;
    o << "[regelation]\ninterface_y = " << fmt(c.interface_y) << "\ninterface_width = " << fmt(c.interface_width)
      << "\nundercooling = " << fmt(c.undercooling) << "\nload_magnitude = " << fmt(c.load_magnitude)
      << "\nload_radius = " << fmt(c.load_radius) << "\nload_sharpness = " << fmt(c.load_sharpness)
      << "\nload_off_step = " << c.load_off_step << "\nlatent_heat = " << fmt(t.L)
      << "\nheat_capacity = " << fmt(t.c_p) << "\nT_m0 = " << fmt(t.T_m0) << "\nkappa = " << fmt(t.kappa)
      << "\nkappa1 = " << fmt(t.kappa1) << "\nkappa2 = " << fmt(t.kappa2) << "\nrho_solid = " << fmt(t.rho_solid)
      << "\nrho_melt = " << fmt(t.rho_melt) << "\nmu_solid = " << fmt(t.solid.mu)
      << "\nlambda_solid = " << fmt(t.solid.lambda) << "\nmu_melt = " << fmt(t.melt.mu)
      << "\nlambda_melt = " << fmt(t.melt.lambda) << "\n";
    return o.str();
}

}  // namespace egrow
