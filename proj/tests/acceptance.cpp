// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--strict] [N ...]
//
// With no numbers every criterion runs. The exit code is 0 once all selected
// criteria have been evaluated; --strict makes any FAIL return 1.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "egrow/diagnostics.hpp"
#include "egrow/phase.hpp"
#include "egrow/regelation.hpp"
#include "egrow/scenarios.hpp"
#include "egrow/verify.hpp"

using namespace egrow;

namespace {

struct Outcome {
    bool passed = false;
    std::string summary;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

struct Run {
    std::vector<DiagnosticsRow> rows;  ///< every step, including step 0
    std::vector<Polyline> interface;
    double seconds = 0.0;
};

Run run_steps(Simulation& sim) {
    Run out;
    const auto t0 = Clock::now();
    out.rows.push_back(sim.diagnostics());
    for (int n = 0; n < sim.config().steps; ++n) {
        sim.step();
        out.rows.push_back(sim.diagnostics());
    }
    out.seconds = seconds_since(t0);
    out.interface = extract_interface(sim.state().phi);
    return out;
}

// ---------------------------------------------------------------------------

Outcome relaxation() {
    Simulation sim(preset("relax_prestressed"));
    const Run r = run_steps(sim);
    const State& s = sim.state();
    const auto mask = sim.interior_mask();
    const auto stress = stress_norms(s.phi, s.rho, s.Fe, sim.material());
    double fe_dev = 0.0, smax = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i]) continue;
        fe_dev = std::max(fe_dev, (s.Fe.tensor_at(i) - Mat2::Identity()).cwiseAbs().maxCoeff());
        smax = std::max(smax, stress[i]);
    }
    const double mu = sim.config().mu;
    const bool ok = fe_dev <= 1e-2 && smax <= 1e-3 * mu && r.seconds <= 60.0;
    return {ok, fmt("|Fe-I|inf=%.2e (<=1e-2)", fe_dev) + fmt(" max stress=%.2e", smax) +
                    fmt(" (<=%.1e)", 1e-3 * mu) + fmt(" runtime=%.1fs (<=60)", r.seconds)};
}

// Criteria 2, 3 and the accretion half of 7 share the desk run.
const Run& desk_growth_run() {
    static const Run run = [] {
        Simulation sim(preset("non_normal_fixed"));
        return run_steps(sim);
    }();
    return run;
}

Outcome growth_direction() {
    const Run& r = desk_growth_run();
    const DiagnosticsRow& last = r.rows.back();
    const double slope = std::abs(last.tilt_slope);
    const ScenarioConfig c = preset("non_normal_fixed");
    const bool ok = std::abs(slope - c.alpha) <= 0.2 * c.alpha && last.max_stress <= 1e-2 * c.mu && r.seconds <= 300.0;
    return {ok, fmt("|slope|=%.4f", slope) + fmt(" (%.3f +/- 20%%)", c.alpha) +
                    fmt(" max stress=%.2e", last.max_stress) + fmt(" (<=%.1e)", 1e-2 * c.mu) +
                    fmt(" runtime=%.1fs (<=300)", r.seconds)};
}

Outcome mesh_robustness() {
    const Run& coarse = desk_growth_run();
    ScenarioConfig fine = preset("non_normal_fixed");
    const double eps = fine.epsilon();
    fine.nx *= 2;
    fine.ny *= 2;
    fine.split_steps_for_guard();
    Simulation sim(fine);
    const Run r = run_steps(sim);
    const double d = hausdorff_distance(coarse.interface, r.interface);
    return {d <= 2.0 * eps, fmt("Hausdorff=%.4f", d) + fmt(" (<=2 eps=%.4f)", 2.0 * eps) +
                                fmt(" fine run %.1fs", r.seconds) + fmt(" with dt=%.4f", fine.dt)};
}

// Midline x of the column at height y: mean of the outermost crossings.
bool midline_at(const std::vector<Polyline>& curves, double y, double& x) {
    double lo = 1e300, hi = -1e300;
    for (const auto& pl : curves)
        for (std::size_t k = 0; k + 1 < pl.size(); ++k) {
            const Vec2 &a = pl[k], &b = pl[k + 1];
            if ((a.y() - y) * (b.y() - y) > 0.0 || a.y() == b.y()) continue;
            const double xc = a.x() + (y - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
            lo = std::min(lo, xc);
            hi = std::max(hi, xc);
        }
    if (lo > hi) return false;
    x = 0.5 * (lo + hi);
    return true;
}

Outcome oscillating_growth() {
    const ScenarioConfig c = preset("non_normal_oscillating");
    Simulation sim(c);
    const Run r = run_steps(sim);
    const double T = sim.state().t;
    const double out_dt = c.dt * c.output_every;
    // Material at height y was accreted at t = T - y / v0. Fit the midline
    // slope over a sliding window and record where it changes sign.
    const double half = 0.0125, dy = 0.0025;
    std::vector<std::pair<double, double>> slope_of_t;  // (t_accreted, slope)
    for (double y = half; y <= c.v0 * T - half; y += dy) {
        std::vector<Vec2> pts;
        for (double yy = y - half; yy <= y + half + 1e-12; yy += dy / 2) {
            double x;
            if (midline_at(r.interface, yy, x)) pts.emplace_back(x, yy);
        }
        if (pts.size() < 5) continue;
        double sy = 0, sx = 0, syy = 0, sxy = 0;
        for (const Vec2& p : pts) {
            sy += p.y();
            sx += p.x();
            syy += p.y() * p.y();
            sxy += p.x() * p.y();
        }
        const double n = static_cast<double>(pts.size());
        slope_of_t.emplace_back(T - y / c.v0, (n * sxy - sx * sy) / (n * syy - sy * sy));
    }
    std::sort(slope_of_t.begin(), slope_of_t.end());
    std::vector<double> crossings;
    std::vector<int> signs;
    for (std::size_t k = 0; k + 1 < slope_of_t.size(); ++k) {
        const auto [t0, s0] = slope_of_t[k];
        const auto [t1, s1] = slope_of_t[k + 1];
        if (s0 == 0.0 || (s0 > 0.0) == (s1 > 0.0)) continue;
        crossings.push_back(t0 + (t1 - t0) * s0 / (s0 - s1));
        signs.push_back(s1 > 0.0 ? 1 : -1);
    }
    // alpha(t) = a sin(omega t) changes sign every pi / omega
    const double half_period = std::numbers::pi / c.alpha_omega;
    bool ok = crossings.size() >= 3;
    double worst = 0.0;
    std::ostringstream where;
    for (std::size_t k = 0; k < crossings.size(); ++k) {
        where << (k ? "," : "") << fmt("%.3f", crossings[k]);
        if (k > 0) {
            worst = std::max(worst, std::abs(crossings[k] - crossings[k - 1] - half_period));
            if (signs[k] == signs[k - 1]) ok = false;
        }
    }
    ok = ok && worst <= out_dt;
    return {ok, "sign changes at t=" + where.str() + fmt(" worst half-period error=%.4f", worst) +
                    fmt(" (<=%.3f)", out_dt) + fmt(" runtime=%.1fs", r.seconds)};
}

// ---------------------------------------------------------------------------
// Regelation. The melt pocket is the melt (phi > 0) area below the initial
// interface.

double pocket_area(const Simulation& sim) { return phase_area_below(sim.state().phi, sim.config().interface_y); }

Outcome regelation_trends() {
    const auto t0 = Clock::now();
    std::ostringstream msg;
    bool ok = true;

    // (a) + (b): the loaded run.
    ScenarioConfig c = preset("regelation_wire");
    {
        Simulation sim(c);
        const int early = std::max(1, c.steps / 10);
        int pocket_step = -1;
        std::vector<double> y0;
        for (int n = 1; n <= c.steps; ++n) {
            sim.step();
            y0.push_back(sim.last_y0());
            if (pocket_step < 0 && pocket_area(sim) > 0.0) pocket_step = n;
        }
        const bool a = pocket_step > 0 && pocket_step <= early;
        // Transient: the first 10% of the steps. The lowest point is an
        // interpolated edge crossing, which wobbles by a small fraction of a
        // cell once the descent slows; rises up to 0.1 dx count as noise.
        const double noise = 0.1 * c.dx();
        int rises = 0;
        double worst_rise = 0.0;
        for (std::size_t k = static_cast<std::size_t>(early) + 1; k < y0.size(); ++k) {
            if (!(y0[k] < y0[k - 1])) ++rises;
            worst_rise = std::max(worst_rise, y0[k] - y0[k - 1]);
        }
        const bool b = worst_rise <= noise && y0.back() < y0[early];
        msg << "(a) pocket at step " << pocket_step << " (<=" << early << ") " << (a ? "ok" : "FAIL")
            << "; (b) y0 " << fmt("%.4f", y0[early]) << "->" << fmt("%.4f", y0.back()) << ", largest rise "
            << fmt("%.1e", worst_rise) << fmt(" (<=0.1 dx=%.1e", noise) << ", " << rises << " non-decreasing steps) "
            << (b ? "ok" : "FAIL");
        ok = ok && a && b;
    }
    // (c): load removed once the pocket exists.
    {
        ScenarioConfig cc = c;
        cc.load_off_step = std::max(1, c.steps / 10);
        cc.steps = cc.load_off_step + 50;
        Simulation sim(cc);
        for (int n = 0; n < cc.load_off_step; ++n) sim.step();
        const double before = pocket_area(sim);
        for (int n = 0; n < 50; ++n) sim.step();
        const double after = pocket_area(sim);
        const bool cpass = before > 0.0 && after <= 0.5 * before;
        msg << "; (c) pocket " << fmt("%.3e", before) << "->" << fmt("%.3e", after) << " (<=50%) "
            << (cpass ? "ok" : "FAIL");
        ok = ok && cpass;
    }
    // (d): no load; the undercooled interface freezes upwards.
    {
        ScenarioConfig cd = c;
        cd.load_off_step = 0;
        cd.steps = 20;
        Simulation sim(cd);
        const double before = update_y0(sim.state().phi);
        const double area0 = body_area(sim.state().phi, cd.l);
        for (int n = 0; n < cd.steps; ++n) sim.step();
        const double area1 = body_area(sim.state().phi, cd.l);
        const double after = update_y0(sim.state().phi);
        const bool d = area1 < area0 && after > before;
        msg << "; (d) interface " << fmt("%.5f", before) << "->" << fmt("%.5f", after) << " "
            << (d ? "ok" : "FAIL");
        ok = ok && d;
    }
    const double secs = seconds_since(t0);
    msg << fmt("; runtime=%.0fs (<=900)", secs);
    return {ok && secs <= 900.0, msg.str()};
}

Outcome property_suite() {
    const auto results = run_checks();
    std::ostringstream failed;
    int npass = 0;
    for (const auto& r : results) {
        if (r.passed) ++npass;
        else failed << " " << r.name << fmt("=%.2e", r.value) << fmt("(tol %.0e)", r.tolerance);
    }
    std::ostringstream msg;
    msg << npass << "/" << results.size() << " checks pass";
    if (npass != static_cast<int>(results.size())) msg << "; failing:" << failed.str();
    return {npass == static_cast<int>(results.size()), msg.str()};
}

Outcome conservation() {
    std::ostringstream msg;
    // (i) Full steps of the prestressed body with no growth and no load:
    // the relaxation moves it in the first step, then it rests. Measured on
    // the desk mesh and, to show the convergence rate, one refinement.
    auto drift_at = [](int refine) {
        ScenarioConfig c = preset("relax_prestressed");
        c.nx *= refine;
        c.ny *= refine;
        c.steps = 50;
        Simulation sim(c);
        const double m0 = sim.diagnostics().mass;
        double worst = 0.0;
        for (int n = 0; n < c.steps; ++n) {
            sim.step();
            worst = std::max(worst, std::abs(sim.diagnostics().mass - m0) / m0);
        }
        return worst;
    };
    const double drift = drift_at(1);
    const bool a = drift < 1e-2;
    msg << fmt("no-growth drift over 50 steps=%.2e (<1e-2)", drift) << fmt(" [2x finer mesh: %.2e]", drift_at(2));

    // (ii) Accretion: mass gained per step against rho_a times the area gained.
    const Run& g = desk_growth_run();
    const double rho_a = preset("non_normal_fixed").rho0;
    double worst = 0.0;
    for (std::size_t k = 1; k < g.rows.size(); ++k) {
        const double dm = g.rows[k].mass - g.rows[k - 1].mass;
        const double da = g.rows[k].area - g.rows[k - 1].area;
        worst = std::max(worst, std::abs(dm - rho_a * da) / std::abs(rho_a * da));
    }
    const bool b = worst <= 2e-2;
    msg << fmt("; accretion worst per-step mismatch=%.2e (<=2e-2)", worst);
    return {a && b, msg.str()};
}

// Hydrostatic pressure p: scalar stretch a of each phase with Cauchy stress -p I.
double hydrostatic_stretch(const ThermoParams& p, double pressure, bool melt) {
    const double phi = melt ? 1.0 : -1.0;
    const double rho_ref = melt ? p.rho_melt : p.rho_solid;
    auto sxx = [&](double a) {
        const Mat2 Fe = a * Mat2::Identity();
        return regelation_stress(Fe, rho_ref / (a * a), phi, Vec2::Zero(), p)(0, 0) + pressure;
    };
    double lo = 0.5, hi = 1.5;
    if (sxx(lo) > 0.0 || sxx(hi) < 0.0) throw std::runtime_error("hydrostatic stretch not bracketed");
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        (sxx(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Outcome clausius_clapeyron() {
    ThermoParams p;
    const double w = std::sqrt(p.kappa1 / p.kappa2);
    const auto mesh = build_rect_mesh({0.0, 0.02, -1.0, 1.0}, 2, 1200, Diagonals::Uniform);
    const auto space = make_space(mesh, 1);
    const Field phi = interpolate_scalar(space, [&](const Vec2& x) { return std::tanh(x.y() / w); });
    // Net driving force on the interface, weighted towards its centre.
    auto net_force = [&](const State& s, double theta) {
        const Field f = driving_force(s, TemperatureField::uniform(space, theta), p, Exec::Serial);
        double sum = 0.0;
        for (std::size_t i = 0; i < f.num_dofs(); ++i) {
            const Vec2& x = space->dof_point(i);
            if (x.x() > 0.0 && x.x() < 0.02 && std::abs(x.y()) < 0.8) sum += f(i) * (1.0 - phi(i) * phi(i));
        }
        return sum;
    };
    const double loads[] = {0.0, 0.005, 0.01, 0.015, 0.02};
    std::vector<double> theta_star;
    for (double load : loads) {
        const double as = hydrostatic_stretch(p, load, false), am = hydrostatic_stretch(p, load, true);
        Field rho(space, Rank::Scalar), Fe(space, Rank::Tensor);
        for (std::size_t i = 0; i < phi.num_dofs(); ++i) {
            const double h = smooth_heaviside(phi(i), p.l);
            rho(i) = (1.0 - h) * p.rho_solid / (as * as) + h * p.rho_melt / (am * am);
            Fe.set_tensor(i, ((1.0 - h) * as + h * am) * Mat2::Identity());
        }
        const State s = make_state(phi, rho, Fe, space);
        double lo = -1.0, hi = 1.0;
        const double flo = net_force(s, lo);
        if (flo * net_force(s, hi) > 0.0) return {false, "sign change not bracketed"};
        for (int k = 0; k < 80; ++k) {
            const double mid = 0.5 * (lo + hi);
            ((net_force(s, mid) > 0.0) == (flo > 0.0) ? lo : hi) = mid;
        }
        theta_star.push_back(0.5 * (lo + hi));
    }
    bool ok = true;
    std::ostringstream msg;
    msg << "theta_u* =";
    for (std::size_t k = 0; k < theta_star.size(); ++k) {
        msg << fmt(" %.6e", theta_star[k]);
        if (k > 0 && !(theta_star[k] > theta_star[k - 1])) ok = false;
    }
    msg << " for p =";
    for (double load : loads) msg << fmt(" %.3f", load);
    msg << " GPa (strictly increasing)";
    return {ok, msg.str()};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> fn;
};

}  // namespace

int main(int argc, char** argv) {
    bool strict = false;
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--strict") == 0) strict = true;
        else only.insert(std::atoi(argv[i]));
    }
    const std::vector<Criterion> all = {
        {1, "prestressed relaxation", relaxation},
        {2, "non-normal growth direction", growth_direction},
        {3, "mesh robustness", mesh_robustness},
        {4, "oscillating non-normal growth", oscillating_growth},
        {5, "regelation trends", regelation_trends},
        {6, "numerical property suite", property_suite},
        {7, "conservation", conservation},
        {8, "Clausius-Clapeyron monotonicity", clausius_clapeyron},
    };
    int failed = 0, ran = 0;
    for (const auto& c : all) {
        if (!only.empty() && !only.count(c.id)) continue;
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        ++ran;
        if (!o.passed) ++failed;
        std::printf("%s criterion %d (%s): %s\n", o.passed ? "PASS" : "FAIL", c.id, c.name, o.summary.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria pass\n", ran - failed, ran);
    return strict && failed > 0 ? 1 : 0;
}
