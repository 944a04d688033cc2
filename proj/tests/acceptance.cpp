// Acceptance gate: runs criteria 1-9 at their stated tolerances and prints
// one PASS/FAIL line per criterion. Exit status is 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "semicomp/verify.hpp"

using namespace semicomp;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

VectorField vortex(const GridSpec& g, double a) {
    VectorField v(g);
    for (int j = 1; j <= g.ny; ++j)
        for (int i = 1; i <= g.nx; ++i) {
            v.x(i, j) = a * std::sin(kPi * g.xc(i)) * std::cos(kPi * g.yc(j));
            v.y(i, j) = -a * std::cos(kPi * g.xc(i)) * std::sin(kPi * g.yc(j));
        }
    return v;
}

/// Asymmetric forcing used as the recoverable optimal control.
VectorField forcing(const GridSpec& g) {
    VectorField v = vortex(g, 1.0);
    for (int j = 1; j <= g.ny; ++j)
        for (int i = 1; i <= g.nx; ++i) v.y(i, j) += 0.5 * std::sin(2 * kPi * g.xc(i)) * std::sin(kPi * g.yc(j));
    return v;
}

PhysParams base_physics(bool qi) {
    PhysParams p;
    p.rho = 1.0;
    p.nu = 0.05;
    p.beta = 0.5;
    p.gamma = 0.05;
    p.b = 0.2;
    p.quasi_incompressible = qi;
    return p;
}

// 1. Zero data stays zero; a constant-pressure rest state is preserved.
Outcome null_rest(bool qi) {
    const GridSpec g{32, 32, 1.0, 1.0};
    const PhysParams prm = base_physics(qi);
    const TimeSpec t{1.0, 100};
    const Trajectory z = forward_solve(VectorField(g), ScalarField(g), Control(g, t.n_steps), prm, t);
    double zmax = 0.0;
    for (const Vec& x : z.states) zmax = std::max(zmax, x.cwiseAbs().maxCoeff());
    const double pbar = 1.7;
    const Trajectory r = forward_solve(VectorField(g), ScalarField(g, pbar), Control(g, t.n_steps), prm, t);
    double drift = 0.0;
    for (const Vec& x : r.states) {
        drift = std::max(drift, x.head(2 * g.cells()).cwiseAbs().maxCoeff() / pbar);
        drift = std::max(drift, (x.tail(g.cells()).array() - pbar).abs().maxCoeff() / pbar);
    }
    return {zmax == 0.0 && drift <= 1e-10, fmt("zero max %.1e (need 0), rest drift %.2e (need <= 1e-10)", zmax, drift)};
}

// 2. Energy audit of a decaying shear flow, three dt levels.
Outcome energy_balance(bool qi) {
    const GridSpec g{64, 64, 1.0, 1.0};
    const PhysParams prm = base_physics(qi);
    const double C = 1.0;
    std::vector<double> res, dts;
    bool bounded = true;
    for (int n : {20, 40, 80}) {
        const TimeSpec t{1.0, n};
        const Control u(g, n);
        const EnergyReport er = energy_audit(forward_solve(vortex(g, 0.05), ScalarField(g), u, prm, t), u);
        res.push_back(er.max_normalized_residual());
        dts.push_back(t.dt());
        bounded = bounded && res.back() <= C * t.dt();
    }
    const double r1 = res[0] / res[1], r2 = res[1] / res[2];
    const bool halves = std::abs(r1 - 2.0) <= 0.4 && std::abs(r2 - 2.0) <= 0.4;
    return {bounded && halves, fmt("residual/E0 %.3e %.3e %.3e for dt %.4g %.4g %.4g (C = %g), ratios %.3f %.3f (need 2 +- 0.4)",
                                   res[0], res[1], res[2], dts[0], dts[1], dts[2], C, r1, r2)};
}

// 3. Pressure pulse front speed between two probes.
Outcome wave_speed() {
    const GridSpec g{256, 8, 8.0, 0.25};
    PhysParams prm;
    prm.rho = 1.0;
    prm.beta = 0.25;
    prm.gamma = 1e-4;
    prm.nu = 1e-3;
    const double c = prm.wave_speed();
    const double dt = 0.4 * g.dx() / c;
    const int n = static_cast<int>(std::round(2.0 / dt));
    const ScalarField p0 = ScalarField::sample(g, [](double x, double) { return 0.01 * std::exp(-(x - 2.0) * (x - 2.0) / 0.0625); });
    const Trajectory tr = forward_solve(VectorField(g), p0, Control(g, n), prm, TimeSpec{n * dt, n});
    const Layout lay{g};
    auto arrival = [&](int i) {
        const int idx = lay.index(2, i, g.ny / 2);
        int best = 1;
        for (int k = 1; k < n; ++k)
            if (tr.states[static_cast<std::size_t>(k)][idx] > tr.states[static_cast<std::size_t>(best)][idx]) best = k;
        const double f0 = tr.states[static_cast<std::size_t>(best - 1)][idx];
        const double f1 = tr.states[static_cast<std::size_t>(best)][idx];
        const double f2 = tr.states[static_cast<std::size_t>(best + 1)][idx];
        return (best + 0.5 * (f0 - f2) / (f0 - 2.0 * f1 + f2)) * dt;
    };
    const int ia = 97, ib = 161;
    const double speed = (g.xc(ib) - g.xc(ia)) / (arrival(ib) - arrival(ia));
    return {std::abs(speed - c) <= 0.05 * c, fmt("measured %.4f, expected %.4f (tolerance 5%%)", speed, c)};
}

// 4. Discrete integration by parts and the Temam identity.
Outcome identities() {
    const IdentityLadder lad = identity_ladder({32, 64, 128});
    auto part = [](bool exact, double slope) { return exact || slope >= 1.9; };
    const bool pass = part(lad.green_exact, lad.slope_green) && part(lad.product_exact, lad.slope_product) &&
                      part(lad.temam_exact, lad.slope_temam);
    auto show = [](bool exact, double slope) { return exact ? std::string("exact") : fmt("slope %.3f", slope); };
    return {pass, "green " + show(lad.green_exact, lad.slope_green) + fmt(" (max %.1e)", lad.residuals.back().green) +
                      ", product " + show(lad.product_exact, lad.slope_product) + ", temam " +
                      show(lad.temam_exact, lad.slope_temam) + " (need exact or >= 1.9)"};
}

// 5. Adjoint gradient against central differences, all cost terms active.
Outcome gradient_fidelity(bool qi) {
    const GridSpec g{16, 16, 1.0, 1.0};
    const TimeSpec t{0.5, 10};
    ControlProblem pb = ControlProblem::at_rest(g, base_physics(qi), t);
    pb.v0 = vortex(g, 0.2);
    pb.p0 = ScalarField(g, 0.05);
    pb.weights = CostWeights{1.0, 0.5, 1e-2, 0.3, 0.2, 1.0, 0.5};
    const Layout lay{g};
    pb.targets.bulk = {lay.pack_state(vortex(g, -0.5), ScalarField(g, 0.1))};
    pb.targets.boundary = {trace_state(g, pb.params, lay.pack_state(vortex(g, 0.3), ScalarField(g, -0.1)))};
    pb.targets.terminal = lay.pack_state(vortex(g, 0.4), ScalarField(g, -0.2));
    const ReducedCost rc(pb);
    const Control u = Control::constant(g, t.n_steps, forcing(g));
    const GradCheckReport rep = fd_gradient_oracle(rc, u, 5, 2024);
    double cons = 0.0;
    for (double c : adjoint_consistency(rc.stepper(), rc.solve_state(u), 2025)) cons = std::max(cons, c);
    return {rep.worst() <= 1e-6 && cons <= 1e-12,
            fmt("worst min-over-eps error %.2e over 5 directions (need <= 1e-6), consistency %.1e (need <= 1e-12)", rep.worst(), cons)};
}

// 6. Optimizer on the recoverable-target instance.
Outcome stationarity() {
    const GridSpec g{32, 32, 1.0, 1.0};
    const TimeSpec t{0.5, 50};
    ControlProblem pb = ControlProblem::at_rest(g, base_physics(false), t);
    pb.weights = CostWeights{1.0, 0.0, 1e-3, 0.0, 0.0, 1.0, 0.0};
    pb.targets = Targets::from_trajectory(ReducedCost(pb).solve_state(Control::constant(g, t.n_steps, forcing(g))));
    const ReducedCost rc(pb);
    OptimizeOptions o;
    o.max_iterations = 200;
    const OptimizeResult res = optimize(rc, rc.zero_control(), o);
    const OptimizeReport& r = res.report;
    const double dt = rc.dt();
    const Evaluation& e = res.final_evaluation;
    const double resid = control_norm(e.gradient, dt);
    const double chi = control_norm(e.chi, dt);
    const bool pass = resid <= 1e-4 * (1.0 + chi) && r.J_final <= 0.1 * r.J_initial && r.monotone();
    return {pass, fmt("|kappa3 u - chi| %.2e vs bound %.2e, J %.3e -> %.3e (ratio %.2e, need <= 0.1), %d accepted steps, monotone: %s",
                      resid, 1e-4 * (1.0 + chi), r.J_initial, r.J_final, r.J_final / r.J_initial, r.accepted_steps(),
                      r.monotone() ? "yes" : "no")};
}

// 7. Manufactured-solution convergence.
Outcome mms() {
    const MmsResult s = run_mms(mms_steady_case(), {{16, 10}, {32, 10}, {64, 10}});
    const MmsResult t = run_mms(mms_temporal_case(), {{8, 10}, {8, 20}, {8, 40}, {8, 80}});
    const bool pass = s.slope_v_h >= 1.9 && s.slope_p_h >= 1.9 && t.slope_p_dt >= 0.9;
    return {pass, fmt("spatial slopes v %.3f p %.3f (need >= 1.9), temporal slope p %.3f (need >= 0.9)", s.slope_v_h,
                      s.slope_p_h, t.slope_p_dt)};
}

// 8. Perturbation-response ratios of the control-to-state map.
Outcome lipschitz() {
    const GridSpec g{32, 32, 1.0, 1.0};
    const TimeSpec t{0.5, 20};
    const SemiImplicitStepper st(g, base_physics(false), t.dt());
    const Control u = Control::constant(g, t.n_steps, forcing(g));
    std::mt19937_64 rng(7);
    const Control du = random_direction(g, t.n_steps, t.dt(), rng);
    const LipschitzReport r = lipschitz_probe(st, vortex(g, 0.2), ScalarField(g), u, du, {1e-2, 1e-3, 1e-4});
    return {r.variation_factor() < 2.0, fmt("ratios %.5f %.5f %.5f, variation factor %.6f (need < 2)", r.ratios[0],
                                            r.ratios[1], r.ratios[2], r.variation_factor())};
}

// 9. Quasi-incompressible toggle: stencil-level zeros, then 1, 2 and 5 again.
Outcome quasi_incompressible() {
    const GridSpec g{16, 16, 1.0, 1.0};
    const PhysParams prm = base_physics(true);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> N;
    Vec x(3 * g.cells());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = N(rng);
    const ExplicitTerms terms = explicit_terms(prm, unpack_state(g, prm, x));
    const double stencil = std::max({terms.pressure_quadratic.x.max_abs(), terms.pressure_quadratic.y.max_abs(),
                                     terms.pressure_transport.max_abs()});
    const Outcome c1 = null_rest(true), c2 = energy_balance(true), c5 = gradient_fidelity(true);
    return {stencil == 0.0 && c1.pass && c2.pass && c5.pass,
            fmt("beta-terms max %.1e (need 0); ", stencil) + "1: " + (c1.pass ? "pass" : "FAIL") + ", 2: " +
                (c2.pass ? "pass" : "FAIL") + " [" + c2.detail + "], 5: " + (c5.pass ? "pass" : "FAIL") + " [" + c5.detail + "]"};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "null/rest invariance", 5.0, [] { return null_rest(false); }},
        {2, "energy balance", 60.0, [] { return energy_balance(false); }},
        {3, "P-wave speed", 60.0, wave_speed},
        {4, "discrete identities", 60.0, identities},
        {5, "gradient fidelity", 120.0, [] { return gradient_fidelity(false); }},
        {6, "stationarity", 300.0, stationarity},
        {7, "MMS convergence", 300.0, mms},
        {8, "Lipschitz probe", 120.0, lipschitz},
        {9, "quasi-incompressible toggle", 420.0, quasi_incompressible},
    };
    int failed = 0;
    for (const Criterion& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.budget_s;
        const bool pass = o.pass && in_time;
        failed += pass ? 0 : 1;
        std::printf("criterion %d (%s): %s | %s | %.2f s (budget %.0f s)\n", c.id, c.name, pass ? "PASS" : "FAIL",
                    o.detail.c_str(), secs, c.budget_s);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
