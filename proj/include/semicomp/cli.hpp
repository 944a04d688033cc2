#pragma once

/// @file cli.hpp
/// @brief Run orchestration behind the command-line front end: builds the
/// problem from a RunConfig, runs one subcommand, writes its artifacts.
///
/// Exit codes: 0 ok, 1 usage, 2 configuration, 3 solver failure,
/// 4 acceptance threshold missed.

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "semicomp/config.hpp"
#include "semicomp/control.hpp"
#include "semicomp/io.hpp"
#include "semicomp/verify.hpp"

namespace semicomp {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitConfig = 2, kExitSolver = 3, kExitThreshold = 4 };

// ---------------------------------------------------------------------------
// Problem construction
// ---------------------------------------------------------------------------

inline ScalarField load_field(const std::string& path, const GridSpec& g) {
    FieldFile f;
    try {
        f = read_field_csv(path);
    } catch (const FormatError& e) {
        throw ConfigError({e.what()});
    }
    if (!(f.field.grid() == g)) throw ConfigError({path + ": grid does not match the configured grid"});
    return f.field;
}

/// Smooth vortical force used by the control and target generators.
inline VectorField vortex_field(const GridSpec& g, double amplitude) {
    const double pi = std::numbers::pi;
    VectorField u(g);
    for (int j = 1; j <= g.ny; ++j)
        for (int i = 1; i <= g.nx; ++i) {
            const double x = g.xc(i) / g.lx, y = g.yc(j) / g.ly;
            u.x(i, j) = amplitude * std::sin(pi * x) * std::cos(pi * y);
            u.y(i, j) = amplitude * (-std::cos(pi * x) * std::sin(pi * y) + 0.5 * std::sin(2 * pi * x) * std::sin(pi * y));
        }
    return u;
}

inline std::pair<VectorField, ScalarField> initial_state(const RunConfig& c) {
    const GridSpec& g = c.grid;
    const InitialSpec& s = c.initial;
    if (s.kind == "files")
        return {VectorField(load_field(s.velocity_x, g), load_field(s.velocity_y, g)), load_field(s.pressure_file, g)};
    VectorField v(g);
    ScalarField p(g, 0.0);
    const double pi = std::numbers::pi;
    const double cx = s.center.empty() ? 0.5 * g.lx : s.center[0];
    const double cy = s.center.empty() ? 0.5 * g.ly : s.center[1];
    for (int j = 1; j <= g.ny; ++j)
        for (int i = 1; i <= g.nx; ++i) {
            const double x = g.xc(i), y = g.yc(j);
            p(i, j) = s.pressure;
            if (s.kind == "taylor_green") {
                v.x(i, j) = s.amplitude * std::sin(pi * x / g.lx) * std::cos(pi * y / g.ly);
                v.y(i, j) = -s.amplitude * std::cos(pi * x / g.lx) * std::sin(pi * y / g.ly);
            } else if (s.kind == "pulse") {
                const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                p(i, j) += s.amplitude * std::exp(-r2 / (s.width * s.width));
            }
        }
    return {std::move(v), std::move(p)};
}

inline Control initial_control(const RunConfig& c) {
    const int n = c.time.n_steps;
    if (c.control.init == "generator") return Control::constant(c.grid, n, vortex_field(c.grid, c.control.amplitude));
    if (c.control.init == "file")
        return Control::constant(c.grid, n, VectorField(load_field(c.control.file_x, c.grid), load_field(c.control.file_y, c.grid)));
    return Control(c.grid, n);
}

inline ControlProblem build_problem(const RunConfig& c) {
    ControlProblem pb = ControlProblem::at_rest(c.grid, c.phys, c.time);
    std::tie(pb.v0, pb.p0) = initial_state(c);
    pb.weights = c.weights;
    if (c.targets.kind == "recoverable") {
        const Control ustar = Control::constant(c.grid, c.time.n_steps, vortex_field(c.grid, c.targets.amplitude));
        pb.targets = Targets::from_trajectory(forward_solve(pb.v0, pb.p0, ustar, c.phys, c.time));
    } else if (c.targets.kind == "files") {
        const Layout lay{c.grid};
        const Vec x = lay.pack_state(VectorField(load_field(c.targets.velocity_x, c.grid), load_field(c.targets.velocity_y, c.grid)),
                                     load_field(c.targets.pressure, c.grid));
        pb.targets.bulk = {x};
        pb.targets.boundary = {trace_state(c.grid, c.phys, x)};
        pb.targets.terminal = x;
    }
    return pb;
}

// ---------------------------------------------------------------------------
// Artifact writers
// ---------------------------------------------------------------------------

struct RunContext {
    RunConfig config;
    std::filesystem::path out;
    std::uint64_t seed = 1;
    std::ostream* log = nullptr;

    void say(const std::string& s) const {
        if (log != nullptr) *log << s << '\n';
    }
    [[nodiscard]] std::string path(const std::string& name) const { return (out / name).string(); }
};

inline nlohmann::json report_header(const RunContext& ctx, const std::string& sub) {
    return {{"subcommand", sub}, {"seed", ctx.seed}, {"config", to_json(ctx.config)}};
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot open " + path + " for writing");
    os << j.dump(2) << '\n';
}

inline std::vector<int> snapshot_levels(const RunConfig& c) {
    std::vector<int> ks;
    const int stride = c.snapshot_stride();
    for (int k = 0; k <= c.time.n_steps; k += stride) ks.push_back(k);
    if (ks.back() != c.time.n_steps) ks.push_back(c.time.n_steps);
    return ks;
}

inline std::string level_tag(int k) {
    std::string s = std::to_string(k);
    return std::string(s.size() < 6 ? 6 - s.size() : 0, '0') + s;
}

inline nlohmann::json write_state_snapshots(const RunContext& ctx, const Trajectory& tr) {
    nlohmann::json files = nlohmann::json::array();
    for (int k : snapshot_levels(ctx.config)) {
        const VectorField v = tr.velocity(k);
        const ScalarField p = tr.pressure(k);
        const double t = tr.time.t(k);
        const std::string tag = level_tag(k);
        for (const auto& [name, f] : {std::pair<std::string, const ScalarField*>{"vx", &v.x}, {"vy", &v.y}, {"p", &p}}) {
            const std::string file = "state_" + name + "_" + tag + ".csv";
            write_field_csv(ctx.path(file), FieldFile{name, t, *f});
            files.push_back(file);
        }
        if (ctx.config.vtk) {
            const std::string file = "state_" + tag + ".vtk";
            write_vtk(ctx.path(file), "state at t = " + format_double(t), v, p);
            files.push_back(file);
        }
    }
    return files;
}

inline void write_energy_csv(const std::string& path, const EnergyReport& r) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot open " + path + " for writing");
    os << "time,kinetic,elastic,bulk_dissipation,boundary_dissipation,control_power,pressure_exchange,residual,"
          "residual_with_exchange\n";
    for (std::size_t k = 0; k < r.time.size(); ++k)
        os << format_double(r.time[k]) << ',' << format_double(r.kinetic[k]) << ',' << format_double(r.elastic[k]) << ','
           << format_double(r.bulk_dissipation[k]) << ',' << format_double(r.boundary_dissipation[k]) << ','
           << format_double(r.control_power[k]) << ',' << format_double(r.pressure_exchange[k]) << ','
           << format_double(r.residual[k]) << ',' << format_double(r.residual_with_exchange[k]) << '\n';
}

inline nlohmann::json energy_summary(const EnergyReport& r, double dt) {
    return {{"initial_energy", r.initial_energy()},
            {"final_energy", r.kinetic.back() + r.elastic.back()},
            {"max_normalized_residual", r.max_normalized_residual()},
            {"dt", dt}};
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

inline int run_simulate(const RunContext& ctx, bool audit_only) {
    const RunConfig& c = ctx.config;
    const auto [v0, p0] = initial_state(c);
    const Control u = initial_control(c);
    const Trajectory tr = forward_solve(v0, p0, u, c.phys, c.time);
    for (const auto& w : tr.warnings) ctx.say("warning: " + w);
    const EnergyReport er = energy_audit(tr, u);
    write_energy_csv(ctx.path("energy.csv"), er);
    const std::string sub = audit_only ? "energy-audit" : "simulate";
    nlohmann::json rep = report_header(ctx, sub);
    rep["warnings"] = tr.warnings;
    rep["energy"] = energy_summary(er, c.time.dt());
    bool pass = true;
    if (audit_only) {
        const double bound = c.energy_tolerance_per_dt * c.time.dt();
        pass = er.max_normalized_residual() <= bound;
        rep["threshold"] = bound;
        ctx.say("energy residual " + format_double(er.max_normalized_residual()) + " (bound " + format_double(bound) + ")");
    } else {
        rep["snapshots"] = write_state_snapshots(ctx, tr);
    }
    rep["pass"] = pass;
    write_json(ctx.path(sub + "_report.json"), rep);
    return pass ? kExitOk : kExitThreshold;
}

inline int run_optimize(const RunContext& ctx) {
    const RunConfig& c = ctx.config;
    const ReducedCost rc(build_problem(c));
    const OptimizeResult res = optimize(rc, initial_control(c), c.optimizer);
    const OptimizeReport& r = res.report;
    nlohmann::json iters = nlohmann::json::array();
    for (const auto& it : r.iterations) {
        nlohmann::json trials = nlohmann::json::array();
        for (const auto& t : it.trials) trials.push_back({{"step", t.step}, {"J", t.J}, {"accepted", t.accepted}});
        iters.push_back({{"iteration", it.iteration}, {"J", it.J}, {"grad_norm", it.grad_norm}, {"step", it.step},
                         {"slope", it.slope}, {"trials", trials}});
    }
    const bool reduced = r.J_initial == 0.0 || r.J_final <= c.target_reduction * r.J_initial;
    const bool pass = reduced && r.monotone();
    nlohmann::json rep = report_header(ctx, "optimize");
    rep["J_initial"] = r.J_initial;
    rep["J_final"] = r.J_final;
    rep["grad_norm_initial"] = r.grad_norm_initial;
    rep["grad_norm_final"] = r.grad_norm_final;
    rep["chi_norm"] = r.chi_norm;
    rep["optimality_residual"] = r.optimality_residual;
    rep["converged"] = r.converged;
    rep["line_search_failed"] = r.line_search_failed;
    rep["message"] = r.message;
    rep["monotone"] = r.monotone();
    rep["iterations"] = iters;
    nlohmann::json files = nlohmann::json::array();
    for (int k : snapshot_levels(c)) {
        if (k >= c.time.n_steps) continue;
        const VectorField uk = res.control.at(k);
        const std::string tag = level_tag(k);
        write_field_csv(ctx.path("control_ux_" + tag + ".csv"), FieldFile{"ux", c.time.t(k), uk.x});
        write_field_csv(ctx.path("control_uy_" + tag + ".csv"), FieldFile{"uy", c.time.t(k), uk.y});
        files.push_back("control_ux_" + tag + ".csv");
        files.push_back("control_uy_" + tag + ".csv");
    }
    rep["control_files"] = files;
    rep["pass"] = pass;
    write_json(ctx.path("optimize_report.json"), rep);
    ctx.say("J " + format_double(r.J_initial) + " -> " + format_double(r.J_final) + " in " +
            std::to_string(r.accepted_steps()) + " steps; " + r.message);
    return pass ? kExitOk : kExitThreshold;
}

inline int run_gradcheck(const RunContext& ctx) {
    const RunConfig& c = ctx.config;
    const ReducedCost rc(build_problem(c));
    const Control u = initial_control(c);
    const GradCheckReport gr = fd_gradient_oracle(rc, u, c.gradcheck.n_directions, ctx.seed);
    const std::vector<double> cons = adjoint_consistency(rc.stepper(), rc.solve_state(u), ctx.seed + 1);
    double worst_cons = 0.0;
    for (double x : cons) worst_cons = std::max(worst_cons, x);
    nlohmann::json dirs = nlohmann::json::array();
    for (const auto& d : gr.directions)
        dirs.push_back({{"analytic", d.analytic}, {"eps", d.eps}, {"fd", d.fd}, {"rel_error", d.rel_error},
                        {"min_error", d.min_error}});
    const bool pass = gr.worst() <= c.gradcheck.threshold && worst_cons <= c.gradcheck.consistency_threshold;
    nlohmann::json rep = report_header(ctx, "gradcheck");
    rep["J"] = gr.J;
    rep["directions"] = dirs;
    rep["worst_min_error"] = gr.worst();
    rep["adjoint_consistency"] = cons;
    rep["worst_adjoint_consistency"] = worst_cons;
    rep["pass"] = pass;
    write_json(ctx.path("gradcheck_report.json"), rep);
    ctx.say("gradient check worst error " + format_double(gr.worst()) + ", transpose identity " + format_double(worst_cons));
    return pass ? kExitOk : kExitThreshold;
}

inline int run_mms_subcommand(const RunContext& ctx) {
    const RunConfig& c = ctx.config;
    const std::string& name = c.mms.case_name;
    MmsCase mc;
    std::vector<MmsLevel> ladder = c.mms.ladder;
    double min_slope = c.mms.min_slope;
    if (name == "temporal") {
        mc = mms_temporal_case(c.phys, c.grid.lx);
        if (ladder.empty()) ladder = {{8, 10}, {8, 20}, {8, 40}, {8, 80}};
        if (min_slope == 0.0) min_slope = 0.9;
    } else if (name == "space_time") {
        mc = mms_space_time_case(c.phys, c.grid.lx);
        if (ladder.empty()) ladder = {{8, 4}, {16, 16}, {32, 64}};
        if (min_slope == 0.0) min_slope = 1.9;
    } else {
        mc = mms_steady_case(c.phys, c.grid.lx);
        if (ladder.empty()) ladder = {{16, 10}, {32, 10}, {64, 10}};
        if (min_slope == 0.0) min_slope = 1.9;
    }
    const MmsResult r = run_mms(mc, ladder);
    {
        std::ofstream os(ctx.path("mms.csv"));
        if (!os) throw FormatError("cannot open mms.csv for writing");
        os << "n,n_steps,h,dt,err_v,err_p\n";
        for (std::size_t i = 0; i < r.h.size(); ++i)
            os << r.levels[i].n << ',' << r.levels[i].n_steps << ',' << format_double(r.h[i]) << ','
               << format_double(r.dt[i]) << ',' << format_double(r.err_v[i]) << ',' << format_double(r.err_p[i]) << '\n';
    }
    bool pass = false;
    nlohmann::json slopes;
    if (name == "temporal") {
        pass = r.slope_p_dt >= min_slope;
        slopes = {{"p_dt", r.slope_p_dt}};
    } else {
        pass = r.slope_v_h >= min_slope && r.slope_p_h >= min_slope;
        slopes = {{"v_h", r.slope_v_h}, {"p_h", r.slope_p_h}};
    }
    nlohmann::json rep = report_header(ctx, "mms");
    rep["case"] = name;
    rep["h"] = r.h;
    rep["dt"] = r.dt;
    rep["err_v"] = r.err_v;
    rep["err_p"] = r.err_p;
    rep["slopes"] = slopes;
    rep["min_slope"] = min_slope;
    rep["pass"] = pass;
    write_json(ctx.path("mms_report.json"), rep);
    ctx.say("mms " + name + " slopes " + slopes.dump());
    return pass ? kExitOk : kExitThreshold;
}

inline int run_lipschitz(const RunContext& ctx) {
    const RunConfig& c = ctx.config;
    const auto [v0, p0] = initial_state(c);
    const Control u = initial_control(c);
    const SemiImplicitStepper st(c.grid, c.phys, c.time.dt());
    std::mt19937_64 rng(ctx.seed);
    const Control du = random_direction(c.grid, c.time.n_steps, c.time.dt(), rng);
    const LipschitzReport r = lipschitz_probe(st, v0, p0, u, du, c.lipschitz_epsilons);
    {
        std::ofstream os(ctx.path("lipschitz.csv"));
        if (!os) throw FormatError("cannot open lipschitz.csv for writing");
        os << "eps,ratio\n";
        for (std::size_t i = 0; i < r.eps.size(); ++i) os << format_double(r.eps[i]) << ',' << format_double(r.ratios[i]) << '\n';
    }
    const bool pass = r.variation_factor() < c.lipschitz_max_variation;
    nlohmann::json rep = report_header(ctx, "lipschitz");
    rep["eps"] = r.eps;
    rep["ratios"] = r.ratios;
    rep["variation_factor"] = r.variation_factor();
    rep["pass"] = pass;
    write_json(ctx.path("lipschitz_report.json"), rep);
    ctx.say("lipschitz variation factor " + format_double(r.variation_factor()));
    return pass ? kExitOk : kExitThreshold;
}

/// Runs one subcommand. Config errors surface as ConfigError, solver
/// failures as SolverError; run_cli maps them to exit codes.
inline int run_subcommand(const std::string& name, const RunContext& ctx) {
    std::filesystem::create_directories(ctx.out);
    if (name == "simulate") return run_simulate(ctx, false);
    if (name == "energy-audit") return run_simulate(ctx, true);
    if (name == "optimize") return run_optimize(ctx);
    if (name == "gradcheck") return run_gradcheck(ctx);
    if (name == "mms") return run_mms_subcommand(ctx);
    if (name == "lipschitz") return run_lipschitz(ctx);
    throw std::invalid_argument("unknown subcommand '" + name + "'");
}

/// Loads the config file and runs the subcommand, mapping failures to exit codes.
inline int run_cli(const std::string& sub, const std::string& config_path, const std::string& out_dir,
                   std::uint64_t seed, std::ostream& log, std::ostream& err) {
    RunContext ctx;
    ctx.seed = seed;
    ctx.log = &log;
    try {
        std::ifstream is(config_path);
        if (!is) throw ConfigError({"cannot open config file " + config_path});
        const std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
        ctx.config = parse_config(text, sub);
        ctx.out = out_dir.empty() ? std::filesystem::path(ctx.config.output_dir) : std::filesystem::path(out_dir);
        return run_subcommand(sub, ctx);
    } catch (const ConfigError& e) {
        err << e.what() << '\n';
        return kExitConfig;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const SolverError& e) {
        err << "solver failure at " << e.what() << '\n';
        return kExitSolver;
    }
}

}  // namespace semicomp
