#pragma once

/// @file control.hpp
/// @brief Reduced cost J(u) = Phi(u, S(u)), its adjoint gradient, and a
/// line-search descent driver (steepest descent or L-BFGS).

#include <cmath>
#include <deque>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "semicomp/adjoint.hpp"
#include "semicomp/cost.hpp"
#include "semicomp/forward.hpp"

namespace semicomp {

/// Everything except the control: discretization, physics, initial state, cost.
struct ControlProblem {
    GridSpec grid{};
    PhysParams params{};
    TimeSpec time{};
    VectorField v0;
    ScalarField p0;
    CostWeights weights{};
    Targets targets;

    static ControlProblem at_rest(const GridSpec& g, const PhysParams& prm, const TimeSpec& t) {
        return {g, prm, t, VectorField(g), ScalarField(g), CostWeights{}, Targets::zero(g)};
    }
};

struct Evaluation {
    double J = 0.0;
    Control gradient;
    Control chi;
    Trajectory trajectory;
    AdjointTrajectory adjoint;
};

/// Owns the factored step operator so repeated evaluations reuse it.
class ReducedCost {
public:
    explicit ReducedCost(ControlProblem problem)
        : problem_(std::move(problem)),
          stepper_(std::make_shared<SemiImplicitStepper>(problem_.grid, problem_.params, problem_.time.dt())) {
        problem_.time.validate();
        problem_.targets.validate(problem_.grid, problem_.time.n_steps);
        const auto bad = problem_.weights.violations();
        if (!bad.empty()) throw std::invalid_argument(bad.front());
    }

    [[nodiscard]] const ControlProblem& problem() const { return problem_; }
    [[nodiscard]] const SemiImplicitStepper& stepper() const { return *stepper_; }
    [[nodiscard]] double dt() const { return problem_.time.dt(); }
    [[nodiscard]] Control zero_control() const { return Control(problem_.grid, problem_.time.n_steps); }

    [[nodiscard]] Trajectory solve_state(const Control& u) const {
        return forward_solve(*stepper_, problem_.v0, problem_.p0, u);
    }

    [[nodiscard]] double value(const Control& u) const {
        return cost_evaluate(solve_state(u), u, problem_.weights, problem_.targets);
    }

    /// One forward and one backward sweep.
    [[nodiscard]] Evaluation evaluate(const Control& u) const { return complete(u, solve_state(u)); }

    /// Adds cost, multipliers and gradient to an existing forward solve for u.
    [[nodiscard]] Evaluation complete(const Control& u, Trajectory traj) const {
        Evaluation e;
        e.J = cost_evaluate(traj, u, problem_.weights, problem_.targets);
        e.adjoint = adjoint_solve(*stepper_, traj, problem_.weights, problem_.targets);
        e.gradient = reduced_gradient(e.adjoint, u, problem_.weights);
        e.chi = adjoint_velocity(e.adjoint, u);
        e.trajectory = std::move(traj);
        return e;
    }

    /// Same problem with every cost weight multiplied by s.
    [[nodiscard]] ReducedCost scaled(double s) const {
        ReducedCost copy = *this;
        copy.problem_.weights = problem_.weights.scaled(s);
        return copy;
    }

private:
    ControlProblem problem_;
    std::shared_ptr<const SemiImplicitStepper> stepper_;
};

inline std::pair<double, Control> evaluate_J_and_gradient(const ControlProblem& problem, const Control& u) {
    const ReducedCost rc(problem);
    Evaluation e = rc.evaluate(u);
    return {e.J, std::move(e.gradient)};
}

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

enum class DescentMethod { SteepestDescent, LBFGS };

struct OptimizeOptions {
    DescentMethod method = DescentMethod::LBFGS;
    int max_iterations = 100;
    /// Stop when |g| <= grad_tol * max(1, |g0|).
    double grad_tol = 1.0e-6;
    double armijo = 1.0e-4;
    double backtrack = 0.5;
    int max_backtracks = 40;
    int memory = 10;
};

struct LineSearchTrial {
    double step = 0.0;
    double J = 0.0;
    bool accepted = false;
};

struct IterationRecord {
    int iteration = 0;
    double J = 0.0;          ///< cost after the step
    double grad_norm = 0.0;  ///< gradient norm after the step
    double step = 0.0;
    double slope = 0.0;      ///< <g, d> before the step
    std::vector<LineSearchTrial> trials;
};

struct OptimizeReport {
    double J_initial = 0.0;
    double grad_norm_initial = 0.0;
    double J_final = 0.0;
    double grad_norm_final = 0.0;
    /// |kappa3 u - chi| / max(1, |chi|) at the returned iterate.
    double optimality_residual = 0.0;
    double chi_norm = 0.0;
    bool converged = false;
    bool line_search_failed = false;
    std::string message;
    std::vector<IterationRecord> iterations;
    /// Normalized search directions d/|d| per accepted step (kept for audits).
    std::vector<Control> directions;

    [[nodiscard]] int accepted_steps() const { return static_cast<int>(iterations.size()); }
    [[nodiscard]] bool monotone() const {
        double prev = J_initial;
        for (const auto& it : iterations) {
            if (!(it.J < prev)) return false;
            prev = it.J;
        }
        return true;
    }
};

struct OptimizeResult {
    Control control;
    OptimizeReport report;
    Evaluation final_evaluation;
};

namespace detail {

struct LbfgsPair {
    Control s;
    Control y;
    double rho = 0.0;
};

inline Control lbfgs_direction(const std::deque<LbfgsPair>& mem, const Control& g, double dt) {
    Control q = g;
    std::vector<double> alpha(mem.size());
    for (std::size_t i = mem.size(); i-- > 0;) {
        alpha[i] = mem[i].rho * control_dot(mem[i].s, q, dt);
        q.data -= alpha[i] * mem[i].y.data;
    }
    if (!mem.empty()) {
        const auto& last = mem.back();
        q.data *= control_dot(last.s, last.y, dt) / control_dot(last.y, last.y, dt);
    }
    for (std::size_t i = 0; i < mem.size(); ++i) {
        const double beta = mem[i].rho * control_dot(mem[i].y, q, dt);
        q.data += (alpha[i] - beta) * mem[i].s.data;
    }
    q.data = -q.data;
    return q;
}

}  // namespace detail

inline OptimizeResult optimize(const ReducedCost& rc, const Control& u0, const OptimizeOptions& opts) {
    const double dt = rc.dt();
    const double kappa3 = rc.problem().weights.kappa3;
    OptimizeResult res;
    Control u = u0;
    Evaluation cur = rc.evaluate(u);
    OptimizeReport& rep = res.report;
    rep.J_initial = cur.J;
    rep.grad_norm_initial = control_norm(cur.gradient, dt);
    const double stop = opts.grad_tol * std::max(1.0, rep.grad_norm_initial);
    std::deque<detail::LbfgsPair> mem;
    double gnorm = rep.grad_norm_initial;

    for (int it = 0; it < opts.max_iterations && gnorm > stop; ++it) {
        Control d(u.grid, u.n_steps);
        const bool use_memory = opts.method == DescentMethod::LBFGS && !mem.empty();
        if (use_memory) d = detail::lbfgs_direction(mem, cur.gradient, dt);
        else d.data = -cur.gradient.data;
        double slope = control_dot(cur.gradient, d, dt);
        if (!(slope < 0.0)) {
            mem.clear();
            d.data = -cur.gradient.data;
            slope = control_dot(cur.gradient, d, dt);
        }
        double step = use_memory ? 1.0 : 1.0 / kappa3;

        IterationRecord rec;
        rec.iteration = it + 1;
        rec.slope = slope;
        bool accepted = false;
        Control trial_u(u.grid, u.n_steps);
        Trajectory trial_traj;
        double trial_J = 0.0;
        for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
            trial_u.data = u.data + step * d.data;
            // A trial that blows up the forward solve is a rejected trial.
            try {
                trial_traj = rc.solve_state(trial_u);
                trial_J = cost_evaluate(trial_traj, trial_u, rc.problem().weights, rc.problem().targets);
            } catch (const SolverError&) {
                trial_J = std::numeric_limits<double>::infinity();
            }
            const bool ok = std::isfinite(trial_J) && trial_J <= cur.J + opts.armijo * step * slope && trial_J < cur.J;
            rec.trials.push_back({step, trial_J, ok});
            if (ok) {
                accepted = true;
                break;
            }
            step *= opts.backtrack;
        }
        if (!accepted) {
            rep.line_search_failed = true;
            rep.message = "line search found no decrease after " + std::to_string(opts.max_backtracks) +
                          " backtracks at iteration " + std::to_string(it + 1);
            break;
        }
        Evaluation next = rc.complete(trial_u, std::move(trial_traj));
        if (opts.method == DescentMethod::LBFGS) {
            detail::LbfgsPair pr{Control(u.grid, u.n_steps), Control(u.grid, u.n_steps), 0.0};
            pr.s.data = trial_u.data - u.data;
            pr.y.data = next.gradient.data - cur.gradient.data;
            const double sy = control_dot(pr.s, pr.y, dt);
            if (sy > 1e-14 * control_norm(pr.s, dt) * control_norm(pr.y, dt)) {
                pr.rho = 1.0 / sy;
                mem.push_back(std::move(pr));
                if (static_cast<int>(mem.size()) > opts.memory) mem.pop_front();
            }
        }
        Control dn = d;
        dn.data /= control_norm(d, dt);
        rep.directions.push_back(std::move(dn));
        u = trial_u;
        cur = std::move(next);
        gnorm = control_norm(cur.gradient, dt);
        rec.J = cur.J;
        rec.grad_norm = gnorm;
        rec.step = step;
        rep.iterations.push_back(std::move(rec));
    }

    rep.J_final = cur.J;
    rep.grad_norm_final = gnorm;
    rep.converged = gnorm <= stop;
    rep.chi_norm = control_norm(cur.chi, dt);
    rep.optimality_residual = gnorm / std::max(1.0, rep.chi_norm);
    if (rep.message.empty())
        rep.message = rep.converged ? "gradient tolerance reached" : "iteration limit reached";
    res.control = std::move(u);
    res.final_evaluation = std::move(cur);
    return res;
}

}  // namespace semicomp
