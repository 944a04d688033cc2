#pragma once

/// @file cost.hpp
/// @brief Quadratic tracking cost: weights, targets, wall-trace maps and the
/// discrete cost
///
///   J = sum_{k=1..n} dt [ int kappa1/2 |v_k - v_d|^2 + kappa2/2 |p_k - p_d|^2
///                        + int_walls varkappa1/2 |v_k - v_d1|^2 + varkappa2/2 |p_k - p_d1|^2 ]
///     + sum_{k=0..n-1} dt int kappa3/2 |u_k|^2
///     + int lambda1/2 |v_n - v_dT|^2 + lambda2/2 |p_n - p_dT|^2
///
/// Tracking uses the implicit levels 1..n, the control the step it drives.

#include <stdexcept>
#include <string>
#include <vector>

#include "semicomp/forward.hpp"

namespace semicomp {

struct CostWeights {
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    double kappa3 = 1.0;
    double varkappa1 = 0.0;
    double varkappa2 = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;

    [[nodiscard]] std::vector<std::string> violations() const {
        std::vector<std::string> out;
        auto nonneg = [&](double v, const char* name) {
            if (!(v >= 0.0)) out.push_back(std::string("cost.weights.") + name + " must be >= 0");
        };
        nonneg(kappa1, "kappa1");
        nonneg(kappa2, "kappa2");
        nonneg(varkappa1, "varkappa1");
        nonneg(varkappa2, "varkappa2");
        nonneg(lambda1, "lambda1");
        nonneg(lambda2, "lambda2");
        if (!(kappa3 > 0.0)) out.emplace_back("cost.weights.kappa3 must be > 0 (control cost must be coercive)");
        return out;
    }

    [[nodiscard]] CostWeights scaled(double s) const {
        return {s * kappa1, s * kappa2, s * kappa3, s * varkappa1, s * varkappa2, s * lambda1, s * lambda2};
    }
};

// ---------------------------------------------------------------------------
// Wall traces of a packed state: [vx | vy | p] on the boundary faces.
// trace = (ghost + interior)/2 = c * interior with c from the ghost rule.
// ---------------------------------------------------------------------------

namespace detail {

/// Calls f(face, block, cell_index, coefficient) for every non-zero trace entry.
template <class F>
void for_each_trace_entry(const GridSpec& g, const PhysParams& prm, F&& f) {
    const Layout lay{g};
    const BoundaryTrace t(g);
    const int nb = g.boundary_faces();
    const double cx = 0.5 * (1.0 + robin_factor(prm.nu, prm.b, g.dx()));
    const double cy = 0.5 * (1.0 + robin_factor(prm.nu, prm.b, g.dy()));
    for (int i = 1; i <= g.nx; ++i) {
        // vx tangential on bottom/top, vy normal (trace 0), p even.
        f(0 * nb + static_cast<int>(t.bottom(i)), lay.index(0, i, 1), cy);
        f(0 * nb + static_cast<int>(t.top(i)), lay.index(0, i, g.ny), cy);
        f(2 * nb + static_cast<int>(t.bottom(i)), lay.index(2, i, 1), 1.0);
        f(2 * nb + static_cast<int>(t.top(i)), lay.index(2, i, g.ny), 1.0);
    }
    for (int j = 1; j <= g.ny; ++j) {
        f(1 * nb + static_cast<int>(t.left(j)), lay.index(1, 1, j), cx);
        f(1 * nb + static_cast<int>(t.right(j)), lay.index(1, g.nx, j), cx);
        f(2 * nb + static_cast<int>(t.left(j)), lay.index(2, 1, j), 1.0);
        f(2 * nb + static_cast<int>(t.right(j)), lay.index(2, g.nx, j), 1.0);
    }
}

}  // namespace detail

/// Packed wall traces [vx | vy | p], each of length boundary_faces().
inline Vec trace_state(const GridSpec& g, const PhysParams& prm, Eigen::Ref<const Vec> x) {
    Vec out = Vec::Zero(3 * g.boundary_faces());
    detail::for_each_trace_entry(g, prm, [&](int face, int cell, double c) { out[face] += c * x[cell]; });
    return out;
}

inline Vec trace_state_transpose(const GridSpec& g, const PhysParams& prm, Eigen::Ref<const Vec> w) {
    Vec out = Vec::Zero(3 * g.cells());
    detail::for_each_trace_entry(g, prm, [&](int face, int cell, double c) { out[cell] += c * w[face]; });
    return out;
}

/// Face lengths matching the packed trace layout.
inline Vec trace_lengths(const GridSpec& g) {
    const BoundaryTrace t(g);
    const int nb = g.boundary_faces();
    Vec out(3 * nb);
    for (int blk = 0; blk < 3; ++blk)
        for (int k = 0; k < nb; ++k) out[blk * nb + k] = t.face_length(static_cast<std::size_t>(k));
    return out;
}

/// Tracking data. `bulk` and `boundary` hold one packed entry per time level
/// 0..n_steps, or a single entry used at every level.
struct Targets {
    std::vector<Vec> bulk;      ///< packed [v_d | p_d]
    std::vector<Vec> boundary;  ///< packed traces [v_d1 | p_d1]
    Vec terminal;               ///< packed [v_dT | p_dT]

    [[nodiscard]] const Vec& bulk_at(int k) const { return bulk.size() == 1 ? bulk.front() : bulk.at(static_cast<std::size_t>(k)); }
    [[nodiscard]] const Vec& boundary_at(int k) const {
        return boundary.size() == 1 ? boundary.front() : boundary.at(static_cast<std::size_t>(k));
    }

    static Targets zero(const GridSpec& g) {
        return {{Vec::Zero(3 * g.cells())}, {Vec::Zero(3 * g.boundary_faces())}, Vec::Zero(3 * g.cells())};
    }

    /// Targets reproduced exactly by the given trajectory.
    static Targets from_trajectory(const Trajectory& traj) {
        Targets t;
        t.bulk = traj.states;
        for (const Vec& x : traj.states) t.boundary.push_back(trace_state(traj.grid, traj.params, x));
        t.terminal = traj.states.back();
        return t;
    }

    void validate(const GridSpec& g, int n_steps) const {
        auto ok_count = [&](std::size_t s) { return s == 1 || s == static_cast<std::size_t>(n_steps + 1); };
        if (!ok_count(bulk.size()) || !ok_count(boundary.size()))
            throw std::invalid_argument("targets: need 1 or n_steps+1 levels");
        for (const Vec& v : bulk)
            if (v.size() != 3 * g.cells() || !v.allFinite()) throw std::invalid_argument("targets: bad bulk entry");
        for (const Vec& v : boundary)
            if (v.size() != 3 * g.boundary_faces() || !v.allFinite())
                throw std::invalid_argument("targets: bad boundary entry");
        if (terminal.size() != 3 * g.cells() || !terminal.allFinite())
            throw std::invalid_argument("targets: bad terminal entry");
    }
};

namespace detail {

inline Vec block_weights(int n, double wv, double wp) {
    Vec w(3 * n);
    w.head(2 * n).setConstant(wv);
    w.tail(n).setConstant(wp);
    return w;
}

}  // namespace detail

/// Tracking part of the cost at one level (without the dt factor), and its
/// gradient with respect to the packed state at that level.
struct LevelCost {
    double value = 0.0;
    Vec gradient;
};

inline LevelCost level_tracking(const GridSpec& g, const PhysParams& prm, const CostWeights& w, const Targets& tg,
                                int k, Eigen::Ref<const Vec> x) {
    const int n = g.cells();
    const double da = g.cell_area();
    LevelCost out;
    const Vec wb = detail::block_weights(n, w.kappa1, w.kappa2);
    const Vec rb = x - tg.bulk_at(k);
    out.value = 0.5 * da * rb.cwiseProduct(wb).dot(rb);
    out.gradient = da * rb.cwiseProduct(wb);
    if (w.varkappa1 != 0.0 || w.varkappa2 != 0.0) {
        const int nb = g.boundary_faces();
        const Vec ws = detail::block_weights(nb, w.varkappa1, w.varkappa2).cwiseProduct(trace_lengths(g));
        const Vec rs = trace_state(g, prm, x) - tg.boundary_at(k);
        out.value += 0.5 * rs.cwiseProduct(ws).dot(rs);
        out.gradient += trace_state_transpose(g, prm, rs.cwiseProduct(ws));
    }
    return out;
}

inline LevelCost terminal_tracking(const GridSpec& g, const CostWeights& w, const Targets& tg, Eigen::Ref<const Vec> x) {
    const Vec wt = detail::block_weights(g.cells(), w.lambda1, w.lambda2);
    const Vec r = x - tg.terminal;
    LevelCost out;
    out.value = 0.5 * g.cell_area() * r.cwiseProduct(wt).dot(r);
    out.gradient = g.cell_area() * r.cwiseProduct(wt);
    return out;
}

/// Breakdown of the discrete cost into its three integral groups.
struct CostBreakdown {
    double bulk_tracking = 0.0;
    double control_energy = 0.0;
    double boundary_tracking = 0.0;
    double terminal = 0.0;

    [[nodiscard]] double total() const { return bulk_tracking + control_energy + boundary_tracking + terminal; }
};

inline CostBreakdown cost_breakdown(const Trajectory& traj, const Control& control, const CostWeights& w,
                                    const Targets& tg) {
    const GridSpec& g = traj.grid;
    const int n = traj.time.n_steps;
    const double dt = traj.time.dt();
    if (control.n_steps != n || static_cast<int>(traj.states.size()) != n + 1)
        throw std::invalid_argument("cost_evaluate: trajectory and control do not match");
    CostBreakdown c;
    const int nc = g.cells();
    const double da = g.cell_area();
    for (int k = 1; k <= n; ++k) {
        const Vec& x = traj.states[static_cast<std::size_t>(k)];
        const Vec rb = x - tg.bulk_at(k);
        c.bulk_tracking += dt * 0.5 * da *
                           (w.kappa1 * rb.head(2 * nc).squaredNorm() + w.kappa2 * rb.tail(nc).squaredNorm());
        if (w.varkappa1 != 0.0 || w.varkappa2 != 0.0) {
            const int nb = g.boundary_faces();
            const Vec rs = trace_state(g, traj.params, x) - tg.boundary_at(k);
            const Vec len = trace_lengths(g);
            const Vec sq = rs.cwiseProduct(rs).cwiseProduct(len);
            c.boundary_tracking += dt * 0.5 * (w.varkappa1 * sq.head(2 * nb).sum() + w.varkappa2 * sq.tail(nb).sum());
        }
    }
    c.control_energy = 0.5 * w.kappa3 * control_dot(control, control, dt);
    const Vec rt = traj.states.back() - tg.terminal;
    c.terminal = 0.5 * da * (w.lambda1 * rt.head(2 * nc).squaredNorm() + w.lambda2 * rt.tail(nc).squaredNorm());
    return c;
}

inline double cost_evaluate(const Trajectory& traj, const Control& control, const CostWeights& w, const Targets& tg) {
    return cost_breakdown(traj, control, w, tg).total();
}

}  // namespace semicomp
