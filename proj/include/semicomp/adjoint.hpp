#pragma once

/// @file adjoint.hpp
/// @brief Backward sweep of the discrete adjoint and the reduced gradient.
///
/// The multipliers are the exact transpose of the discrete forward step, not
/// a separate discretization of the continuous adjoint system. With
/// x_{k+1} = M^{-1}(C x_k - N(x_k) + u_k) and level tracking phi_k, the sweep is
///
///   y_{n+1} = 0,
///   y_k = M^{-T} [ (C - N'(x_k))^T y_{k+1} - grad phi_k / (dt |cell|) ],  k = n..1,
///
/// and the L2(I x Omega) gradient is g_k = kappa3 u_k - chi_k with chi_k the
/// velocity block of y_{k+1}. N'(x)^T produces the discrete images of the
/// seven state/multiplier products: rho (grad v)^T chi, -rho div(v (x) chi),
/// (rho/2)(div v) chi, -(rho/2) grad(v.chi), beta Lambda grad p,
/// -beta div(Lambda v) and -beta p div chi; M^T carries -(1) div chi.
///
/// Sign and scale: with this normalization the stationarity relation reads
/// u = chi / kappa3, and a terminal mismatch e gives chi_T = -M^{-T} e / dt,
/// whose continuum limit is -lambda1 (v(T) - v_dT) / rho.

#include <vector>

#include "semicomp/cost.hpp"
#include "semicomp/forward.hpp"

namespace semicomp {

/// multipliers[k] for k = 1..n is the packed (chi, Lambda) multiplying the
/// step that produces level k. multipliers[0] is the initial-state
/// sensitivity in the same scaling: dJ/dx_0 = -dt |cell| multipliers[0].
struct AdjointTrajectory {
    GridSpec grid{};
    std::vector<Vec> multipliers;

    [[nodiscard]] VectorField chi(int k) const { return Layout{grid}.vector(multipliers.at(static_cast<std::size_t>(k)), 0); }
    [[nodiscard]] ScalarField lam(int k) const { return Layout{grid}.scalar(multipliers.at(static_cast<std::size_t>(k)), 2); }
};

/// Source of the backward step at level k: -grad phi_k / (dt |cell|), with the
/// terminal term added at k = n.
inline Vec adjoint_source(const SemiImplicitStepper& st, const Trajectory& traj, const CostWeights& w,
                          const Targets& tg, int k) {
    const GridSpec& g = traj.grid;
    const double dt = st.dt();
    const double scale = 1.0 / (dt * g.cell_area());
    const Vec& x = traj.states.at(static_cast<std::size_t>(k));
    Vec grad_phi = dt * level_tracking(g, traj.params, w, tg, k, x).gradient;
    if (k == traj.time.n_steps) grad_phi += terminal_tracking(g, w, tg, x).gradient;
    return -scale * grad_phi;
}

/// Terminal multipliers y_n = M^{-T} source_n.
inline Vec terminal_conditions(const SemiImplicitStepper& st, const Trajectory& traj, const CostWeights& w,
                               const Targets& tg) {
    const int n = traj.time.n_steps;
    return st.solve_transposed(adjoint_source(st, traj, w, tg, n), n);
}

/// One backward step: y_k from y_{k+1} and the forward state x_k.
inline Vec step_adjoint(const SemiImplicitStepper& st, const Trajectory& traj, const CostWeights& w,
                        const Targets& tg, int k, Eigen::Ref<const Vec> y_next) {
    const Vec& xk = traj.states.at(static_cast<std::size_t>(k));
    const Vec carried = st.mass_apply(y_next) - st.explicit_jvp_transpose(xk, y_next);
    return st.solve_transposed(carried + adjoint_source(st, traj, w, tg, k), k);
}

inline AdjointTrajectory adjoint_solve(const SemiImplicitStepper& st, const Trajectory& traj, const CostWeights& w,
                                       const Targets& tg) {
    const int n = traj.time.n_steps;
    if (static_cast<int>(traj.states.size()) != n + 1) throw std::invalid_argument("adjoint_solve: incomplete trajectory");
    tg.validate(traj.grid, n);
    AdjointTrajectory adj;
    adj.grid = traj.grid;
    adj.multipliers.assign(static_cast<std::size_t>(n + 1), Vec());
    adj.multipliers[static_cast<std::size_t>(n)] = terminal_conditions(st, traj, w, tg);
    for (int k = n - 1; k >= 1; --k)
        adj.multipliers[static_cast<std::size_t>(k)] = step_adjoint(st, traj, w, tg, k, adj.multipliers[static_cast<std::size_t>(k + 1)]);
    const Vec& y1 = adj.multipliers[1];
    adj.multipliers[0] = st.mass_apply(y1) - st.explicit_jvp_transpose(traj.states.front(), y1);
    return adj;
}

/// g_k = kappa3 u_k - chi_k, chi_k = velocity block of multipliers[k+1].
inline Control reduced_gradient(const AdjointTrajectory& adj, const Control& control, const CostWeights& w) {
    Control g(control.grid, control.n_steps);
    const int nv = control.block();
    for (int k = 0; k < control.n_steps; ++k)
        g.segment(k) = w.kappa3 * control.segment(k) - adj.multipliers.at(static_cast<std::size_t>(k + 1)).head(nv);
    return g;
}

/// chi as a control-shaped series (chi_k for k = 0..n-1).
inline Control adjoint_velocity(const AdjointTrajectory& adj, const Control& like) {
    Control c(like.grid, like.n_steps);
    for (int k = 0; k < like.n_steps; ++k)
        c.segment(k) = adj.multipliers.at(static_cast<std::size_t>(k + 1)).head(c.block());
    return c;
}

}  // namespace semicomp
