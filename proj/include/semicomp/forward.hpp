#pragma once

/// @file forward.hpp
/// @brief Semi-implicit time stepping of the semi-compressible flow system
///
///   rho v' + rho (v.grad)v - div(nu E(v)) + (rho/2)(div v) v + grad(p + beta/2 p^2) = u
///   beta (p' + v.grad p) + div v = gamma lap p
///
/// with Navier slip walls, and the energy audit of the resulting trajectory.
///
/// One step solves M x_{k+1} = C x_k - N(x_k) + [u_k; s_k] where M holds the
/// linear part (mass, viscosity, pressure coupling, pressure diffusion),
/// C the mass terms and N the four lagged quadratic terms. M does not depend
/// on time and is factored once per (grid, params, dt).

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "semicomp/assembly.hpp"
#include "semicomp/grid.hpp"

namespace semicomp {

/// Thrown when a linear solve misses its tolerance or the state blows up.
class SolverError : public std::runtime_error {
public:
    SolverError(int step, const std::string& what)
        : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}
    [[nodiscard]] int step() const { return step_; }

private:
    int step_;
};

struct PhysParams {
    double rho = 1.0;
    double nu = 1.0e-2;
    double beta = 1.0;   ///< impressibility 1/K
    double gamma = 1.0e-2;
    double b = 0.0;      ///< wall slip coefficient
    /// Drops beta v.grad p and grad(beta/2 p^2), keeps beta p'.
    bool quasi_incompressible = false;

    [[nodiscard]] BoundarySpec boundary() const { return BoundarySpec{b}; }

    /// Returns every violated constraint; empty when valid.
    [[nodiscard]] std::vector<std::string> violations() const {
        std::vector<std::string> out;
        if (!(rho > 0.0)) out.emplace_back("phys.rho must be > 0");
        if (!(nu > 0.0)) out.emplace_back("phys.nu must be > 0");
        if (!(beta >= 0.0)) out.emplace_back("phys.beta must be >= 0 (beta = 1/K)");
        if (!(gamma >= 0.0)) out.emplace_back("phys.gamma must be >= 0");
        if (!(b >= 0.0)) out.emplace_back("phys.b must be >= 0");
        return out;
    }
    void validate() const {
        const auto v = violations();
        if (!v.empty()) throw std::invalid_argument(v.front());
    }
    [[nodiscard]] double wave_speed() const {
        return beta > 0.0 ? std::sqrt(1.0 / (rho * beta)) : std::numeric_limits<double>::infinity();
    }
};

struct TimeSpec {
    double t_final = 1.0;
    int n_steps = 10;

    [[nodiscard]] double dt() const { return t_final / n_steps; }
    [[nodiscard]] double t(int k) const { return k * dt(); }
    void validate() const {
        if (!(t_final > 0.0)) throw std::invalid_argument("time: t_final must be > 0");
        if (n_steps < 1) throw std::invalid_argument("time: n_steps must be >= 1");
    }
};

/// Piecewise-constant-in-time distributed force: entry k acts on step k -> k+1.
struct Control {
    GridSpec grid{};
    int n_steps = 0;
    Vec data;

    Control() = default;
    Control(const GridSpec& g, int steps) : grid(g), n_steps(steps), data(Vec::Zero(2L * g.cells() * steps)) {}

    [[nodiscard]] int block() const { return 2 * grid.cells(); }
    [[nodiscard]] auto segment(int k) { return data.segment(static_cast<Eigen::Index>(k) * block(), block()); }
    [[nodiscard]] auto segment(int k) const { return data.segment(static_cast<Eigen::Index>(k) * block(), block()); }

    [[nodiscard]] VectorField at(int k) const { return Layout{grid}.vector(segment(k), 0); }
    void set(int k, const VectorField& u) { segment(k) = Layout{grid}.pack_vector(u); }

    static Control constant(const GridSpec& g, int steps, const VectorField& u) {
        Control c(g, steps);
        const Vec packed = Layout{g}.pack_vector(u);
        for (int k = 0; k < steps; ++k) c.segment(k) = packed;
        return c;
    }
};

/// L2(I x Omega) inner product of two controls on the same discretization.
inline double control_dot(const Control& a, const Control& b, double dt) {
    return a.data.dot(b.data) * dt * a.grid.cell_area();
}
inline double control_norm(const Control& a, double dt) { return std::sqrt(control_dot(a, a, dt)); }

struct Trajectory {
    GridSpec grid{};
    PhysParams params{};
    TimeSpec time{};
    std::vector<Vec> states;  ///< packed [vx|vy|p], k = 0..n_steps
    std::vector<std::string> warnings;

    [[nodiscard]] VectorField velocity(int k) const {
        VectorField v = Layout{grid}.vector(states.at(static_cast<std::size_t>(k)), 0);
        fill_ghosts_velocity(v, params.boundary(), params.nu);
        return v;
    }
    [[nodiscard]] ScalarField pressure(int k) const {
        ScalarField p = Layout{grid}.scalar(states.at(static_cast<std::size_t>(k)), 2);
        fill_ghosts_neumann(p);
        return p;
    }
};

/// The four lagged quadratic contributions to the left-hand side.
struct ExplicitTerms {
    VectorField convective;          ///< rho (v.grad) v
    VectorField temam;               ///< (rho/2)(div v) v
    VectorField pressure_quadratic;  ///< grad(beta/2 p^2)
    ScalarField pressure_transport;  ///< beta v.grad p
};

/// Ghost-filled velocity and pressure unpacked from a state vector.
struct GhostedState {
    VectorField v;
    ScalarField p;
};

inline GhostedState unpack_state(const GridSpec& g, const PhysParams& prm, Eigen::Ref<const Vec> x) {
    const Layout lay{g};
    GhostedState s{lay.vector(x, 0), lay.scalar(x, 2)};
    fill_ghosts_state(s.v, s.p, prm.boundary(), prm.nu);
    return s;
}

/// Bilinear form B(a, c) with N(x) = B(x, x); the first argument multiplies,
/// the second is differentiated (the pressure-squared term is symmetric).
inline ExplicitTerms explicit_bilinear(const PhysParams& prm, const GhostedState& a, const GhostedState& c) {
    const GridSpec& g = a.p.grid();
    ExplicitTerms t{VectorField(g), VectorField(g), VectorField(g), ScalarField(g)};
    t.convective = prm.rho * convect(a.v, c.v);
    const ScalarField dv = div(a.v);
    for (int j = 1; j <= g.ny; ++j)
        for (int i = 1; i <= g.nx; ++i) {
            t.temam.x(i, j) = 0.5 * prm.rho * dv(i, j) * c.v.x(i, j);
            t.temam.y(i, j) = 0.5 * prm.rho * dv(i, j) * c.v.y(i, j);
        }
    if (!prm.quasi_incompressible) {
        ScalarField pp(g);
        for (int j = 1; j <= g.ny; ++j)
            for (int i = 1; i <= g.nx; ++i) pp(i, j) = 0.5 * prm.beta * a.p(i, j) * c.p(i, j);
        fill_ghosts_neumann(pp);
        t.pressure_quadratic = grad(pp);
        t.pressure_transport = prm.beta * convect(a.v, c.p);
    }
    return t;
}

inline ExplicitTerms explicit_terms(const PhysParams& prm, const GhostedState& s) {
    return explicit_bilinear(prm, s, s);
}

inline Vec pack_terms(const Layout& lay, const ExplicitTerms& t) {
    Vec out(3 * lay.n());
    const VectorField mom = t.convective + t.temam + t.pressure_quadratic;
    lay.gather(mom.x, 0, out);
    lay.gather(mom.y, 1, out);
    lay.gather(t.pressure_transport, 2, out);
    return out;
}

/// Factored step operator for one (grid, params, dt) triple.
class SemiImplicitStepper {
public:
    SemiImplicitStepper(const GridSpec& grid, const PhysParams& params, double dt)
        : grid_(grid), params_(params), dt_(dt), layout_{grid} {
        grid.validate();
        params.validate();
        if (!(dt > 0.0)) throw std::invalid_argument("stepper: dt must be > 0");
        matrix_ = assemble_stencil_map(grid_, 3, 3, [this](const Vec& x) { return implicit_apply(x); });
        system_ = params_.beta == 0.0 ? bordered(matrix_) : matrix_;
        system_t_ = SpMat(system_.transpose());
        system_t_.makeCompressed();
        lu_.compute(system_);
        if (lu_.info() != Eigen::Success) throw SolverError(0, "factorization of the step matrix failed (singular?)");
        lut_.compute(system_t_);
        if (lut_.info() != Eigen::Success) throw SolverError(0, "factorization of the transposed step matrix failed");
    }

    [[nodiscard]] const GridSpec& grid() const { return grid_; }
    [[nodiscard]] const PhysParams& params() const { return params_; }
    [[nodiscard]] double dt() const { return dt_; }
    [[nodiscard]] const Layout& layout() const { return layout_; }
    [[nodiscard]] const SpMat& matrix() const { return matrix_; }

    /// M x via stencils.
    [[nodiscard]] Vec implicit_apply(Eigen::Ref<const Vec> x) const {
        const GhostedState s = unpack_state(grid_, params_, x);
        const VectorField visc = viscous_operator(s.v, params_.nu);
        const VectorField gp = grad(s.p);
        const ScalarField dv = div(s.v);
        const ScalarField lp = laplacian(s.p);
        Vec out(x.size());
        const double mv = params_.rho / dt_;
        const double mp = params_.beta / dt_;
        for (int j = 1; j <= grid_.ny; ++j)
            for (int i = 1; i <= grid_.nx; ++i) {
                out[layout_.index(0, i, j)] = mv * s.v.x(i, j) + visc.x(i, j) + gp.x(i, j);
                out[layout_.index(1, i, j)] = mv * s.v.y(i, j) + visc.y(i, j) + gp.y(i, j);
                out[layout_.index(2, i, j)] = mp * s.p(i, j) + dv(i, j) - params_.gamma * lp(i, j);
            }
        return out;
    }

    /// C x (mass terms of the previous level).
    [[nodiscard]] Vec mass_apply(Eigen::Ref<const Vec> x) const {
        Vec out = x;
        const int n = layout_.n();
        out.head(2 * n) *= params_.rho / dt_;
        out.tail(n) *= params_.beta / dt_;
        return out;
    }

    [[nodiscard]] Vec explicit_apply(Eigen::Ref<const Vec> x) const {
        return pack_terms(layout_, explicit_terms(params_, unpack_state(grid_, params_, x)));
    }

    /// N'(x) a.
    [[nodiscard]] Vec explicit_jvp(Eigen::Ref<const Vec> x, Eigen::Ref<const Vec> a) const {
        const GhostedState sx = unpack_state(grid_, params_, x);
        const GhostedState sa = unpack_state(grid_, params_, a);
        return pack_terms(layout_, explicit_bilinear(params_, sa, sx)) +
               pack_terms(layout_, explicit_bilinear(params_, sx, sa));
    }

    /// N'(x)^T y, by probing the tangent map.
    [[nodiscard]] Vec explicit_jvp_transpose(Eigen::Ref<const Vec> x, Eigen::Ref<const Vec> y) const {
        const GhostedState sx = unpack_state(grid_, params_, x);
        auto tangent = [&](const Vec& a) {
            const GhostedState sa = unpack_state(grid_, params_, a);
            return Vec(pack_terms(layout_, explicit_bilinear(params_, sa, sx)) +
                       pack_terms(layout_, explicit_bilinear(params_, sx, sa)));
        };
        return transpose_apply_stencil_map(grid_, 3, 3, tangent, y);
    }

    /// With beta = 0 the constant pressure is in the kernel of M; the solve
    /// then returns the solution with zero pressure mean (bordered system).
    [[nodiscard]] Vec solve(Eigen::Ref<const Vec> rhs, int step) const { return bordered_solve(lu_, system_, rhs, step); }
    [[nodiscard]] Vec solve_transposed(Eigen::Ref<const Vec> rhs, int step) const {
        return bordered_solve(lut_, system_t_, rhs, step);
    }

    /// x_{k+1} from x_k. `force` is packed [ux|uy]; `pressure_source` is an
    /// optional right-hand side for the pressure equation.
    [[nodiscard]] Vec step(Eigen::Ref<const Vec> x, const Vec* force, const Vec* pressure_source, int step) const {
        Vec rhs = mass_apply(x) - explicit_apply(x);
        const int n = layout_.n();
        if (force != nullptr) rhs.head(2 * n) += *force;
        if (pressure_source != nullptr) rhs.tail(n) += *pressure_source;
        Vec next = solve(rhs, step);
        if (!next.allFinite()) throw SolverError(step, "non-finite state");
        return next;
    }

    /// Tangent of step(): M^{-1}(C - N'(x)) a.
    [[nodiscard]] Vec linearized_step(Eigen::Ref<const Vec> x, Eigen::Ref<const Vec> a, int step = 0) const {
        return solve(mass_apply(a) - explicit_jvp(x, a), step);
    }

    /// Exact transpose of linearized_step: (C - N'(x))^T M^{-T} b.
    [[nodiscard]] Vec linearized_step_transpose(Eigen::Ref<const Vec> x, Eigen::Ref<const Vec> b, int step = 0) const {
        const Vec w = solve_transposed(b, step);
        return mass_apply(w) - explicit_jvp_transpose(x, w);
    }

    static constexpr double kSolveTolerance = 1.0e-10;

private:
    /// [M 1_p; 1_p^T 0]: M bordered by the pressure-mean constraint.
    [[nodiscard]] SpMat bordered(const SpMat& m) const {
        const Eigen::Index n = m.rows();
        const int nc = grid_.cells();
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(static_cast<std::size_t>(m.nonZeros() + 2 * nc));
        for (int c = 0; c < m.outerSize(); ++c)
            for (SpMat::InnerIterator it(m, c); it; ++it) trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
        for (int i = 0; i < nc; ++i) {
            trips.emplace_back(2 * nc + i, static_cast<int>(n), 1.0);
            trips.emplace_back(static_cast<int>(n), 2 * nc + i, 1.0);
        }
        SpMat b(n + 1, n + 1);
        b.setFromTriplets(trips.begin(), trips.end());
        b.makeCompressed();
        return b;
    }

    Vec bordered_solve(const Eigen::SparseLU<SpMat>& lu, const SpMat& m, Eigen::Ref<const Vec> rhs, int step) const {
        if (m.rows() == rhs.size()) return checked_solve(lu, m, rhs, step);
        Vec padded = Vec::Zero(rhs.size() + 1);
        padded.head(rhs.size()) = rhs;
        return checked_solve(lu, m, padded, step).head(rhs.size());
    }

    Vec checked_solve(const Eigen::SparseLU<SpMat>& lu, const SpMat& m, Eigen::Ref<const Vec> rhs, int step) const {
        const double bnorm = rhs.norm();
        if (bnorm == 0.0) return Vec::Zero(rhs.size());
        Vec x = lu.solve(rhs);
        for (int it = 0; it < 4; ++it) {
            const Vec r = rhs - m * x;
            const double rel = r.norm() / bnorm;
            if (rel <= kSolveTolerance) return x;
            if (!std::isfinite(rel)) break;
            x += lu.solve(r);
        }
        const double rel = (rhs - m * x).norm() / bnorm;
        if (rel <= kSolveTolerance) return x;
        std::ostringstream os;
        os << "linear solve relative residual " << rel << " exceeds " << kSolveTolerance;
        throw SolverError(step, os.str());
    }

    GridSpec grid_;
    PhysParams params_;
    double dt_;
    Layout layout_;
    SpMat matrix_;
    SpMat system_;
    SpMat system_t_;
    Eigen::SparseLU<SpMat> lu_;
    Eigen::SparseLU<SpMat> lut_;
};

/// Single step on fields; convenience wrapper over SemiImplicitStepper.
inline std::pair<VectorField, ScalarField> step_state(const VectorField& v, const ScalarField& p, const VectorField& u,
                                                      const PhysParams& params, double dt) {
    const SemiImplicitStepper st(v.grid(), params, dt);
    const Layout& lay = st.layout();
    const Vec force = lay.pack_vector(u);
    const Vec next = st.step(lay.pack_state(v, p), &force, nullptr, 1);
    VectorField vn = lay.vector(next, 0);
    ScalarField pn = lay.scalar(next, 2);
    fill_ghosts_state(vn, pn, params.boundary(), params.nu);
    return {std::move(vn), std::move(pn)};
}

struct ForwardOptions {
    /// Per-step pressure-equation sources (verification only); entry k acts on step k -> k+1.
    const std::vector<Vec>* pressure_source = nullptr;
};

/// Advisory CFL limit 0.5 min(dx,dy) / (|v|_inf + c).
inline double cfl_limit(const GridSpec& g, const PhysParams& prm, double vmax) {
    const double c = prm.wave_speed();
    if (!std::isfinite(c)) return 0.0;
    return 0.5 * std::min(g.dx(), g.dy()) / (vmax + c);
}

inline Trajectory forward_solve(const SemiImplicitStepper& st, const VectorField& v0, const ScalarField& p0,
                                const Control& control, const ForwardOptions& opts = {}) {
    const GridSpec& g = st.grid();
    const PhysParams& prm = st.params();
    if (!(v0.grid() == g) || !(p0.grid() == g) || !(control.grid == g))
        throw std::invalid_argument("forward_solve: grid mismatch");
    if (!v0.x.interior_finite() || !v0.y.interior_finite() || !p0.interior_finite())
        throw std::invalid_argument("forward_solve: initial data must be finite");
    const int n_steps = control.n_steps;
    Trajectory traj;
    traj.grid = g;
    traj.params = prm;
    traj.time = TimeSpec{st.dt() * n_steps, n_steps};
    traj.states.reserve(static_cast<std::size_t>(n_steps + 1));
    traj.states.push_back(st.layout().pack_state(v0, p0));
    if (prm.gamma == 0.0)
        traj.warnings.emplace_back("gamma = 0: pressure diffusion is off, outside the analysed regime gamma > 0");
    bool cfl_warned = false;
    for (int k = 0; k < n_steps; ++k) {
        const Vec force = control.segment(k);
        const Vec* src = nullptr;
        if (opts.pressure_source != nullptr) src = &opts.pressure_source->at(static_cast<std::size_t>(k));
        traj.states.push_back(st.step(traj.states.back(), &force, src, k + 1));
        if (!cfl_warned) {
            const Vec& x = traj.states.back();
            const double vmax = x.head(2 * g.cells()).cwiseAbs().maxCoeff();
            const double lim = cfl_limit(g, prm, vmax);
            if (lim > 0.0 && st.dt() > lim) {
                std::ostringstream os;
                os << "dt = " << st.dt() << " exceeds the advisory CFL bound " << lim << " at step " << k + 1;
                traj.warnings.push_back(os.str());
                cfl_warned = true;
            }
        }
    }
    return traj;
}

inline Trajectory forward_solve(const VectorField& v0, const ScalarField& p0, const Control& control,
                                const PhysParams& params, const TimeSpec& time, const ForwardOptions& opts = {}) {
    time.validate();
    if (control.n_steps != time.n_steps) throw std::invalid_argument("forward_solve: control length != n_steps");
    const SemiImplicitStepper st(v0.grid(), params, time.dt());
    return forward_solve(st, v0, p0, control, opts);
}

// ---------------------------------------------------------------------------
// Energy audit
// ---------------------------------------------------------------------------

/// Terms of the energy balance per time level k = 0..n_steps. Dissipation,
/// control power and exchange entries are cumulative integrals over [0, t_k]
/// (rectangle rule at the implicit level).
struct EnergyReport {
    std::vector<double> time;
    std::vector<double> kinetic;
    std::vector<double> elastic;
    std::vector<double> bulk_dissipation;
    std::vector<double> boundary_dissipation;
    std::vector<double> control_power;
    /// Cumulative beta * int p^2 div v: the cubic exchange left over when
    /// both quadratic pressure terms are active; zero when quasi-incompressible.
    std::vector<double> pressure_exchange;
    /// kinetic + elastic + dissipations - control power - initial energy.
    std::vector<double> residual;
    /// residual with the cubic exchange removed.
    std::vector<double> residual_with_exchange;

    [[nodiscard]] double initial_energy() const { return kinetic.front() + elastic.front(); }

    /// max_k |residual_k| / initial energy (absolute when the initial energy is zero).
    [[nodiscard]] double max_normalized_residual() const {
        double m = 0.0;
        for (double r : residual) m = std::max(m, std::abs(r));
        const double e0 = initial_energy();
        return e0 > 0.0 ? m / e0 : m;
    }
};

inline EnergyReport energy_audit(const Trajectory& traj, const Control& control) {
    const PhysParams& prm = traj.params;
    const int n = traj.time.n_steps;
    const double dt = traj.time.dt();
    if (static_cast<int>(traj.states.size()) != n + 1) throw std::invalid_argument("energy_audit: incomplete trajectory");
    if (control.n_steps != n) throw std::invalid_argument("energy_audit: control length mismatch");
    EnergyReport r;
    double bulk = 0.0;
    double bnd = 0.0;
    double power = 0.0;
    double exch = 0.0;
    for (int k = 0; k <= n; ++k) {
        const VectorField v = traj.velocity(k);
        const ScalarField p = traj.pressure(k);
        if (k > 0) {
            bulk += dt * (viscous_dissipation(v, prm.nu) + gradient_dissipation(p, prm.gamma));
            bnd += dt * slip_dissipation(v, prm.b);
            power += dt * dot_volume(control.at(k - 1), v);
            if (!prm.quasi_incompressible) {
                const ScalarField dv = div(v);
                double s = 0.0;
                for (int j = 1; j <= traj.grid.ny; ++j)
                    for (int i = 1; i <= traj.grid.nx; ++i) s += p(i, j) * p(i, j) * dv(i, j);
                exch += dt * prm.beta * s * traj.grid.cell_area();
            }
        }
        r.time.push_back(k * dt);
        r.kinetic.push_back(0.5 * prm.rho * dot_volume(v, v));
        r.elastic.push_back(0.5 * prm.beta * dot_volume(p, p));
        r.bulk_dissipation.push_back(bulk);
        r.boundary_dissipation.push_back(bnd);
        r.control_power.push_back(power);
        r.pressure_exchange.push_back(exch);
    }
    const double e0 = r.kinetic.front() + r.elastic.front();
    for (int k = 0; k <= n; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        const double lhs = r.kinetic[kk] + r.elastic[kk] + r.bulk_dissipation[kk] + r.boundary_dissipation[kk];
        const double rhs = r.control_power[kk] + e0;
        r.residual.push_back(lhs - rhs);
        r.residual_with_exchange.push_back(lhs - r.pressure_exchange[kk] - rhs);
    }
    return r;
}

}  // namespace semicomp
