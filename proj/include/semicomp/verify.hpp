#pragma once

/// @file verify.hpp
/// @brief Independent oracles: finite-difference gradient checks, adjoint
/// consistency, manufactured solutions, calculus identities and the
/// perturbation-response (Lipschitz) probe.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "semicomp/control.hpp"

namespace semicomp {

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("loglog_slope: need >= 2 matching points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

/// Unit-norm (in the control inner product) Gaussian direction.
inline Control random_direction(const GridSpec& g, int n_steps, double dt, std::mt19937_64& rng) {
    std::normal_distribution<double> N(0.0, 1.0);
    Control d(g, n_steps);
    for (Eigen::Index i = 0; i < d.data.size(); ++i) d.data[i] = N(rng);
    d.data /= control_norm(d, dt);
    return d;
}

// ---------------------------------------------------------------------------
// Gradient checks
// ---------------------------------------------------------------------------

struct DirectionCheck {
    double analytic = 0.0;  ///< <g, delta>
    std::vector<double> eps;
    std::vector<double> fd;
    std::vector<double> rel_error;
    double min_error = 0.0;
};

struct GradCheckReport {
    double J = 0.0;
    std::uint64_t seed = 0;
    std::vector<DirectionCheck> directions;

    [[nodiscard]] double worst() const {
        double w = 0.0;
        for (const auto& d : directions) w = std::max(w, d.min_error);
        return w;
    }
};

/// |a - b| / max(|a|, |b|); 0 when both vanish.
inline double relative_gap(double a, double b) {
    const double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

inline GradCheckReport fd_gradient_oracle(const ReducedCost& rc, const Control& u, int n_directions, std::uint64_t seed,
                                          const std::vector<double>& eps_sweep = {1e-3, 1e-4, 1e-5, 1e-6, 1e-7}) {
    if (n_directions < 1) throw std::invalid_argument("fd_gradient_oracle: n_directions must be >= 1");
    const double dt = rc.dt();
    const Evaluation e = rc.evaluate(u);
    GradCheckReport rep;
    rep.J = e.J;
    rep.seed = seed;
    std::mt19937_64 rng(seed);
    const double scale = std::max(1.0, control_norm(u, dt));
    for (int k = 0; k < n_directions; ++k) {
        const Control d = random_direction(u.grid, u.n_steps, dt, rng);
        DirectionCheck dc;
        dc.analytic = control_dot(e.gradient, d, dt);
        dc.min_error = std::numeric_limits<double>::infinity();
        for (double base : eps_sweep) {
            const double h = base * scale;
            Control up = u, um = u;
            up.data += h * d.data;
            um.data -= h * d.data;
            const double fd = (rc.value(up) - rc.value(um)) / (2.0 * h);
            const double err = relative_gap(dc.analytic, fd);
            dc.eps.push_back(h);
            dc.fd.push_back(fd);
            dc.rel_error.push_back(err);
            dc.min_error = std::min(dc.min_error, err);
        }
        rep.directions.push_back(std::move(dc));
    }
    return rep;
}

/// Per-step check of <L a, b> = <a, L^T b> for the linearized step L at x_k,
/// with a and b random. Returns |lhs - rhs| / max(|lhs|, |rhs|) for k = 0..n-1.
inline std::vector<double> adjoint_consistency(const SemiImplicitStepper& st, const Trajectory& traj, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    const Eigen::Index m = 3 * st.grid().cells();
    std::vector<double> out;
    for (int k = 0; k < traj.time.n_steps; ++k) {
        Vec a(m), b(m);
        for (Eigen::Index i = 0; i < m; ++i) a[i] = N(rng);
        for (Eigen::Index i = 0; i < m; ++i) b[i] = N(rng);
        const Vec& x = traj.states[static_cast<std::size_t>(k)];
        const double lhs = st.linearized_step(x, a, k + 1).dot(b);
        const double rhs = a.dot(st.linearized_step_transpose(x, b, k + 1));
        out.push_back(relative_gap(lhs, rhs));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Manufactured solutions
// ---------------------------------------------------------------------------

/// Closed-form (v*, p*) on I x Omega with the sources that make it an exact
/// solution. `exact` and `source` return (vx, vy, p) and (fx, fy, s_p).
struct MmsCase {
    std::string name;
    PhysParams params{};
    double lx = 1.0;
    double ly = 1.0;
    double t_final = 1.0;
    std::function<std::array<double, 3>(double t, double x, double y)> exact;
    std::function<std::array<double, 3>(double t, double x, double y)> source;
};

namespace detail {

/// vx = A T(t) f(x) g(y), vy = B T(t) g(x) f(y), p = C P(t) c(x) c(y) (or C P(t))
/// with f = sin(pi s/L), c = cos(pi s/L) and g = 1 + q s (L - s),
/// q = 2b/(nu L). Then vx = 0 on x = 0, L and (nu/2) dvx/dn + b vx = 0 on
/// y = 0, L exactly (g'(0) = qL = 2b/nu, g(0) = 1); likewise for vy, and
/// dp/dn = 0. Sources follow from substituting into the state equations.
struct SeparableMms {
    PhysParams prm;
    double L = 1.0;
    double A = 0.0, B = 0.0, C = 0.0;
    bool uniform_pressure = false;
    std::function<double(double)> T, dT, P, dP;

    [[nodiscard]] double k() const { return std::numbers::pi / L; }
    [[nodiscard]] double q() const { return 2.0 * prm.b / (prm.nu * L); }
    [[nodiscard]] double f(double s) const { return std::sin(k() * s); }
    [[nodiscard]] double f1(double s) const { return k() * std::cos(k() * s); }
    [[nodiscard]] double f2(double s) const { return -k() * k() * f(s); }
    [[nodiscard]] double g(double s) const { return 1.0 + q() * s * (L - s); }
    [[nodiscard]] double g1(double s) const { return q() * (L - 2.0 * s); }
    [[nodiscard]] double g2(double) const { return -2.0 * q(); }
    [[nodiscard]] double c(double s) const { return uniform_pressure ? 1.0 : std::cos(k() * s); }
    [[nodiscard]] double c1(double s) const { return uniform_pressure ? 0.0 : -k() * std::sin(k() * s); }
    [[nodiscard]] double c2(double s) const { return uniform_pressure ? 0.0 : -k() * k() * std::cos(k() * s); }

    [[nodiscard]] std::array<double, 3> exact(double t, double x, double y) const {
        return {A * T(t) * f(x) * g(y), B * T(t) * g(x) * f(y), C * P(t) * c(x) * c(y)};
    }

    [[nodiscard]] std::array<double, 3> source(double t, double x, double y) const {
        const double tt = T(t), pt = P(t);
        const double u = A * tt * f(x) * g(y);
        const double ux = A * tt * f1(x) * g(y), uy = A * tt * f(x) * g1(y);
        const double uxx = A * tt * f2(x) * g(y), uyy = A * tt * f(x) * g2(y), uxy = A * tt * f1(x) * g1(y);
        const double w = B * tt * g(x) * f(y);
        const double wx = B * tt * g1(x) * f(y), wy = B * tt * g(x) * f1(y);
        const double wxx = B * tt * g2(x) * f(y), wyy = B * tt * g(x) * f2(y), wxy = B * tt * g1(x) * f1(y);
        const double p = C * pt * c(x) * c(y);
        const double px = C * pt * c1(x) * c(y), py = C * pt * c(x) * c1(y);
        const double pxx = C * pt * c2(x) * c(y), pyy = C * pt * c(x) * c2(y);
        const double dv = ux + wy;
        const double rho = prm.rho, nu = prm.nu, beta = prm.beta;
        double fx = rho * A * dT(t) * f(x) * g(y) + rho * (u * ux + w * uy) + 0.5 * rho * dv * u -
                    nu * (uxx + 0.5 * uyy + 0.5 * wxy) + px;
        double fy = rho * B * dT(t) * g(x) * f(y) + rho * (u * wx + w * wy) + 0.5 * rho * dv * w -
                    nu * (0.5 * uxy + 0.5 * wxx + wyy) + py;
        double sp = beta * C * dP(t) * c(x) * c(y) + dv - prm.gamma * (pxx + pyy);
        if (!prm.quasi_incompressible) {
            fx += beta * p * px;
            fy += beta * p * py;
            sp += beta * (u * px + w * py);
        }
        return {fx, fy, sp};
    }

    [[nodiscard]] MmsCase make(std::string name, double t_final) const {
        SeparableMms self = *this;
        return MmsCase{std::move(name), prm, L, L, t_final,
                       [self](double t, double x, double y) { return self.exact(t, x, y); },
                       [self](double t, double x, double y) { return self.source(t, x, y); }};
    }
};

inline PhysParams mms_default_params(bool quasi_incompressible = false) {
    PhysParams p;
    p.rho = 1.0;
    p.nu = 0.1;
    p.beta = 1.0;
    p.gamma = 0.1;
    p.b = 0.5;
    p.quasi_incompressible = quasi_incompressible;
    return p;
}

}  // namespace detail

/// Time-independent (v*, p*): isolates the spatial error.
inline MmsCase mms_steady_case(const PhysParams& prm = detail::mms_default_params(false), double L = 1.0) {
    detail::SeparableMms m;
    m.prm = prm;
    m.L = L;
    m.A = 0.5;
    m.B = -0.4;
    m.C = 0.3;
    m.T = m.P = [](double) { return 1.0; };
    m.dT = m.dP = [](double) { return 0.0; };
    return m.make("steady", 1.0);
}

/// v* = 0, spatially constant p*(t): isolates the temporal error.
inline MmsCase mms_temporal_case(const PhysParams& prm = detail::mms_default_params(false), double L = 1.0) {
    detail::SeparableMms m;
    m.prm = prm;
    m.L = L;
    m.C = 1.0;
    m.uniform_pressure = true;
    m.T = m.dT = [](double) { return 0.0; };
    m.P = [](double t) { return 1.0 + 0.5 * std::sin(4.0 * t); };
    m.dP = [](double t) { return 2.0 * std::cos(4.0 * t); };
    return m.make("temporal", 1.0);
}

/// Full space-time case, meant for dt proportional to h^2.
inline MmsCase mms_space_time_case(const PhysParams& prm = detail::mms_default_params(false), double L = 1.0) {
    detail::SeparableMms m;
    m.prm = prm;
    m.L = L;
    m.A = 0.5;
    m.B = -0.4;
    m.C = 0.3;
    m.T = [](double t) { return std::exp(-t); };
    m.dT = [](double t) { return -std::exp(-t); };
    m.P = [](double t) { return std::cos(2.0 * t); };
    m.dP = [](double t) { return -2.0 * std::sin(2.0 * t); };
    return m.make("space-time", 0.5);
}

struct MmsLevel {
    int n = 16;        ///< cells per axis
    int n_steps = 10;
};

struct MmsResult {
    std::string name;
    std::vector<MmsLevel> levels;
    std::vector<double> h;
    std::vector<double> dt;
    std::vector<double> err_v;  ///< discrete L2(I x Omega) over levels 1..n
    std::vector<double> err_p;
    double slope_v_h = 0.0;
    double slope_p_h = 0.0;
    double slope_v_dt = 0.0;
    double slope_p_dt = 0.0;
};

inline MmsResult run_mms(const MmsCase& mc, const std::vector<MmsLevel>& ladder) {
    if (ladder.size() < 3) throw std::invalid_argument("run_mms: need a ladder of >= 3 resolutions");
    MmsResult r;
    r.name = mc.name;
    r.levels = ladder;
    for (const MmsLevel& lv : ladder) {
        const GridSpec g{lv.n, lv.n, mc.lx, mc.ly};
        const TimeSpec ts{mc.t_final, lv.n_steps};
        const double dt = ts.dt();
        const Layout lay{g};
        const int nc = g.cells();
        auto sample = [&](const auto& fn, double t) {
            Vec out(3 * nc);
            for (int j = 1; j <= g.ny; ++j)
                for (int i = 1; i <= g.nx; ++i) {
                    const auto val = fn(t, g.xc(i), g.yc(j));
                    for (int b = 0; b < 3; ++b) out[lay.index(b, i, j)] = val[static_cast<std::size_t>(b)];
                }
            return out;
        };
        Control u(g, lv.n_steps);
        std::vector<Vec> ps;
        for (int k = 0; k < lv.n_steps; ++k) {
            const Vec s = sample(mc.source, ts.t(k + 1));
            u.segment(k) = s.head(2 * nc);
            ps.push_back(s.tail(nc));
        }
        const Vec x0 = sample(mc.exact, 0.0);
        const SemiImplicitStepper st(g, mc.params, dt);
        ForwardOptions opts;
        opts.pressure_source = &ps;
        const Trajectory tr = forward_solve(st, lay.vector(x0, 0), lay.scalar(x0, 2), u, opts);
        double ev = 0.0, ep = 0.0;
        for (int k = 1; k <= lv.n_steps; ++k) {
            const Vec d = tr.states[static_cast<std::size_t>(k)] - sample(mc.exact, ts.t(k));
            ev += d.head(2 * nc).squaredNorm();
            ep += d.tail(nc).squaredNorm();
        }
        r.h.push_back(g.dx());
        r.dt.push_back(dt);
        r.err_v.push_back(std::sqrt(ev * dt * g.cell_area()));
        r.err_p.push_back(std::sqrt(ep * dt * g.cell_area()));
    }
    auto varies = [](const std::vector<double>& x) { return x.front() != x.back(); };
    auto slope = [&](const std::vector<double>& x, const std::vector<double>& e) {
        for (double v : e)
            if (!(v > 0.0)) return 0.0;
        return loglog_slope(x, e);
    };
    if (varies(r.h)) {
        r.slope_v_h = slope(r.h, r.err_v);
        r.slope_p_h = slope(r.h, r.err_p);
    }
    if (varies(r.dt)) {
        r.slope_v_dt = slope(r.dt, r.err_v);
        r.slope_p_dt = slope(r.dt, r.err_p);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Calculus identities
// ---------------------------------------------------------------------------

/// Residuals of three discrete identities for fields with n.v = 0, dn p = 0:
///   green:   int p div v + int grad p . v
///   product: int p v.grad p + 1/2 int p^2 div v
///   temam:   int rho (v.grad)v . v + 1/2 int rho |v|^2 div v
struct IdentityResiduals {
    double green = 0.0;
    double product = 0.0;
    double temam = 0.0;
};

inline IdentityResiduals check_calculus_identities(VectorField v, ScalarField p, const PhysParams& prm) {
    fill_ghosts_state(v, p, prm.boundary(), prm.nu);
    const GridSpec& g = p.grid();
    const ScalarField dv = div(v);
    ScalarField half_p2(g), half_v2(g);
    for (int j = 1; j <= g.ny; ++j)
        for (int i = 1; i <= g.nx; ++i) {
            half_p2(i, j) = 0.5 * p(i, j) * p(i, j);
            half_v2(i, j) = 0.5 * (v.x(i, j) * v.x(i, j) + v.y(i, j) * v.y(i, j));
        }
    IdentityResiduals r;
    r.green = std::abs(dot_volume(p, dv) + dot_volume(grad(p), v));
    r.product = std::abs(dot_volume(p, convect(v, p)) + dot_volume(half_p2, dv));
    r.temam = prm.rho * std::abs(dot_volume(convect(v, v), v) + dot_volume(half_v2, dv));
    return r;
}

/// Smooth, asymmetric synthetic fields on (0,lx)x(0,ly) with n.v = 0,
/// dv_t/dn = 0 and dp/dn = 0 on the walls.
inline std::pair<VectorField, ScalarField> synthetic_fields(const GridSpec& g) {
    const double pi = std::numbers::pi;
    VectorField v(g);
    ScalarField p(g);
    for (int j = 1; j <= g.ny; ++j)
        for (int i = 1; i <= g.nx; ++i) {
            const double x = g.xc(i) / g.lx, y = g.yc(j) / g.ly;
            v.x(i, j) = std::sin(pi * x) * (1.0 + 0.5 * x) * (std::cos(pi * y) + 0.3 * std::cos(2 * pi * y));
            v.y(i, j) = std::sin(pi * y) * (1.0 - 0.4 * y) * (std::cos(pi * x) + 0.2 * std::cos(2 * pi * x));
            p(i, j) = (std::cos(pi * x) + 0.5 * std::cos(2 * pi * x) + 0.2) * (std::cos(pi * y) + 0.25 * std::cos(3 * pi * y));
        }
    return {std::move(v), std::move(p)};
}

struct IdentityLadder {
    std::vector<int> n;
    std::vector<IdentityResiduals> residuals;
    double slope_green = 0.0;
    double slope_product = 0.0;
    double slope_temam = 0.0;
    /// True when every residual of the identity is at rounding level.
    bool green_exact = false;
    bool product_exact = false;
    bool temam_exact = false;
};

inline IdentityLadder identity_ladder(const std::vector<int>& sizes, double rounding = 1e-13) {
    PhysParams prm;
    prm.b = 0.0;
    IdentityLadder out;
    std::vector<double> h, rg, rp, rt;
    for (int n : sizes) {
        const GridSpec g{n, n, 1.0, 1.0};
        auto [v, p] = synthetic_fields(g);
        const IdentityResiduals r = check_calculus_identities(std::move(v), std::move(p), prm);
        out.n.push_back(n);
        out.residuals.push_back(r);
        h.push_back(g.dx());
        rg.push_back(r.green);
        rp.push_back(r.product);
        rt.push_back(r.temam);
    }
    auto all_small = [&](const std::vector<double>& r) {
        for (double x : r)
            if (x > rounding) return false;
        return true;
    };
    out.green_exact = all_small(rg);
    out.product_exact = all_small(rp);
    out.temam_exact = all_small(rt);
    if (!out.green_exact) out.slope_green = loglog_slope(h, rg);
    if (!out.product_exact) out.slope_product = loglog_slope(h, rp);
    if (!out.temam_exact) out.slope_temam = loglog_slope(h, rt);
    return out;
}

// ---------------------------------------------------------------------------
// Lipschitz probe
// ---------------------------------------------------------------------------

/// Discrete L2(I; H1) norm of the difference of two trajectories, levels 1..n.
inline double trajectory_h1_distance(const Trajectory& a, const Trajectory& b) {
    const int n = a.time.n_steps;
    const double dt = a.time.dt();
    double s = 0.0;
    for (int k = 1; k <= n; ++k) {
        const VectorField dv = a.velocity(k) - b.velocity(k);
        const ScalarField dp = a.pressure(k) - b.pressure(k);
        s += dt * (h1_norm_sq(dv.x) + h1_norm_sq(dv.y) + h1_norm_sq(dp));
    }
    return std::sqrt(s);
}

struct LipschitzReport {
    std::vector<double> eps;
    std::vector<double> ratios;

    /// max/min ratio; 1 when all ratios are 0.
    [[nodiscard]] double variation_factor() const {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (double r : ratios) {
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        if (hi == 0.0) return 1.0;
        return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    }
};

inline LipschitzReport lipschitz_probe(const SemiImplicitStepper& st, const VectorField& v0, const ScalarField& p0,
                                       const Control& u, const Control& du, const std::vector<double>& epsilons) {
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0)) throw std::invalid_argument("lipschitz_probe: epsilons must be positive");
        if (i > 0 && !(epsilons[i] < epsilons[i - 1]))
            throw std::invalid_argument("lipschitz_probe: epsilons must be decreasing");
    }
    const double dt = st.dt();
    const double dnorm = control_norm(du, dt);
    const Trajectory base = forward_solve(st, v0, p0, u);
    LipschitzReport rep;
    for (double e : epsilons) {
        rep.eps.push_back(e);
        if (dnorm == 0.0) {
            rep.ratios.push_back(0.0);
            continue;
        }
        Control up = u;
        up.data += e * du.data;
        rep.ratios.push_back(trajectory_h1_distance(forward_solve(st, v0, p0, up), base) / (e * dnorm));
    }
    return rep;
}

}  // namespace semicomp
