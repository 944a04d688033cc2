#pragma once

/// @file grid.hpp
/// @brief Structured cell-centred grid, ghosted fields and second-order stencils.
///
/// Unknowns live at cell centres of the rectangle (0,lx)x(0,ly). Every field
/// carries one ghost layer; ghost values are derived data and are refilled
/// by the boundary routines before any stencil touches them.
///
/// Ghost conventions for the wall conditions n.v = 0, (nu/2) dv_t/dn + b v_t = 0,
/// dp/dn = 0:
///   - normal velocity component: odd reflection (wall value 0)
///   - tangential velocity component: Robin reflection g = r*i,
///     r = (nu - b h)/(nu + b h), obtained from centring the condition on the wall
///   - pressure: even reflection
/// Corners compose both edge fills with the normal-direction fill applied last.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace semicomp {

struct GridSpec {
    int nx = 0;
    int ny = 0;
    double lx = 1.0;
    double ly = 1.0;

    [[nodiscard]] double dx() const { return lx / nx; }
    [[nodiscard]] double dy() const { return ly / ny; }
    [[nodiscard]] double cell_area() const { return dx() * dy(); }
    [[nodiscard]] int cells() const { return nx * ny; }
    /// Stride of the ghosted storage.
    [[nodiscard]] int stride() const { return nx + 2; }
    [[nodiscard]] double xc(int i) const { return (i - 0.5) * dx(); }
    [[nodiscard]] double yc(int j) const { return (j - 0.5) * dy(); }
    /// Number of boundary faces (bottom, top, left, right).
    [[nodiscard]] int boundary_faces() const { return 2 * (nx + ny); }

    void validate() const {
        if (nx < 4 || ny < 4) throw std::invalid_argument("grid: nx and ny must be >= 4");
        if (!(lx > 0.0) || !(ly > 0.0)) throw std::invalid_argument("grid: lx and ly must be > 0");
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const GridSpec& g, double fill = 0.0)
        : grid_(g), values_(static_cast<std::size_t>((g.nx + 2) * (g.ny + 2)), fill) {}

    [[nodiscard]] const GridSpec& grid() const { return grid_; }

    /// Ghosted indexing, i in [0, nx+1], j in [0, ny+1]; interior is [1,nx]x[1,ny].
    double& operator()(int i, int j) { return values_[static_cast<std::size_t>(j * grid_.stride() + i)]; }
    double operator()(int i, int j) const { return values_[static_cast<std::size_t>(j * grid_.stride() + i)]; }

    [[nodiscard]] std::vector<double>& raw() { return values_; }
    [[nodiscard]] const std::vector<double>& raw() const { return values_; }

    template <class F>
    void for_interior(F&& f) {
        for (int j = 1; j <= grid_.ny; ++j)
            for (int i = 1; i <= grid_.nx; ++i) f(i, j, (*this)(i, j));
    }

    /// Sets interior values from f(x, y) at cell centres.
    template <class F>
    static ScalarField sample(const GridSpec& g, F&& f) {
        ScalarField out(g);
        for (int j = 1; j <= g.ny; ++j)
            for (int i = 1; i <= g.nx; ++i) out(i, j) = f(g.xc(i), g.yc(j));
        return out;
    }

    ScalarField& operator+=(const ScalarField& o) {
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
        return *this;
    }
    ScalarField& operator-=(const ScalarField& o) {
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
        return *this;
    }
    ScalarField& operator*=(double s) {
        for (double& v : values_) v *= s;
        return *this;
    }
    friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
    friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
    friend ScalarField operator*(double s, ScalarField a) { return a *= s; }

    [[nodiscard]] bool interior_finite() const {
        for (int j = 1; j <= grid_.ny; ++j)
            for (int i = 1; i <= grid_.nx; ++i)
                if (!std::isfinite((*this)(i, j))) return false;
        return true;
    }

    [[nodiscard]] double max_abs() const {
        double m = 0.0;
        for (int j = 1; j <= grid_.ny; ++j)
            for (int i = 1; i <= grid_.nx; ++i) m = std::max(m, std::abs((*this)(i, j)));
        return m;
    }

private:
    GridSpec grid_{};
    std::vector<double> values_;
};

struct VectorField {
    ScalarField x;
    ScalarField y;

    VectorField() = default;
    explicit VectorField(const GridSpec& g, double fx = 0.0, double fy = 0.0) : x(g, fx), y(g, fy) {}
    VectorField(ScalarField fx, ScalarField fy) : x(std::move(fx)), y(std::move(fy)) {
        if (!(x.grid() == y.grid())) throw std::invalid_argument("VectorField: components on different grids");
    }

    [[nodiscard]] const GridSpec& grid() const { return x.grid(); }

    VectorField& operator+=(const VectorField& o) { x += o.x; y += o.y; return *this; }
    VectorField& operator-=(const VectorField& o) { x -= o.x; y -= o.y; return *this; }
    VectorField& operator*=(double s) { x *= s; y *= s; return *this; }
    friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
    friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
    friend VectorField operator*(double s, VectorField a) { return a *= s; }
};

/// Symmetric 2x2 tensor field (xx, xy, yy), cell-centred.
struct SymTensorField {
    ScalarField xx;
    ScalarField xy;
    ScalarField yy;
};

/// Values on the boundary faces, ordered bottom (i=1..nx), top (i=1..nx),
/// left (j=1..ny), right (j=1..ny).
struct BoundaryTrace {
    GridSpec grid{};
    std::vector<double> values;

    BoundaryTrace() = default;
    explicit BoundaryTrace(const GridSpec& g, double fill = 0.0)
        : grid(g), values(static_cast<std::size_t>(g.boundary_faces()), fill) {}

    [[nodiscard]] std::size_t bottom(int i) const { return static_cast<std::size_t>(i - 1); }
    [[nodiscard]] std::size_t top(int i) const { return static_cast<std::size_t>(grid.nx + i - 1); }
    [[nodiscard]] std::size_t left(int j) const { return static_cast<std::size_t>(2 * grid.nx + j - 1); }
    [[nodiscard]] std::size_t right(int j) const { return static_cast<std::size_t>(2 * grid.nx + grid.ny + j - 1); }
    /// Length of face k.
    [[nodiscard]] double face_length(std::size_t k) const {
        return k < static_cast<std::size_t>(2 * grid.nx) ? grid.dx() : grid.dy();
    }
};

/// Wall conditions. Each flag disables the matching ghost rule when false
/// (used only by operator tests; the solver keeps all three on).
struct BoundarySpec {
    double b = 0.0;
    bool normal_velocity_zero = true;
    bool tangential_robin = true;
    bool pressure_neumann = true;

    void validate() const {
        if (!(b >= 0.0)) throw std::invalid_argument("boundary: slip coefficient b must be >= 0");
    }
};

/// Robin reflection factor for a wall with normal spacing h.
inline double robin_factor(double nu, double b, double h) { return (nu - b * h) / (nu + b * h); }

namespace detail {

inline void reflect_x(ScalarField& f, double factor) {
    const GridSpec& g = f.grid();
    for (int j = 0; j <= g.ny + 1; ++j) {
        f(0, j) = factor * f(1, j);
        f(g.nx + 1, j) = factor * f(g.nx, j);
    }
}

inline void reflect_y(ScalarField& f, double factor) {
    const GridSpec& g = f.grid();
    for (int i = 0; i <= g.nx + 1; ++i) {
        f(i, 0) = factor * f(i, 1);
        f(i, g.ny + 1) = factor * f(i, g.ny);
    }
}

}  // namespace detail

/// Even reflection in both directions (dp/dn = 0).
inline void fill_ghosts_neumann(ScalarField& p) {
    detail::reflect_y(p, 1.0);
    detail::reflect_x(p, 1.0);
}

/// Ghosts for the velocity: tangential fill first, normal (odd) fill last.
inline void fill_ghosts_velocity(VectorField& v, const BoundarySpec& bc, double nu) {
    const GridSpec& g = v.grid();
    const double rx = bc.tangential_robin ? robin_factor(nu, bc.b, g.dx()) : 1.0;
    const double ry = bc.tangential_robin ? robin_factor(nu, bc.b, g.dy()) : 1.0;
    const double odd = bc.normal_velocity_zero ? -1.0 : 1.0;
    // vx: tangential on the bottom/top walls, normal on left/right.
    detail::reflect_y(v.x, ry);
    detail::reflect_x(v.x, odd);
    // vy: tangential on left/right, normal on bottom/top.
    detail::reflect_x(v.y, rx);
    detail::reflect_y(v.y, odd);
}

inline void fill_ghosts_state(VectorField& v, ScalarField& p, const BoundarySpec& bc, double nu) {
    if (!(nu > 0.0)) throw std::invalid_argument("fill_ghosts_state: nu must be > 0");
    fill_ghosts_velocity(v, bc, nu);
    if (bc.pressure_neumann) fill_ghosts_neumann(p);
    else {
        detail::reflect_y(p, -1.0);
        detail::reflect_x(p, -1.0);
    }
}

// ---------------------------------------------------------------------------
// Stencils. All expect ghosts already filled and return fields whose ghosts
// are zero.
// ---------------------------------------------------------------------------

inline ScalarField ddx(const ScalarField& f) {
    const GridSpec& g = f.grid();
    ScalarField out(g);
    const double s = 0.5 / g.dx();
    for (int j = 1; j <= g.ny; ++j)
        for (int i = 1; i <= g.nx; ++i) out(i, j) = s * (f(i + 1, j) - f(i - 1, j));
    return out;
}

inline ScalarField ddy(const ScalarField& f) {
    const GridSpec& g = f.grid();
    ScalarField out(g);
    const double s = 0.5 / g.dy();
    for (int j = 1; j <= g.ny; ++j)
        for (int i = 1; i <= g.nx; ++i) out(i, j) = s * (f(i, j + 1) - f(i, j - 1));
    return out;
}

inline VectorField grad(const ScalarField& p) { return VectorField(ddx(p), ddy(p)); }

inline ScalarField div(const VectorField& v) { return ddx(v.x) + ddy(v.y); }

inline ScalarField laplacian(const ScalarField& f) {
    const GridSpec& g = f.grid();
    ScalarField out(g);
    const double ax = 1.0 / (g.dx() * g.dx());
    const double ay = 1.0 / (g.dy() * g.dy());
    for (int j = 1; j <= g.ny; ++j)
        for (int i = 1; i <= g.nx; ++i)
            out(i, j) = ax * (f(i + 1, j) - 2.0 * f(i, j) + f(i - 1, j)) +
                        ay * (f(i, j + 1) - 2.0 * f(i, j) + f(i, j - 1));
    return out;
}

/// E(v) = (grad v + grad v^T)/2 by central differences.
inline SymTensorField strain(const VectorField& v) {
    ScalarField dxu = ddx(v.x);
    ScalarField dyu = ddy(v.x);
    ScalarField dxv = ddx(v.y);
    ScalarField dyv = ddy(v.y);
    return {std::move(dxu), 0.5 * (dyu + dxv), std::move(dyv)};
}

/// (w . grad) f. Only interior values of w are read.
inline ScalarField convect(const VectorField& w, const ScalarField& f) {
    const GridSpec& g = f.grid();
    ScalarField out(g);
    const double sx = 0.5 / g.dx();
    const double sy = 0.5 / g.dy();
    for (int j = 1; j <= g.ny; ++j)
        for (int i = 1; i <= g.nx; ++i)
            out(i, j) = w.x(i, j) * sx * (f(i + 1, j) - f(i - 1, j)) + w.y(i, j) * sy * (f(i, j + 1) - f(i, j - 1));
    return out;
}

inline VectorField convect(const VectorField& w, const VectorField& f) {
    return VectorField(convect(w, f.x), convect(w, f.y));
}

/// Shear rate S = dvx/dy + dvy/dx at the cell corner (i+1/2, j+1/2),
/// i in [0,nx], j in [0,ny].
inline double node_shear(const VectorField& v, int i, int j) {
    const GridSpec& g = v.grid();
    return (v.x(i, j + 1) + v.x(i + 1, j + 1) - v.x(i, j) - v.x(i + 1, j)) / (2.0 * g.dy()) +
           (v.y(i + 1, j) + v.y(i + 1, j + 1) - v.y(i, j) - v.y(i, j + 1)) / (2.0 * g.dx());
}

/// -div(nu E(v)) in flux form: normal stresses on cell faces, shear stress on
/// cell corners. Wall tractions enter through the ghost values.
inline VectorField viscous_operator(const VectorField& v, double nu) {
    const GridSpec& g = v.grid();
    const int nx = g.nx;
    const int ny = g.ny;
    const double dx = g.dx();
    const double dy = g.dy();
    std::vector<double> tau(static_cast<std::size_t>((nx + 1) * (ny + 1)));
    auto tau_at = [&](int i, int j) -> double& { return tau[static_cast<std::size_t>(j * (nx + 1) + i)]; };
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) tau_at(i, j) = 0.5 * nu * node_shear(v, i, j);

    VectorField out(g);
    for (int j = 1; j <= ny; ++j) {
        for (int i = 1; i <= nx; ++i) {
            const double fxe = nu * (v.x(i + 1, j) - v.x(i, j)) / dx;
            const double fxw = nu * (v.x(i, j) - v.x(i - 1, j)) / dx;
            const double fyn = nu * (v.y(i, j + 1) - v.y(i, j)) / dy;
            const double fys = nu * (v.y(i, j) - v.y(i, j - 1)) / dy;
            const double tne = tau_at(i, j);
            const double tnw = tau_at(i - 1, j);
            const double tse = tau_at(i, j - 1);
            const double tsw = tau_at(i - 1, j - 1);
            out.x(i, j) = -(fxe - fxw) / dx - (tne + tnw - tse - tsw) / (2.0 * dy);
            out.y(i, j) = -(fyn - fys) / dy - (tne + tse - tnw - tsw) / (2.0 * dx);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

inline double integrate_volume(const ScalarField& f) {
    const GridSpec& g = f.grid();
    double s = 0.0;
    for (int j = 1; j <= g.ny; ++j)
        for (int i = 1; i <= g.nx; ++i) s += f(i, j);
    return s * g.cell_area();
}

inline double integrate_boundary(const BoundaryTrace& f) {
    double s = 0.0;
    for (std::size_t k = 0; k < f.values.size(); ++k) s += f.values[k] * f.face_length(k);
    return s;
}

/// Wall-face values (ghost + interior)/2; ghosts must be filled.
inline BoundaryTrace boundary_trace(const ScalarField& f) {
    const GridSpec& g = f.grid();
    BoundaryTrace t(g);
    for (int i = 1; i <= g.nx; ++i) {
        t.values[t.bottom(i)] = 0.5 * (f(i, 0) + f(i, 1));
        t.values[t.top(i)] = 0.5 * (f(i, g.ny + 1) + f(i, g.ny));
    }
    for (int j = 1; j <= g.ny; ++j) {
        t.values[t.left(j)] = 0.5 * (f(0, j) + f(1, j));
        t.values[t.right(j)] = 0.5 * (f(g.nx + 1, j) + f(g.nx, j));
    }
    return t;
}

inline double dot_volume(const ScalarField& a, const ScalarField& b) {
    const GridSpec& g = a.grid();
    double s = 0.0;
    for (int j = 1; j <= g.ny; ++j)
        for (int i = 1; i <= g.nx; ++i) s += a(i, j) * b(i, j);
    return s * g.cell_area();
}

inline double dot_volume(const VectorField& a, const VectorField& b) {
    return dot_volume(a.x, b.x) + dot_volume(a.y, b.y);
}

/// Bulk viscous dissipation consistent with viscous_operator:
/// sum over faces of nu (normal rate)^2 and over corners of (nu/2) S^2,
/// wall faces and wall corners carrying half weight.
inline double viscous_dissipation(const VectorField& v, double nu) {
    const GridSpec& g = v.grid();
    const int nx = g.nx;
    const int ny = g.ny;
    const double dx = g.dx();
    const double dy = g.dy();
    double s = 0.0;
    for (int j = 1; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            const double w = (i == 0 || i == nx) ? 0.5 : 1.0;
            const double r = (v.x(i + 1, j) - v.x(i, j)) / dx;
            s += w * nu * r * r;
        }
    for (int j = 0; j <= ny; ++j)
        for (int i = 1; i <= nx; ++i) {
            const double w = (j == 0 || j == ny) ? 0.5 : 1.0;
            const double r = (v.y(i, j + 1) - v.y(i, j)) / dy;
            s += w * nu * r * r;
        }
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            double w = 1.0;
            if (i == 0 || i == nx) w *= 0.5;
            if (j == 0 || j == ny) w *= 0.5;
            const double sh = node_shear(v, i, j);
            s += w * 0.5 * nu * sh * sh;
        }
    return s * g.cell_area();
}

/// Integral of b |v_t|^2 over the walls, evaluated at wall corners of the
/// cell grid with the tangential wall velocity averaged along the wall.
/// Matches the traction the viscous operator sees; corners carry v = 0.
inline double slip_dissipation(const VectorField& v, double b) {
    if (b == 0.0) return 0.0;
    const GridSpec& g = v.grid();
    const int nx = g.nx;
    const int ny = g.ny;
    double s = 0.0;
    for (int j = 1; j < ny; ++j) {
        const double wl = 0.25 * (v.y(0, j) + v.y(1, j) + v.y(0, j + 1) + v.y(1, j + 1));
        const double wr = 0.25 * (v.y(nx, j) + v.y(nx + 1, j) + v.y(nx, j + 1) + v.y(nx + 1, j + 1));
        s += (wl * wl + wr * wr) * g.dy();
    }
    for (int i = 1; i < nx; ++i) {
        const double wb = 0.25 * (v.x(i, 0) + v.x(i, 1) + v.x(i + 1, 0) + v.x(i + 1, 1));
        const double wt = 0.25 * (v.x(i, ny) + v.x(i, ny + 1) + v.x(i + 1, ny) + v.x(i + 1, ny + 1));
        s += (wb * wb + wt * wt) * g.dx();
    }
    return b * s;
}

/// Integral of gamma |grad p|^2 on interior faces (wall faces carry dp/dn = 0).
inline double gradient_dissipation(const ScalarField& p, double gamma) {
    const GridSpec& g = p.grid();
    double s = 0.0;
    for (int j = 1; j <= g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const double r = (p(i + 1, j) - p(i, j)) / g.dx();
            s += r * r;
        }
    for (int j = 1; j < g.ny; ++j)
        for (int i = 1; i <= g.nx; ++i) {
            const double r = (p(i, j + 1) - p(i, j)) / g.dy();
            s += r * r;
        }
    return gamma * s * g.cell_area();
}

/// Squared discrete H1 norm: L2 part plus compact face differences (ghosts
/// filled, wall faces included with half weight).
inline double h1_norm_sq(const ScalarField& f) {
    const GridSpec& g = f.grid();
    double grad2 = 0.0;
    for (int j = 1; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) {
            const double w = (i == 0 || i == g.nx) ? 0.5 : 1.0;
            const double r = (f(i + 1, j) - f(i, j)) / g.dx();
            grad2 += w * r * r;
        }
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 1; i <= g.nx; ++i) {
            const double w = (j == 0 || j == g.ny) ? 0.5 : 1.0;
            const double r = (f(i, j + 1) - f(i, j)) / g.dy();
            grad2 += w * r * r;
        }
    return dot_volume(f, f) + grad2 * g.cell_area();
}

}  // namespace semicomp
