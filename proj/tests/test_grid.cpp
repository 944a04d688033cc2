#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "semicomp/grid.hpp"

using namespace semicomp;

namespace {

constexpr double kPi = std::numbers::pi;

GridSpec unit(int n) { return {n, n, 1.0, 1.0}; }

ScalarField random_field(const GridSpec& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    ScalarField f(g);
    for (int j = 1; j <= g.ny; ++j)
        for (int i = 1; i <= g.nx; ++i) f(i, j) = U(rng);
    return f;
}

}  // namespace

TEST(GridSpec, SpacingAndValidation) {
    const GridSpec g{8, 4, 2.0, 3.0};
    EXPECT_DOUBLE_EQ(g.dx(), 0.25);
    EXPECT_DOUBLE_EQ(g.dy(), 0.75);
    EXPECT_NO_THROW(g.validate());
    EXPECT_THROW((GridSpec{3, 8, 1.0, 1.0}.validate()), std::invalid_argument);
    EXPECT_THROW((GridSpec{8, 8, 0.0, 1.0}.validate()), std::invalid_argument);
}

TEST(Ghosts, ZeroVelocityConstantPressureReproduced) {
    const GridSpec g = unit(6);
    VectorField v(g);
    ScalarField p(g, 3.5);
    fill_ghosts_state(v, p, BoundarySpec{0.7}, 0.1);
    for (int j = 0; j <= g.ny + 1; ++j)
        for (int i = 0; i <= g.nx + 1; ++i) {
            EXPECT_EQ(v.x(i, j), 0.0);
            EXPECT_EQ(v.y(i, j), 0.0);
            EXPECT_EQ(p(i, j), 3.5);
        }
}

TEST(Ghosts, FreeSlipIsEvenReflection) {
    const GridSpec g = unit(6);
    std::mt19937_64 rng(1);
    VectorField v(random_field(g, rng), random_field(g, rng));
    fill_ghosts_velocity(v, BoundarySpec{0.0}, 0.05);
    for (int i = 1; i <= g.nx; ++i) {
        EXPECT_EQ(v.x(i, 0), v.x(i, 1));
        EXPECT_EQ(v.x(i, g.ny + 1), v.x(i, g.ny));
        EXPECT_EQ(v.y(i, 0), -v.y(i, 1));
    }
    for (int j = 1; j <= g.ny; ++j) {
        EXPECT_EQ(v.y(0, j), v.y(1, j));
        EXPECT_EQ(v.x(0, j), -v.x(1, j));
        EXPECT_EQ(v.x(g.nx + 1, j), -v.x(g.nx, j));
    }
}

TEST(Ghosts, RobinFillExactOnLinearProfile) {
    // Bottom wall, outward normal -y: (nu/2)(-d vx/dy) + b vx = 0, so
    // vx = w0 (1 + 2 b y / nu) satisfies it at y = 0.
    const double nu = 0.03;
    const double b = 0.4;
    const double w0 = 1.7;
    const GridSpec g{8, 8, 1.0, 1.0};
    const double slope = 2.0 * b * w0 / nu;
    VectorField v(g);
    for (int j = 1; j <= g.ny; ++j)
        for (int i = 1; i <= g.nx; ++i) v.x(i, j) = w0 + slope * g.yc(j);
    fill_ghosts_velocity(v, BoundarySpec{b}, nu);
    const double h = g.dy();
    for (int i = 1; i <= g.nx; ++i) {
        EXPECT_NEAR(v.x(i, 0), w0 - slope * 0.5 * h, 1e-13 * std::abs(w0));
        const double wall = 0.5 * (v.x(i, 0) + v.x(i, 1));
        const double dn = -(v.x(i, 1) - v.x(i, 0)) / h;
        EXPECT_NEAR(0.5 * nu * dn + b * wall, 0.0, 1e-13);
    }
}

TEST(Ghosts, CornersTakeNormalFillLast) {
    const GridSpec g = unit(4);
    VectorField v(g, 1.0, 2.0);
    fill_ghosts_velocity(v, BoundarySpec{0.0}, 0.1);
    // vx: tangential (even) in y then odd in x.
    EXPECT_EQ(v.x(0, 0), -1.0);
    // vy: tangential (even) in x then odd in y.
    EXPECT_EQ(v.y(0, 0), -2.0);
}

TEST(Stencils, GradientExactOnLinears) {
    const GridSpec g{10, 7, 2.0, 1.5};
    const double a = 1.25, c = -0.5;
    ScalarField p = ScalarField::sample(g, [&](double x, double y) { return a * x + c * y + 0.3; });
    // Fill ghosts by linear extrapolation, the data the stencil needs.
    for (int j = 0; j <= g.ny + 1; ++j)
        for (int i = 0; i <= g.nx + 1; ++i) p(i, j) = a * g.xc(i) + c * g.yc(j) + 0.3;
    const VectorField gp = grad(p);
    for (int j = 1; j <= g.ny; ++j)
        for (int i = 1; i <= g.nx; ++i) {
            EXPECT_NEAR(gp.x(i, j), a, 1e-12);
            EXPECT_NEAR(gp.y(i, j), c, 1e-12);
        }
}

TEST(Stencils, StrainOfSimpleShear) {
    const GridSpec g = unit(8);
    VectorField v(g);
    for (int j = 0; j <= g.ny + 1; ++j)
        for (int i = 0; i <= g.nx + 1; ++i) v.x(i, j) = g.yc(j);
    const SymTensorField e = strain(v);
    for (int j = 1; j <= g.ny; ++j)
        for (int i = 1; i <= g.nx; ++i) {
            EXPECT_NEAR(e.xx(i, j), 0.0, 1e-14);
            EXPECT_NEAR(e.xy(i, j), 0.5, 1e-12);
            EXPECT_NEAR(e.yy(i, j), 0.0, 1e-14);
        }
}

TEST(Stencils, LaplacianExactOnQuadratics) {
    const GridSpec g{9, 11, 1.0, 2.0};
    ScalarField f(g);
    for (int j = 0; j <= g.ny + 1; ++j)
        for (int i = 0; i <= g.nx + 1; ++i) f(i, j) = g.xc(i) * g.xc(i) + g.yc(j) * g.yc(j);
    const ScalarField l = laplacian(f);
    for (int j = 1; j <= g.ny; ++j)
        for (int i = 1; i <= g.nx; ++i) EXPECT_NEAR(l(i, j), 4.0, 1e-9);
}

TEST(Stencils, OperatorsAreLinear) {
    const GridSpec g = unit(7);
    std::mt19937_64 rng(7);
    VectorField a(random_field(g, rng), random_field(g, rng));
    VectorField c(random_field(g, rng), random_field(g, rng));
    ScalarField f = random_field(g, rng);
    ScalarField h = random_field(g, rng);
    const BoundarySpec bc{0.3};
    const double s = 1.7, t = -0.6;
    VectorField ac = s * a + t * c;
    ScalarField fh = s * f + t * h;
    fill_ghosts_velocity(a, bc, 0.1);
    fill_ghosts_velocity(c, bc, 0.1);
    fill_ghosts_velocity(ac, bc, 0.1);
    fill_ghosts_neumann(f);
    fill_ghosts_neumann(h);
    fill_ghosts_neumann(fh);
    auto close = [&](const ScalarField& lhs, const ScalarField& x, const ScalarField& y) {
        for (int j = 1; j <= g.ny; ++j)
            for (int i = 1; i <= g.nx; ++i) EXPECT_NEAR(lhs(i, j), s * x(i, j) + t * y(i, j), 1e-11);
    };
    close(div(ac), div(a), div(c));
    close(laplacian(fh), laplacian(f), laplacian(h));
    close(grad(fh).x, grad(f).x, grad(h).x);
    const VectorField vac = viscous_operator(ac, 0.1);
    close(vac.x, viscous_operator(a, 0.1).x, viscous_operator(c, 0.1).x);
    close(vac.y, viscous_operator(a, 0.1).y, viscous_operator(c, 0.1).y);
    // convect is linear in the differentiated argument.
    close(convect(a, fh), convect(a, f), convect(a, h));
}

TEST(Quadrature, ConstantsAndLinears) {
    const GridSpec g{10, 15, 2.0, 3.0};
    const ScalarField one(g, 1.0);
    EXPECT_NEAR(integrate_volume(one), 6.0, 1e-12);
    EXPECT_NEAR(integrate_boundary(BoundaryTrace(g, 1.0)), 10.0, 1e-12);
    const GridSpec u = unit(13);
    const ScalarField x = ScalarField::sample(u, [](double xx, double) { return xx; });
    EXPECT_NEAR(integrate_volume(x), 0.5, 1e-14);
}

TEST(Identities, DiscreteGreenFormulaIsExact) {
    // sum p div v + sum grad p . v = 0 once the odd/even ghosts are in place.
    const GridSpec g{12, 9, 1.0, 0.7};
    std::mt19937_64 rng(11);
    VectorField v(random_field(g, rng), random_field(g, rng));
    ScalarField p = random_field(g, rng);
    fill_ghosts_state(v, p, BoundarySpec{0.2}, 0.05);
    const double lhs = dot_volume(p, div(v)) + dot_volume(grad(p), v);
    EXPECT_LT(std::abs(lhs), 1e-13);
}

TEST(Identities, ViscousEnergyMatchesDissipationWithoutSlip) {
    const GridSpec g{10, 8, 1.0, 1.0};
    std::mt19937_64 rng(5);
    VectorField v(random_field(g, rng), random_field(g, rng));
    fill_ghosts_velocity(v, BoundarySpec{0.0}, 0.02);
    const double work = dot_volume(viscous_operator(v, 0.02), v);
    const double diss = viscous_dissipation(v, 0.02);
    EXPECT_GT(diss, 0.0);
    EXPECT_NEAR(work, diss, 1e-12 * diss);
}

TEST(Identities, PressureDiffusionEnergy) {
    const GridSpec g{9, 10, 1.0, 1.0};
    std::mt19937_64 rng(9);
    ScalarField p = random_field(g, rng);
    fill_ghosts_neumann(p);
    const double work = -dot_volume(laplacian(p), p);
    EXPECT_NEAR(work, gradient_dissipation(p, 1.0), 1e-12 * work);
}

TEST(Identities, TemamResidualSecondOrder) {
    // int (v.grad)v.v + 1/2 int |v|^2 div v -> 0 for smooth v with n.v = 0.
    auto residual = [](int n) {
        const GridSpec g = unit(n);
        VectorField v(g);
        for (int j = 1; j <= n; ++j)
            for (int i = 1; i <= n; ++i) {
                const double x = g.xc(i), y = g.yc(j);
                v.x(i, j) = std::sin(kPi * x) * (1.0 + 0.5 * x) * (std::cos(kPi * y) + 0.3 * std::cos(2 * kPi * y));
                v.y(i, j) = std::sin(kPi * y) * (1.0 - 0.4 * y) * (std::cos(kPi * x) + 0.2 * std::cos(2 * kPi * x));
            }
        fill_ghosts_velocity(v, BoundarySpec{0.0}, 0.1);
        const ScalarField dv = div(v);
        ScalarField half_sq(g);
        for (int j = 1; j <= n; ++j)
            for (int i = 1; i <= n; ++i) half_sq(i, j) = 0.5 * (v.x(i, j) * v.x(i, j) + v.y(i, j) * v.y(i, j));
        return std::abs(dot_volume(convect(v, v), v) + dot_volume(half_sq, dv));
    };
    const double r1 = residual(32), r2 = residual(64), r3 = residual(128);
    EXPECT_GT(std::log2(r1 / r2), 1.9);
    EXPECT_GT(std::log2(r2 / r3), 1.9);
}

TEST(Identities, ZeroFieldGivesZeroResiduals) {
    const GridSpec g = unit(8);
    VectorField v(g);
    ScalarField p(g);
    fill_ghosts_state(v, p, BoundarySpec{}, 0.1);
    EXPECT_EQ(dot_volume(p, div(v)) + dot_volume(grad(p), v), 0.0);
    EXPECT_EQ(dot_volume(convect(v, v), v), 0.0);
}

TEST(Norms, H1NormOfConstantIsL2) {
    const GridSpec g{6, 6, 2.0, 1.0};
    ScalarField f(g, 2.0);
    fill_ghosts_neumann(f);
    EXPECT_NEAR(h1_norm_sq(f), 8.0, 1e-12);
}
