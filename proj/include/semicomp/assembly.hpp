#pragma once

/// @file assembly.hpp
/// @brief Packing of (v, p) into flat state vectors and sparse assembly of
/// stencil maps by colored probing.

#include <Eigen/Sparse>
#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

#include "semicomp/grid.hpp"

namespace semicomp {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

/// Flat layout of interior unknowns: blocks of nx*ny values, x index fastest.
/// A state vector holds [vx | vy | p]; a control vector holds [ux | uy].
struct Layout {
    GridSpec grid;

    [[nodiscard]] int n() const { return grid.cells(); }
    [[nodiscard]] int index(int block, int i, int j) const {
        return block * n() + (j - 1) * grid.nx + (i - 1);
    }

    void scatter(Eigen::Ref<const Vec> src, int block, ScalarField& dst) const {
        for (int j = 1; j <= grid.ny; ++j)
            for (int i = 1; i <= grid.nx; ++i) dst(i, j) = src[index(block, i, j)];
    }
    void gather(const ScalarField& src, int block, Eigen::Ref<Vec> dst) const {
        for (int j = 1; j <= grid.ny; ++j)
            for (int i = 1; i <= grid.nx; ++i) dst[index(block, i, j)] = src(i, j);
    }

    [[nodiscard]] ScalarField scalar(Eigen::Ref<const Vec> src, int block) const {
        ScalarField f(grid);
        scatter(src, block, f);
        return f;
    }
    [[nodiscard]] VectorField vector(Eigen::Ref<const Vec> src, int first_block) const {
        VectorField v(grid);
        scatter(src, first_block, v.x);
        scatter(src, first_block + 1, v.y);
        return v;
    }

    [[nodiscard]] Vec pack_state(const VectorField& v, const ScalarField& p) const {
        Vec out(3 * n());
        gather(v.x, 0, out);
        gather(v.y, 1, out);
        gather(p, 2, out);
        return out;
    }
    [[nodiscard]] Vec pack_vector(const VectorField& v) const {
        Vec out(2 * n());
        gather(v.x, 0, out);
        gather(v.y, 1, out);
        return out;
    }
    [[nodiscard]] Vec pack_scalar(const ScalarField& f) const {
        Vec out(n());
        gather(f, 0, out);
        return out;
    }
};

/// Visits every entry of a linear stencil map f: R^(blocks_in*N) -> R^(blocks_out*N)
/// whose output at a cell depends only on inputs within index distance 1.
/// Columns sharing a 3x3 color are probed together; the visitor receives
/// (row, col, value) for each structurally reached entry.
template <class LinearMap, class Visitor>
void probe_stencil_map(const GridSpec& g, int blocks_in, int blocks_out, LinearMap&& f, Visitor&& visit) {
    const Layout lay{g};
    const int n = lay.n();
    Vec e = Vec::Zero(blocks_in * n);
    for (int bin = 0; bin < blocks_in; ++bin) {
        for (int ci = 0; ci < 3; ++ci) {
            for (int cj = 0; cj < 3; ++cj) {
                e.setZero();
                for (int j = 1 + cj; j <= g.ny; j += 3)
                    for (int i = 1 + ci; i <= g.nx; i += 3) e[lay.index(bin, i, j)] = 1.0;
                const Vec y = f(e);
                if (y.size() != blocks_out * n) throw std::logic_error("probe_stencil_map: output size mismatch");
                for (int bout = 0; bout < blocks_out; ++bout) {
                    for (int j = 1; j <= g.ny; ++j) {
                        for (int i = 1; i <= g.nx; ++i) {
                            const double val = y[lay.index(bout, i, j)];
                            if (val == 0.0) continue;
                            // Unique probed column within distance 1.
                            int ic = -1;
                            int jc = -1;
                            for (int d = -1; d <= 1; ++d) {
                                const int ii = i + d;
                                if (ii >= 1 && ii <= g.nx && (ii - 1) % 3 == ci) ic = ii;
                                const int jj = j + d;
                                if (jj >= 1 && jj <= g.ny && (jj - 1) % 3 == cj) jc = jj;
                            }
                            if (ic < 0 || jc < 0) throw std::logic_error("probe_stencil_map: stencil wider than one cell");
                            visit(lay.index(bout, i, j), lay.index(bin, ic, jc), val);
                        }
                    }
                }
            }
        }
    }
}

template <class LinearMap>
SpMat assemble_stencil_map(const GridSpec& g, int blocks_in, int blocks_out, LinearMap&& f) {
    std::vector<Eigen::Triplet<double>> trips;
    probe_stencil_map(g, blocks_in, blocks_out, std::forward<LinearMap>(f),
                      [&](int r, int c, double v) { trips.emplace_back(r, c, v); });
    const int n = g.cells();
    SpMat m(blocks_out * n, blocks_in * n);
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    return m;
}

/// Computes f^T y without forming the matrix of f.
template <class LinearMap>
Vec transpose_apply_stencil_map(const GridSpec& g, int blocks_in, int blocks_out, LinearMap&& f,
                                Eigen::Ref<const Vec> y) {
    Vec out = Vec::Zero(blocks_in * g.cells());
    probe_stencil_map(g, blocks_in, blocks_out, std::forward<LinearMap>(f),
                      [&](int r, int c, double v) { out[c] += v * y[r]; });
    return out;
}

}  // namespace semicomp
