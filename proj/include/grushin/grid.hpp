#pragma once

// Cell-centered tensor grids on boxes, plus the scalar/vector fields living
// on them. Nodes sit at cell centers; derived fields live on a shrunk
// interior controlled by a validity band (the band counts how many node
// layers at the boundary are invalid).
//
// When a box straddles 0 with an odd cell count, the natural center lattice
// would place nodes exactly on {x_k = 0}, where the angle function vanishes
// and 1/|x|^2 integrands blow up. Axes in the x-block therefore shift their
// node lattice by half a cell in that case, keeping counts and spacing while
// guaranteeing that no node touches the characteristic manifold.

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "grushin/geometry.hpp"
#include "grushin/parallel.hpp"

namespace grushin {

inline constexpr int kMaxDim = 12;

struct Axis {
    double lo = 0.0;
    double hi = 0.0;
    int count = 0;
    double h = 0.0;       // cell width
    double origin = 0.0;  // node k sits at origin + k * h
    bool shifted = false; // half-cell lattice shift applied (see header note)

    double coord(int k) const { return origin + h * static_cast<double>(k); }
};

class Grid {
  public:
    GrushinParams params;
    std::vector<Axis> axes;          // size m + n; x-axes first
    std::vector<int64_t> strides;    // row-major, last axis contiguous
    int64_t node_count = 0;

    // Per-node caches of the gauge geometry (computed once; grids are
    // immutable after construction).
    std::vector<double> rho;      // pseudo-gauge at each node
    std::vector<double> psi;      // angle function at each node
    std::vector<double> xpow_b;   // |x|^beta, indexed by the x-sublattice
    std::vector<double> xpow_2b;  // |x|^(2 beta), same indexing
    std::vector<int64_t> xstrides;

    static std::shared_ptr<const Grid> make(const GrushinParams& p,
                                            std::span<const double> lo,
                                            std::span<const double> hi,
                                            std::span<const int> counts) {
        p.validate();
        const int d = p.dim();
        if (static_cast<int>(lo.size()) != d || static_cast<int>(hi.size()) != d ||
            static_cast<int>(counts.size()) != d)
            throw std::invalid_argument("Grid: bounds/counts must have length m + n");
        if (d > kMaxDim) throw std::invalid_argument("Grid: dimension too large");

        auto g = std::make_shared<Grid>();
        g->params = p;
        g->axes.resize(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) {
            if (counts[k] < 8)
                throw std::invalid_argument("Grid: at least 8 cells per axis required");
            if (!(hi[k] > lo[k]))
                throw std::invalid_argument("Grid: upper bound must exceed lower bound");
            Axis& ax = g->axes[static_cast<std::size_t>(k)];
            ax.lo = lo[k];
            ax.hi = hi[k];
            ax.count = counts[k];
            ax.h = (hi[k] - lo[k]) / static_cast<double>(counts[k]);
            ax.origin = lo[k] + 0.5 * ax.h;
            // x-axes only: dodge the characteristic manifold.
            if (k < p.m && lattice_hits_zero(ax)) {
                ax.origin += 0.5 * ax.h;
                ax.shifted = true;
            }
        }
        g->strides.assign(static_cast<std::size_t>(d), 1);
        for (int k = d - 2; k >= 0; --k)
            g->strides[static_cast<std::size_t>(k)] =
                g->strides[static_cast<std::size_t>(k + 1)] * g->axes[static_cast<std::size_t>(k + 1)].count;
        g->node_count = g->strides[0] * g->axes[0].count;
        g->build_caches();
        return g;
    }

    /// Uniform box shorthand: same bounds and count on every axis.
    static std::shared_ptr<const Grid> make_uniform(const GrushinParams& p, double lo,
                                                    double hi, int cells) {
        std::vector<double> los(static_cast<std::size_t>(p.dim()), lo);
        std::vector<double> his(static_cast<std::size_t>(p.dim()), hi);
        std::vector<int> counts(static_cast<std::size_t>(p.dim()), cells);
        return make(p, los, his, counts);
    }

    int dim() const { return params.dim(); }
    double coord(int axis, int idx) const { return axes[static_cast<std::size_t>(axis)].coord(idx); }

    double max_spacing() const {
        double h = 0.0;
        for (const Axis& ax : axes) h = std::max(h, ax.h);
        return h;
    }

    double cell_volume() const {
        double v = 1.0;
        for (const Axis& ax : axes) v *= ax.h;
        return v;
    }

    /// Valid index range on an axis for a given band.
    std::pair<int, int> valid_range(int axis, int band) const {
        const Axis& ax = axes[static_cast<std::size_t>(axis)];
        return {band, ax.count - 1 - band};
    }

    /// Coordinate extent [min, max] of valid nodes on an axis for a band.
    std::pair<double, double> valid_extent(int axis, int band) const {
        auto [a, b] = valid_range(axis, band);
        if (a > b) return {0.0, -1.0};
        const Axis& ax = axes[static_cast<std::size_t>(axis)];
        return {ax.coord(a), ax.coord(b)};
    }

    /// Decodes a linear node index into per-axis indices.
    void decode(int64_t idx, std::span<int> multi) const {
        const int d = dim();
        for (int k = 0; k < d; ++k) {
            multi[k] = static_cast<int>(idx / strides[static_cast<std::size_t>(k)]);
            idx -= static_cast<int64_t>(multi[k]) * strides[static_cast<std::size_t>(k)];
        }
    }

    void node_point(std::span<const int> multi, std::span<double> x, std::span<double> y) const {
        for (int i = 0; i < params.m; ++i) x[i] = coord(i, multi[i]);
        for (int j = 0; j < params.n; ++j) y[j] = coord(params.m + j, multi[params.m + j]);
    }

    int64_t x_sub_index(std::span<const int> multi) const {
        int64_t s = 0;
        for (int i = 0; i < params.m; ++i)
            s += static_cast<int64_t>(multi[i]) * xstrides[static_cast<std::size_t>(i)];
        return s;
    }

    bool same_layout(const Grid& other) const {
        if (params.m != other.params.m || params.n != other.params.n ||
            params.beta != other.params.beta)
            return false;
        for (std::size_t k = 0; k < axes.size(); ++k)
            if (axes[k].count != other.axes[k].count || axes[k].lo != other.axes[k].lo ||
                axes[k].hi != other.axes[k].hi)
                return false;
        return true;
    }

  private:
    static bool lattice_hits_zero(const Axis& ax) {
        if (!(ax.lo < 0.0 && ax.hi > 0.0)) return false;
        const double steps = -ax.lo / ax.h - 0.5;  // node index that would land on 0
        const double nearest = std::round(steps);
        return nearest >= 0.0 && nearest < static_cast<double>(ax.count) &&
               std::abs(steps - nearest) < 1e-9;
    }

    void build_caches() {
        const int d = dim();
        const int m = params.m;
        // x-sublattice strides and |x|^beta tables.
        xstrides.assign(static_cast<std::size_t>(m), 1);
        for (int k = m - 2; k >= 0; --k)
            xstrides[static_cast<std::size_t>(k)] =
                xstrides[static_cast<std::size_t>(k + 1)] * axes[static_cast<std::size_t>(k + 1)].count;
        int64_t xcount = xstrides[0] * axes[0].count;
        xpow_b.resize(static_cast<std::size_t>(xcount));
        xpow_2b.resize(static_cast<std::size_t>(xcount));
        {
            std::array<int, kMaxDim> mi{};
            for (int64_t s = 0; s < xcount; ++s) {
                int64_t rem = s;
                double xn2 = 0.0;
                for (int i = 0; i < m; ++i) {
                    mi[static_cast<std::size_t>(i)] =
                        static_cast<int>(rem / xstrides[static_cast<std::size_t>(i)]);
                    rem -= static_cast<int64_t>(mi[static_cast<std::size_t>(i)]) *
                           xstrides[static_cast<std::size_t>(i)];
                    const double c = coord(i, mi[static_cast<std::size_t>(i)]);
                    xn2 += c * c;
                }
                xpow_b[static_cast<std::size_t>(s)] = std::pow(xn2, 0.5 * params.beta);
                xpow_2b[static_cast<std::size_t>(s)] = std::pow(xn2, params.beta);
            }
        }
        // Full-node rho and psi tables.
        rho.resize(static_cast<std::size_t>(node_count));
        psi.resize(static_cast<std::size_t>(node_count));
        const GrushinParams p = params;
        parallel_for_chunks(node_count, [&](int64_t lo_i, int64_t hi_i) {
            std::array<int, kMaxDim> multi{};
            for (int64_t idx = lo_i; idx < hi_i; ++idx) {
                decode(idx, std::span<int>(multi.data(), static_cast<std::size_t>(d)));
                double xn2 = 0.0, yn2 = 0.0;
                for (int i = 0; i < m; ++i) {
                    const double c = coord(i, multi[static_cast<std::size_t>(i)]);
                    xn2 += c * c;
                }
                for (int j = m; j < d; ++j) {
                    const double c = coord(j, multi[static_cast<std::size_t>(j)]);
                    yn2 += c * c;
                }
                const double r = detail::rho_from_sq_norms(p, xn2, yn2);
                rho[static_cast<std::size_t>(idx)] = r;
                psi[static_cast<std::size_t>(idx)] = detail::psi_from_sq_norms(p, xn2, r);
            }
        });
    }
};

using GridPtr = std::shared_ptr<const Grid>;

/// Scalar values per node, valid on the interior band `band`.
struct ScalarField {
    GridPtr grid;
    int band = 0;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(GridPtr g, int b = 0)
        : grid(std::move(g)), band(b),
          values(static_cast<std::size_t>(grid->node_count), 0.0) {}

    double& operator[](int64_t i) { return values[static_cast<std::size_t>(i)]; }
    double operator[](int64_t i) const { return values[static_cast<std::size_t>(i)]; }
};

/// One component array per frame direction (m + n of them).
struct VectorField {
    GridPtr grid;
    int band = 0;
    std::vector<std::vector<double>> comps;

    VectorField() = default;
    explicit VectorField(GridPtr g, int b = 0) : grid(std::move(g)), band(b) {
        comps.assign(static_cast<std::size_t>(grid->dim()),
                     std::vector<double>(static_cast<std::size_t>(grid->node_count), 0.0));
    }
};

namespace detail {

/// Iterates all nodes whose per-axis indices lie in [lo_k, hi_k], calling
/// f(linear_index, multi_index). Single-threaded odometer.
template <class F>
void for_each_box(const Grid& g, std::span<const int> lo, std::span<const int> hi, F&& f) {
    const int d = g.dim();
    std::array<int, kMaxDim> multi{};
    for (int k = 0; k < d; ++k) {
        if (lo[k] > hi[k]) return;
        multi[static_cast<std::size_t>(k)] = lo[k];
    }
    int64_t idx = 0;
    for (int k = 0; k < d; ++k)
        idx += static_cast<int64_t>(lo[k]) * g.strides[static_cast<std::size_t>(k)];
    for (;;) {
        f(idx, std::span<const int>(multi.data(), static_cast<std::size_t>(d)));
        int k = d - 1;
        for (; k >= 0; --k) {
            if (multi[static_cast<std::size_t>(k)] < hi[k]) {
                ++multi[static_cast<std::size_t>(k)];
                idx += g.strides[static_cast<std::size_t>(k)];
                break;
            }
            idx -= static_cast<int64_t>(multi[static_cast<std::size_t>(k)] - lo[k]) *
                   g.strides[static_cast<std::size_t>(k)];
            multi[static_cast<std::size_t>(k)] = lo[k];
        }
        if (k < 0) break;
    }
}

}  // namespace detail

/// Iterates the valid nodes of a band, f(linear_index, multi_index).
template <class F>
void for_each_valid_node(const Grid& g, int band, F&& f) {
    const int d = g.dim();
    std::array<int, kMaxDim> lo{}, hi{};
    for (int k = 0; k < d; ++k) {
        auto [a, b] = g.valid_range(k, band);
        if (a > b) return;
        lo[static_cast<std::size_t>(k)] = a;
        hi[static_cast<std::size_t>(k)] = b;
    }
    detail::for_each_box(g, std::span<const int>(lo.data(), static_cast<std::size_t>(d)),
                         std::span<const int>(hi.data(), static_cast<std::size_t>(d)), f);
}

/// Parallel variant of for_each_valid_node: slabs along axis 0 are handed to
/// the worker pool. The body must be safe to run on disjoint nodes.
template <class F>
void parallel_for_valid_node(const Grid& g, int band, F&& f) {
    const int d = g.dim();
    std::array<int, kMaxDim> lo{}, hi{};
    for (int k = 0; k < d; ++k) {
        auto [a, b] = g.valid_range(k, band);
        if (a > b) return;
        lo[static_cast<std::size_t>(k)] = a;
        hi[static_cast<std::size_t>(k)] = b;
    }
    const int a0 = lo[0], b0 = hi[0];
    parallel_for_chunks(static_cast<int64_t>(b0 - a0 + 1), [&](int64_t s_lo, int64_t s_hi) {
        std::array<int, kMaxDim> blo = lo, bhi = hi;
        blo[0] = a0 + static_cast<int>(s_lo);
        bhi[0] = a0 + static_cast<int>(s_hi) - 1;
        detail::for_each_box(g, std::span<const int>(blo.data(), static_cast<std::size_t>(d)),
                             std::span<const int>(bhi.data(), static_cast<std::size_t>(d)), f);
    });
}

/// Samples a callable f(x, y) -> double at every node (band 0).
template <class F>
ScalarField sample(GridPtr g, F&& f) {
    ScalarField out(g, 0);
    const int d = g->dim();
    const int m = g->params.m, n = g->params.n;
    parallel_for_chunks(g->node_count, [&](int64_t lo_i, int64_t hi_i) {
        std::array<int, kMaxDim> multi{};
        std::array<double, kMaxDim> xs{}, ys{};
        for (int64_t idx = lo_i; idx < hi_i; ++idx) {
            g->decode(idx, std::span<int>(multi.data(), static_cast<std::size_t>(d)));
            g->node_point(std::span<const int>(multi.data(), static_cast<std::size_t>(d)),
                          std::span<double>(xs.data(), static_cast<std::size_t>(m)),
                          std::span<double>(ys.data(), static_cast<std::size_t>(n)));
            out[idx] = f(std::span<const double>(xs.data(), static_cast<std::size_t>(m)),
                         std::span<const double>(ys.data(), static_cast<std::size_t>(n)));
        }
    });
    return out;
}

/// Max  |f| over the valid band (0 when the band is empty).
inline double max_abs(const ScalarField& f) {
    double mx = 0.0;
    for_each_valid_node(*f.grid, f.band, [&](int64_t idx, std::span<const int>) {
        mx = std::max(mx, std::abs(f[idx]));
    });
    return mx;
}

/// Max |f - g| over the shared valid band.
inline double max_abs_diff(const ScalarField& f, const ScalarField& g) {
    if (!f.grid->same_layout(*g.grid))
        throw std::invalid_argument("max_abs_diff: fields on different grids");
    const int band = std::max(f.band, g.band);
    double mx = 0.0;
    for_each_valid_node(*f.grid, band, [&](int64_t idx, std::span<const int>) {
        mx = std::max(mx, std::abs(f[idx] - g[idx]));
    });
    return mx;
}

}  // namespace grushin
