#pragma once

// Second-order finite-difference realizations of the Grushin frame fields:
// gradient, divergence, Laplacian, bi-Laplacian, the dilation generator, and
// the frame/generator commutator. Every operator is a pure map producing a
// fresh field whose validity band is one stencil radius tighter than its
// input. No one-sided stencils: derived fields simply live on a shrunk
// interior.

#include <cmath>
#include <stdexcept>

#include "grushin/grid.hpp"

namespace grushin {

namespace detail {

inline void require_band(const ScalarField& f, const char* op) {
    const Grid& g = *f.grid;
    for (int k = 0; k < g.dim(); ++k) {
        auto [a, b] = g.valid_range(k, f.band + 1);
        if (a > b) throw std::invalid_argument(std::string(op) + ": grid too small for stencil");
    }
}

}  // namespace detail

/// Frame gradient X f = (d_{x_1} f, ..., d_{x_m} f, |x|^b d_{y_1} f, ...).
inline VectorField x_gradient(const ScalarField& f) {
    detail::require_band(f, "x_gradient");
    const Grid& g = *f.grid;
    const int d = g.dim(), m = g.params.m;
    VectorField out(f.grid, f.band + 1);
    parallel_for_valid_node(g, out.band, [&](int64_t idx, std::span<const int> multi) {
        const double xb = g.xpow_b[static_cast<std::size_t>(g.x_sub_index(multi))];
        for (int k = 0; k < d; ++k) {
            const int64_t s = g.strides[static_cast<std::size_t>(k)];
            const double inv2h = 0.5 / g.axes[static_cast<std::size_t>(k)].h;
            double der = (f[idx + s] - f[idx - s]) * inv2h;
            if (k >= m) der *= xb;
            out.comps[static_cast<std::size_t>(k)][static_cast<std::size_t>(idx)] = der;
        }
    });
    return out;
}

/// Frame divergence div_X F = sum_i X_i F_i.
inline ScalarField x_divergence(const VectorField& F) {
    const Grid& g = *F.grid;
    const int d = g.dim(), m = g.params.m;
    ScalarField out(F.grid, F.band + 1);
    for (int k = 0; k < d; ++k) {
        auto [a, b] = g.valid_range(k, out.band);
        if (a > b) throw std::invalid_argument("x_divergence: validity band exhausted");
    }
    parallel_for_valid_node(g, out.band, [&](int64_t idx, std::span<const int> multi) {
        const double xb = g.xpow_b[static_cast<std::size_t>(g.x_sub_index(multi))];
        double acc = 0.0;
        for (int k = 0; k < d; ++k) {
            const int64_t s = g.strides[static_cast<std::size_t>(k)];
            const double inv2h = 0.5 / g.axes[static_cast<std::size_t>(k)].h;
            const auto& c = F.comps[static_cast<std::size_t>(k)];
            double der = (c[static_cast<std::size_t>(idx + s)] - c[static_cast<std::size_t>(idx - s)]) * inv2h;
            if (k >= m) der *= xb;
            acc += der;
        }
        out[idx] = acc;
    });
    return out;
}

/// Degenerate Laplacian  L f = Delta_x f + |x|^(2 b) Delta_y f, as a direct
/// 3-point-per-axis stencil (one band shrink; the div(grad) composition is
/// kept as a cross-check, not as the canonical operator).
inline ScalarField grushin_laplacian(const ScalarField& f) {
    detail::require_band(f, "grushin_laplacian");
    const Grid& g = *f.grid;
    const int d = g.dim(), m = g.params.m;
    ScalarField out(f.grid, f.band + 1);
    parallel_for_valid_node(g, out.band, [&](int64_t idx, std::span<const int> multi) {
        const double x2b = g.xpow_2b[static_cast<std::size_t>(g.x_sub_index(multi))];
        double acc = 0.0;
        for (int k = 0; k < d; ++k) {
            const int64_t s = g.strides[static_cast<std::size_t>(k)];
            const double invh2 = 1.0 / (g.axes[static_cast<std::size_t>(k)].h *
                                        g.axes[static_cast<std::size_t>(k)].h);
            double dd = (f[idx + s] - 2.0 * f[idx] + f[idx - s]) * invh2;
            if (k >= m) dd *= x2b;
            acc += dd;
        }
        out[idx] = acc;
    });
    return out;
}

/// L applied twice (two band shrinks).
inline ScalarField grushin_bilaplacian(const ScalarField& f) {
    return grushin_laplacian(grushin_laplacian(f));
}

/// Dilation generator  Z f = sum_i x_i d_{x_i} f + (b+1) sum_j y_j d_{y_j} f.
inline ScalarField z_derivative(const ScalarField& f) {
    detail::require_band(f, "z_derivative");
    const Grid& g = *f.grid;
    const int d = g.dim(), m = g.params.m;
    const double b1 = g.params.beta + 1.0;
    ScalarField out(f.grid, f.band + 1);
    parallel_for_valid_node(g, out.band, [&](int64_t idx, std::span<const int> multi) {
        double acc = 0.0;
        for (int k = 0; k < d; ++k) {
            const int64_t s = g.strides[static_cast<std::size_t>(k)];
            const double inv2h = 0.5 / g.axes[static_cast<std::size_t>(k)].h;
            const double coeff = (k < m) ? g.coord(k, multi[k]) : b1 * g.coord(k, multi[k]);
            acc += coeff * (f[idx + s] - f[idx - s]) * inv2h;
        }
        out[idx] = acc;
    });
    return out;
}

/// Single frame derivative X_i f (i is 0-based; i >= m picks up the |x|^b
/// factor). Used by the commutator check.
inline ScalarField x_derivative(const ScalarField& f, int i) {
    const Grid& g = *f.grid;
    if (i < 0 || i >= g.dim()) throw std::invalid_argument("x_derivative: index out of range");
    detail::require_band(f, "x_derivative");
    const int m = g.params.m;
    ScalarField out(f.grid, f.band + 1);
    const int64_t s = g.strides[static_cast<std::size_t>(i)];
    const double inv2h = 0.5 / g.axes[static_cast<std::size_t>(i)].h;
    parallel_for_valid_node(g, out.band, [&](int64_t idx, std::span<const int> multi) {
        double der = (f[idx + s] - f[idx - s]) * inv2h;
        if (i >= m) der *= g.xpow_b[static_cast<std::size_t>(g.x_sub_index(multi))];
        out[idx] = der;
    });
    return out;
}

/// Residual of the commutator identity [X_i, Z] f = X_i f, i.e.
/// (X_i Z - Z X_i) f - X_i f on the doubly shrunk band. O(h^2) on smooth f.
inline ScalarField commutator_residual(const ScalarField& f, int i) {
    const Grid& g = *f.grid;
    if (i < 0 || i >= g.dim())
        throw std::invalid_argument("commutator_residual: index out of range");
    ScalarField xi_zf = x_derivative(z_derivative(f), i);
    ScalarField z_xif = z_derivative(x_derivative(f, i));
    ScalarField xif = x_derivative(f, i);
    ScalarField out(f.grid, f.band + 2);
    parallel_for_valid_node(g, out.band, [&](int64_t idx, std::span<const int>) {
        out[idx] = xi_zf[idx] - z_xif[idx] - xif[idx];
    });
    return out;
}

/// Pointwise squared length |F|^2 of a vector field.
inline ScalarField squared_length(const VectorField& F) {
    const Grid& g = *F.grid;
    ScalarField out(F.grid, F.band);
    parallel_for_valid_node(g, out.band, [&](int64_t idx, std::span<const int>) {
        double s = 0.0;
        for (const auto& c : F.comps) {
            const double v = c[static_cast<std::size_t>(idx)];
            s += v * v;
        }
        out[idx] = s;
    });
    return out;
}

/// Pointwise combination out = fn(a, b) on the common band.
template <class Fn>
ScalarField combine(const ScalarField& a, const ScalarField& b, Fn&& fn) {
    if (!a.grid->same_layout(*b.grid))
        throw std::invalid_argument("combine: fields on different grids");
    ScalarField out(a.grid, std::max(a.band, b.band));
    parallel_for_valid_node(*a.grid, out.band, [&](int64_t idx, std::span<const int>) {
        out[idx] = fn(a[idx], b[idx]);
    });
    return out;
}

/// Pointwise map out = fn(a) on a's band.
template <class Fn>
ScalarField map_field(const ScalarField& a, Fn&& fn) {
    ScalarField out(a.grid, a.band);
    parallel_for_valid_node(*a.grid, out.band, [&](int64_t idx, std::span<const int>) {
        out[idx] = fn(a[idx]);
    });
    return out;
}

}  // namespace grushin
