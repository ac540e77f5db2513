#pragma once

// Integration of grid fields over gauge pseudo-balls B_r, with the weight
// family used by the frequency machinery, plus a seeded Monte Carlo
// estimator used as an independent cross-check.
//
// Grid rule: cells are included by a center test (rho < r). Cells whose
// center lies within 1.5 * max(h_k) of the sphere {rho = r} are subsampled
// on a 3-per-axis sub-lattice with partial inclusion: the field value is
// held at the cell's node, the weight is evaluated analytically at each
// sub-center, and only sub-cells with rho < r contribute. The weighted
// kinds vanish on {rho = r}, which kills the boundary layer; the plain and
// psi kinds rely on the subsampling for their boundary resolution.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "grushin/grid.hpp"

namespace grushin {

/// Weight of the integrand over B_r.
struct WeightSpec {
    enum class Kind {
        plain,      // 1
        psi,        // psi
        psi_alpha,  // psi * (r^2 - rho^2)^alpha
        pow_alpha1  // (r^2 - rho^2)^(alpha + 1)
    };
    Kind kind = Kind::plain;
    double alpha = 0.0;

    static WeightSpec plain() { return {Kind::plain, 0.0}; }
    static WeightSpec psi() { return {Kind::psi, 0.0}; }
    static WeightSpec psi_alpha(double a) { return {Kind::psi_alpha, a}; }
    static WeightSpec pow_alpha1(double a) { return {Kind::pow_alpha1, a}; }

    void validate() const {
        if (!(alpha >= 0.0) || !std::isfinite(alpha))
            throw std::invalid_argument("WeightSpec: alpha must be finite and >= 0");
    }

    double evaluate(double rho, double psi, double r) const {
        switch (kind) {
            case Kind::plain: return 1.0;
            case Kind::psi: return psi;
            case Kind::psi_alpha: {
                const double t = r * r - rho * rho;
                return t <= 0.0 ? 0.0 : psi * std::pow(t, alpha);
            }
            case Kind::pow_alpha1: {
                const double t = r * r - rho * rho;
                return t <= 0.0 ? 0.0 : std::pow(t, alpha + 1.0);
            }
        }
        return 0.0;
    }
};

struct QuadratureResult {
    double value = 0.0;
    double std_error = 0.0;  // 0 for deterministic grid sums
    int64_t cells_used = 0;
    int64_t boundary_cells_subsampled = 0;
};

/// What to do when the ball (plus its half-cell margin) pokes past the
/// field's valid band. strict: refuse. clip_to_mask: integrate over the
/// valid part only (used for the unit-ball norms whose domain exceeds a
/// doubly-shrunk mask by a boundary sliver at coarse resolution).
enum class BallClip { strict, clip_to_mask };

namespace detail {

struct BallBox {
    std::array<int, kMaxDim> lo{};
    std::array<int, kMaxDim> hi{};
    std::array<int64_t, kMaxDim> box_strides{};
    int64_t cell_total = 0;
};

/// Index box of cells whose centers may interact with B_r (reach = r plus
/// the subsample band), clipped to the valid band. In strict mode, demands
/// that every cell that can intersect {rho < r} (reach r + h/2) is valid.
inline BallBox ball_index_box(const Grid& g, int band, double r, BallClip clip) {
    const double margin = 1.5 * g.max_spacing();
    const double b1 = g.params.beta + 1.0;
    BallBox box;
    int64_t total = 1;
    for (int k = 0; k < g.dim(); ++k) {
        const Axis& ax = g.axes[static_cast<std::size_t>(k)];
        const bool is_x = k < g.params.m;
        const double visit_reach =
            is_x ? r + margin : std::pow(r + margin, b1) / b1;
        const double need_reach =
            (is_x ? r : std::pow(r, b1) / b1) + 0.5 * ax.h;
        auto [va, vb] = g.valid_range(k, band);
        if (va > vb) throw std::domain_error("ball_integral: validity band empty");
        if (clip == BallClip::strict) {
            if (ax.coord(va) > -need_reach || ax.coord(vb) < need_reach)
                throw std::domain_error("ball_integral: ball exits the field's valid region");
        }
        int a = va, b = vb;
        while (a < b && ax.coord(a) < -visit_reach) ++a;
        while (b > a && ax.coord(b) > visit_reach) --b;
        box.lo[static_cast<std::size_t>(k)] = a;
        box.hi[static_cast<std::size_t>(k)] = b;
        total *= (b - a + 1);
    }
    for (int k = g.dim() - 1; k >= 0; --k) {
        box.box_strides[static_cast<std::size_t>(k)] =
            (k == g.dim() - 1) ? 1
                               : box.box_strides[static_cast<std::size_t>(k + 1)] *
                                     (box.hi[static_cast<std::size_t>(k + 1)] -
                                      box.lo[static_cast<std::size_t>(k + 1)] + 1);
    }
    box.cell_total = total;
    return box;
}

}  // namespace detail

/// Deterministic weighted sum of f over the pseudo-ball B_r.
inline QuadratureResult ball_integral(const ScalarField& f, double r, WeightSpec w,
                                      BallClip clip = BallClip::strict) {
    if (!(r > 0.0)) throw std::invalid_argument("ball_integral: radius must be positive");
    w.validate();
    const Grid& g = *f.grid;
    const detail::BallBox box = detail::ball_index_box(g, f.band, r, clip);
    const int d = g.dim();
    const double band_width = 1.5 * g.max_spacing();
    const double vol = g.cell_volume();
    const double subvol = vol / std::pow(3.0, d);
    const int m = g.params.m;
    const GrushinParams params = g.params;

    const int64_t chunks = grushin::detail::chunk_count(box.cell_total, worker_count());
    struct Part {
        double value = 0.0;
        int64_t cells = 0;
        int64_t band_cells = 0;
    };
    std::vector<Part> parts(static_cast<std::size_t>(std::max<int64_t>(chunks, 1)));

    grushin::detail::run_chunks(chunks, worker_count(), [&](int64_t c) {
        auto [c_lo, c_hi] = grushin::detail::chunk_range(box.cell_total, chunks, c);
        Part acc;
        std::array<int, kMaxDim> multi{};
        std::array<double, kMaxDim> center{};
        for (int64_t flat = c_lo; flat < c_hi; ++flat) {
            int64_t rem = flat;
            int64_t idx = 0;
            for (int k = 0; k < d; ++k) {
                const int mk = static_cast<int>(rem / box.box_strides[static_cast<std::size_t>(k)]);
                rem -= static_cast<int64_t>(mk) * box.box_strides[static_cast<std::size_t>(k)];
                multi[static_cast<std::size_t>(k)] = box.lo[static_cast<std::size_t>(k)] + mk;
                idx += static_cast<int64_t>(multi[static_cast<std::size_t>(k)]) *
                       g.strides[static_cast<std::size_t>(k)];
            }
            const double rho_c = g.rho[static_cast<std::size_t>(idx)];
            if (rho_c >= r + band_width) continue;
            if (rho_c < r - band_width) {
                acc.value += f[idx] * w.evaluate(rho_c, g.psi[static_cast<std::size_t>(idx)], r) * vol;
                acc.cells += 1;
                continue;
            }
            // Boundary band: 3^d sub-lattice with partial inclusion.
            acc.band_cells += 1;
            for (int k = 0; k < d; ++k)
                center[static_cast<std::size_t>(k)] = g.coord(k, multi[static_cast<std::size_t>(k)]);
            double wsum = 0.0;
            std::array<int, kMaxDim> sub{};
            for (;;) {
                double xn2 = 0.0, yn2 = 0.0;
                for (int k = 0; k < d; ++k) {
                    const double ck = center[static_cast<std::size_t>(k)] +
                                      (sub[static_cast<std::size_t>(k)] - 1) *
                                          g.axes[static_cast<std::size_t>(k)].h / 3.0;
                    if (k < m) xn2 += ck * ck;
                    else yn2 += ck * ck;
                }
                const double rho_s = grushin::detail::rho_from_sq_norms(params, xn2, yn2);
                if (rho_s < r)
                    wsum += w.evaluate(rho_s, grushin::detail::psi_from_sq_norms(params, xn2, rho_s), r);
                int k = d - 1;
                for (; k >= 0; --k) {
                    if (sub[static_cast<std::size_t>(k)] < 2) {
                        ++sub[static_cast<std::size_t>(k)];
                        break;
                    }
                    sub[static_cast<std::size_t>(k)] = 0;
                }
                if (k < 0) break;
            }
            if (wsum != 0.0) {
                acc.value += f[idx] * wsum * subvol;
                acc.cells += 1;
            }
        }
        parts[static_cast<std::size_t>(c)] = acc;
    });

    QuadratureResult out;
    for (const Part& p : parts) {
        out.value += p.value;
        out.cells_used += p.cells;
        out.boundary_cells_subsampled += p.band_cells;
    }
    return out;
}

namespace detail {

inline uint64_t splitmix64(uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Uniform double in [0, 1) from the top 53 bits; portable across stdlibs.
inline double uniform01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Monte Carlo estimate of the weighted ball integral of a point callable,
/// by rejection sampling uniform points in the bounding box of B_r.
/// Runs on a fixed set of 16 seeded streams recombined in stream order, so
/// the result depends only on (seed, samples), not on the worker count.
template <class G>
QuadratureResult mc_ball_integral(G&& g, const GrushinParams& params, double r,
                                  WeightSpec w, int64_t samples, uint64_t seed) {
    if (!(r > 0.0)) throw std::invalid_argument("mc_ball_integral: radius must be positive");
    if (samples < 10000)
        throw std::invalid_argument("mc_ball_integral: at least 1e4 samples required");
    w.validate();
    params.validate();
    const int m = params.m, n = params.n, d = params.dim();
    const double b1 = params.beta + 1.0;
    const double rx = r;
    const double ry = std::pow(r, b1) / b1;
    double boxvol = 1.0;
    for (int i = 0; i < m; ++i) boxvol *= 2.0 * rx;
    for (int j = 0; j < n; ++j) boxvol *= 2.0 * ry;

    constexpr int kStreams = 16;
    struct Part {
        double sum = 0.0, sumsq = 0.0;
        int64_t accepted = 0;
    };
    std::array<Part, kStreams> parts;
    std::array<int64_t, kStreams> counts{};
    for (int s = 0; s < kStreams; ++s)
        counts[static_cast<std::size_t>(s)] = samples / kStreams + (s < samples % kStreams ? 1 : 0);

    grushin::detail::run_chunks(kStreams, worker_count(), [&](int64_t s) {
        uint64_t mix = seed;
        for (int64_t i = 0; i <= s; ++i) detail::splitmix64(mix);
        std::mt19937_64 eng(detail::splitmix64(mix));
        Part acc;
        std::vector<double> xs(static_cast<std::size_t>(m)), ys(static_cast<std::size_t>(n));
        for (int64_t i = 0; i < counts[static_cast<std::size_t>(s)]; ++i) {
            double xn2 = 0.0, yn2 = 0.0;
            for (int k = 0; k < m; ++k) {
                xs[static_cast<std::size_t>(k)] = (2.0 * detail::uniform01(eng) - 1.0) * rx;
                xn2 += xs[static_cast<std::size_t>(k)] * xs[static_cast<std::size_t>(k)];
            }
            for (int k = 0; k < n; ++k) {
                ys[static_cast<std::size_t>(k)] = (2.0 * detail::uniform01(eng) - 1.0) * ry;
                yn2 += ys[static_cast<std::size_t>(k)] * ys[static_cast<std::size_t>(k)];
            }
            const double rho = grushin::detail::rho_from_sq_norms(params, xn2, yn2);
            double v = 0.0;
            if (rho < r) {
                const double psi = grushin::detail::psi_from_sq_norms(params, xn2, rho);
                v = g(std::span<const double>(xs), std::span<const double>(ys)) *
                    w.evaluate(rho, psi, r);
                acc.accepted += 1;
            }
            acc.sum += v;
            acc.sumsq += v * v;
        }
        parts[static_cast<std::size_t>(s)] = acc;
    });

    double sum = 0.0, sumsq = 0.0;
    int64_t accepted = 0;
    for (const Part& p : parts) {
        sum += p.sum;
        sumsq += p.sumsq;
        accepted += p.accepted;
    }
    if (accepted < samples / 1000)
        throw std::runtime_error("mc_ball_integral: acceptance rate below 1e-3 (degenerate box)");

    const double nd = static_cast<double>(samples);
    const double mean = sum / nd;
    const double var = std::max(0.0, (sumsq / nd - mean * mean) / (nd - 1.0));
    QuadratureResult out;
    out.value = boxvol * mean;
    out.std_error = boxvol * std::sqrt(var);
    out.cells_used = accepted;
    (void)d;
    return out;
}

}  // namespace grushin
