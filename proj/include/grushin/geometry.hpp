#pragma once

// Closed-form evaluation of the anisotropic Baouendi-Grushin geometry:
// pseudo-gauge, angle function, dilations, gradient of the gauge, dilation
// generator coefficients, and the fundamental solution of the degenerate
// Laplacian  L = Delta_x + |x|^(2*beta) * Delta_y  on R^m x R^n.
//
// All functions here are pure and allocation-free per point (span-based
// cores with Point convenience wrappers).

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace grushin {

/// Family parameters: x-block dimension m, y-block dimension n, and the
/// anisotropy exponent beta in (0, 1].
struct GrushinParams {
    int m = 1;
    int n = 1;
    double beta = 1.0;

    /// Homogeneous dimension Q = m + (beta+1)*n that governs volume scaling
    /// of pseudo-balls under the anisotropic dilations.
    double Q() const { return static_cast<double>(m) + (beta + 1.0) * static_cast<double>(n); }

    int dim() const { return m + n; }

    void validate() const {
        if (m < 1) throw std::invalid_argument("GrushinParams: m must be >= 1");
        if (n < 1) throw std::invalid_argument("GrushinParams: n must be >= 1");
        if (!(beta > 0.0) || !(beta <= 1.0))
            throw std::invalid_argument("GrushinParams: beta must lie in (0, 1]");
    }
};

/// A point z = (x, y) in R^m x R^n.
struct Point {
    std::vector<double> x;
    std::vector<double> y;

    Point() = default;
    Point(std::vector<double> x_, std::vector<double> y_)
        : x(std::move(x_)), y(std::move(y_)) {}
};

namespace detail {

inline double sq_norm(std::span<const double> v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return s;
}

inline void check_dims(const GrushinParams& p, std::span<const double> x,
                       std::span<const double> y, const char* where) {
    if (static_cast<int>(x.size()) != p.m || static_cast<int>(y.size()) != p.n)
        throw std::invalid_argument(std::string(where) + ": point dimensions do not match (m, n)");
}

/// rho from the squared block norms; the workhorse for grid caches.
inline double rho_from_sq_norms(const GrushinParams& p, double xn2, double yn2) {
    const double b1 = p.beta + 1.0;
    const double g = std::pow(xn2, b1) + b1 * b1 * yn2;
    return std::pow(g, 1.0 / (2.0 * b1));
}

/// psi from the squared x-norm and a precomputed rho. Returns the
/// conventional value 1 at the origin (rho == 0).
inline double psi_from_sq_norms(const GrushinParams& p, double xn2, double rho) {
    if (rho == 0.0) return 1.0;
    return std::pow(xn2 / (rho * rho), p.beta);
}

}  // namespace detail

/// Pseudo-gauge rho(x, y) = (|x|^(2(beta+1)) + (beta+1)^2 |y|^2)^(1/(2(beta+1))).
/// Nonnegative; zero iff (x, y) = 0; homogeneous of degree one under dilate().
inline double pseudo_gauge(const GrushinParams& p, std::span<const double> x,
                           std::span<const double> y) {
    detail::check_dims(p, x, y, "pseudo_gauge");
    return detail::rho_from_sq_norms(p, detail::sq_norm(x), detail::sq_norm(y));
}

inline double pseudo_gauge(const GrushinParams& p, const Point& z) {
    return pseudo_gauge(p, std::span<const double>(z.x), std::span<const double>(z.y));
}

/// Angle function value plus a flag recording whether the origin convention
/// psi(0) := 1 was applied (the limit along {y = 0}; the value at the origin
/// is otherwise undefined).
struct PsiValue {
    double value = 0.0;
    bool origin_convention = false;
};

/// psi = |x|^(2 beta) / rho^(2 beta), in [0, 1]. Equals 1 on {y = 0},
/// 0 on the characteristic manifold {x = 0, y != 0}, and by convention 1
/// at the origin.
inline PsiValue angle_psi_checked(const GrushinParams& p, std::span<const double> x,
                                  std::span<const double> y) {
    detail::check_dims(p, x, y, "angle_psi");
    const double xn2 = detail::sq_norm(x);
    const double yn2 = detail::sq_norm(y);
    if (xn2 == 0.0 && yn2 == 0.0) return {1.0, true};
    const double rho = detail::rho_from_sq_norms(p, xn2, yn2);
    return {detail::psi_from_sq_norms(p, xn2, rho), false};
}

inline double angle_psi(const GrushinParams& p, std::span<const double> x,
                        std::span<const double> y) {
    return angle_psi_checked(p, x, y).value;
}

inline double angle_psi(const GrushinParams& p, const Point& z) {
    return angle_psi(p, std::span<const double>(z.x), std::span<const double>(z.y));
}

/// Anisotropic dilation delta_a(x, y) = (a x, a^(beta+1) y), a > 0.
inline Point dilate(const GrushinParams& p, double a, const Point& z) {
    detail::check_dims(p, z.x, z.y, "dilate");
    if (!(a > 0.0)) throw std::invalid_argument("dilate: scale must be positive");
    Point out = z;
    const double ay = std::pow(a, p.beta + 1.0);
    for (double& c : out.x) c *= a;
    for (double& c : out.y) c *= ay;
    return out;
}

/// Gradient of rho along the frame (d_{x_i}, |x|^beta d_{y_j}):
///   X rho = rho^-(2 beta + 1) * ( |x|^(2 beta) x , (beta+1) |x|^beta y ).
/// Its squared Euclidean norm equals angle_psi. Undefined where x = 0.
inline void x_grad_rho(const GrushinParams& p, std::span<const double> x,
                       std::span<const double> y, std::span<double> out) {
    detail::check_dims(p, x, y, "x_grad_rho");
    if (static_cast<int>(out.size()) != p.dim())
        throw std::invalid_argument("x_grad_rho: output span must have length m + n");
    const double xn2 = detail::sq_norm(x);
    if (xn2 == 0.0)
        throw std::domain_error("x_grad_rho: degenerate point (x = 0)");
    const double rho = detail::rho_from_sq_norms(p, xn2, detail::sq_norm(y));
    const double scale = std::pow(rho, -(2.0 * p.beta + 1.0));
    const double xb2 = std::pow(xn2, p.beta);        // |x|^(2 beta)
    const double xb = std::pow(xn2, 0.5 * p.beta);   // |x|^beta
    for (int i = 0; i < p.m; ++i) out[i] = scale * xb2 * x[i];
    for (int j = 0; j < p.n; ++j) out[p.m + j] = scale * (p.beta + 1.0) * xb * y[j];
}

inline std::vector<double> x_grad_rho(const GrushinParams& p, const Point& z) {
    std::vector<double> out(static_cast<std::size_t>(p.dim()));
    x_grad_rho(p, z.x, z.y, out);
    return out;
}

/// Coordinate coefficients of the dilation generator
///   Z = sum_i x_i d_{x_i} + (beta+1) sum_j y_j d_{y_j},
/// i.e. (x_1, ..., x_m, (beta+1) y_1, ..., (beta+1) y_n).
inline void z_coefficients(const GrushinParams& p, std::span<const double> x,
                           std::span<const double> y, std::span<double> out) {
    detail::check_dims(p, x, y, "z_coefficients");
    if (static_cast<int>(out.size()) != p.dim())
        throw std::invalid_argument("z_coefficients: output span must have length m + n");
    for (int i = 0; i < p.m; ++i) out[i] = x[i];
    for (int j = 0; j < p.n; ++j) out[p.m + j] = (p.beta + 1.0) * y[j];
}

inline std::vector<double> z_coefficients(const GrushinParams& p, const Point& z) {
    std::vector<double> out(static_cast<std::size_t>(p.dim()));
    z_coefficients(p, z.x, z.y, out);
    return out;
}

/// Fundamental solution of the degenerate Laplacian with pole at the origin,
/// up to the (unused) normalization constant: Gamma = rho^(2 - Q).
/// Requires Q > 2 and (x, y) != 0.
inline double fundamental_solution(const GrushinParams& p, const Point& z) {
    detail::check_dims(p, z.x, z.y, "fundamental_solution");
    if (!(p.Q() > 2.0))
        throw std::domain_error("fundamental_solution: requires homogeneous dimension Q > 2");
    const double rho = pseudo_gauge(p, z);
    if (rho == 0.0)
        throw std::domain_error("fundamental_solution: pole at the origin");
    return std::pow(rho, 2.0 - p.Q());
}

/// Batch evaluation of the pseudo-gauge over an array of points.
inline void pseudo_gauge_batch(const GrushinParams& p, std::span<const Point> pts,
                               std::span<double> out) {
    if (pts.size() != out.size())
        throw std::invalid_argument("pseudo_gauge_batch: size mismatch");
    for (std::size_t i = 0; i < pts.size(); ++i) out[i] = pseudo_gauge(p, pts[i]);
}

}  // namespace grushin
