#pragma once

// Special-function kernel: Dawson function, the threshold function
// F(x) = x - D(x), its inverse, H(x) = x F^{-1}(1/x), Gaussian helpers,
// quadrature and a bracketed root finder shared by the solvers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <utility>

#include "qstar/errors.hpp"

namespace qstar {

/// Numerical tolerances used by every iterative routine in the library.
///
/// A residual r measured against a reference scale s is accepted when
/// |r| <= abs_tol + rel_tol * |s|.
struct Tolerances {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_iter = 200;

    void validate() const;

    double bound(double scale) const { return abs_tol + rel_tol * std::fabs(scale); }
};

namespace special {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrtPi = 1.77245385090551602730;
inline constexpr double kSqrt2 = 1.41421356237309504880;

// Switch points of the Dawson evaluation strategy.
inline constexpr double kDawsonSeriesMax = 1.0;
inline constexpr double kDawsonAsymptoticMin = 6.0;

/// D(x) = exp(-x^2) * integral_0^x exp(v^2) dv, accurate to ~1e-15 absolute.
/// Throws DomainError for non-finite x.
double dawson(double x);

/// The three evaluation branches, exposed so the seams can be tested.
double dawson_series(double x);
double dawson_rybicki(double x);
double dawson_asymptotic(double x);

/// F(x) = x - D(x) for x >= 0. Uses a cancellation-free series for small x.
double big_f(double x);

/// F^{-1}(y) for y >= 0 such that |F(x) - y| <= tol.bound(y).
double big_f_inv(double y, const Tolerances& tol = {});

/// H(x) = x F^{-1}(1/x), x > 0.
double h_func(double x, const Tolerances& tol = {});

/// J(x; a) = integral_0^x exp(a v^2) dv = exp(a x^2) D(x sqrt(a)) / sqrt(a), a > 0.
/// Returns +inf once a x^2 exceeds the double range.
double growth_integral(double x, double a);

/// J(p; a) / J(q; a) evaluated in log space so it never overflows. Requires |p| <= |q|, q != 0.
double growth_integral_ratio(double p, double q, double a);

// Standard normal helpers.
double normal_pdf(double z);
double normal_cdf(double z);
/// P(Z > z), accurate in the upper tail.
double normal_sf(double z);
/// P(a < Z < b) without cancellation in either tail.
double normal_mass(double a, double b);

/// Adaptive Gauss-Kronrod quadrature of f on [a, b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12);

struct RootResult {
    double x = 0.0;
    double fx = 0.0;
    int iterations = 0;
    double lo = 0.0;
    double hi = 0.0;
};

/// Brent's method on a sign-changing bracket [lo, hi].
///
/// Stops when |f(x)| <= f_tol, or when the bracket has shrunk below
/// x_tol (absolute). Throws BracketError when f(lo) and f(hi) share a
/// sign and ConvergenceError (with the last bracket) after max_iter.
template <class Fn>
RootResult find_root(Fn&& f, double lo, double hi, double f_tol, double x_tol, int max_iter) {
    double a = lo;
    double b = hi;
    double fa = f(a);
    double fb = f(b);
    if (fa == 0.0) return {a, fa, 0, a, a};
    if (fb == 0.0) return {b, fb, 0, b, b};
    if ((fa > 0.0) == (fb > 0.0)) {
        throw BracketError("root not bracketed on [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
    }
    if (std::fabs(fa) < std::fabs(fb)) {
        std::swap(a, b);
        std::swap(fa, fb);
    }
    double c = a;
    double fc = fa;
    double d = b - a;
    bool bisected = true;
    for (int it = 1; it <= max_iter; ++it) {
        double s;
        if (fa != fc && fb != fc) {
            s = a * fb * fc / ((fa - fb) * (fa - fc)) + b * fa * fc / ((fb - fa) * (fb - fc)) +
                c * fa * fb / ((fc - fa) * (fc - fb));
        } else {
            s = b - fb * (b - a) / (fb - fa);
        }
        const double lo3 = (3.0 * a + b) / 4.0;
        const bool outside = !((s > std::min(lo3, b) && s < std::max(lo3, b)));
        const bool slow_after_bisect = bisected && std::fabs(s - b) >= std::fabs(b - c) / 2.0;
        const bool slow_after_interp = !bisected && std::fabs(s - b) >= std::fabs(c - d) / 2.0;
        const bool tiny_after_bisect = bisected && std::fabs(b - c) < x_tol;
        const bool tiny_after_interp = !bisected && std::fabs(c - d) < x_tol;
        if (outside || slow_after_bisect || slow_after_interp || tiny_after_bisect ||
            tiny_after_interp) {
            s = 0.5 * (a + b);
            bisected = true;
        } else {
            bisected = false;
        }
        const double fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if ((fa > 0.0) == (fs > 0.0)) {
            a = s;
            fa = fs;
        } else {
            b = s;
            fb = fs;
        }
        if (std::fabs(fa) < std::fabs(fb)) {
            std::swap(a, b);
            std::swap(fa, fb);
        }
        if (std::fabs(fb) <= f_tol || std::fabs(b - a) <= x_tol) {
            return {b, fb, it, std::min(a, b), std::max(a, b)};
        }
    }
    throw ConvergenceError("root finder exhausted its iteration budget", std::min(a, b),
                           std::max(a, b));
}

}  // namespace special
}  // namespace qstar
