#pragma once

// Test-only reference implementations, independent of the library code.

#include <cmath>
#include <functional>

namespace oracle {

// Adaptive Simpson in long double.
inline long double simpson(const std::function<long double(long double)>& f, long double a,
                           long double b, long double fa, long double fm, long double fb,
                           long double whole, long double tol, int depth) {
    const long double m = 0.5L * (a + b);
    const long double lm = 0.5L * (a + m);
    const long double rm = 0.5L * (m + b);
    const long double flm = f(lm);
    const long double frm = f(rm);
    const long double left = (m - a) / 6.0L * (fa + 4.0L * flm + fm);
    const long double right = (b - m) / 6.0L * (fm + 4.0L * frm + fb);
    const long double diff = left + right - whole;
    if (depth <= 0 || std::fabs(diff) <= 15.0L * tol) return left + right + diff / 15.0L;
    return simpson(f, a, m, fa, flm, fm, left, 0.5L * tol, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, 0.5L * tol, depth - 1);
}

inline long double integrate(const std::function<long double(long double)>& f, long double a,
                             long double b, long double rel_tol = 1e-17L) {
    const long double fa = f(a);
    const long double fb = f(b);
    const long double fm = f(0.5L * (a + b));
    const long double whole = (b - a) / 6.0L * (fa + 4.0L * fm + fb);
    return simpson(f, a, b, fa, fm, fb, whole, rel_tol * std::fabs(whole), 40);
}

// D(x) = int_0^x exp(v^2 - x^2) dv.
inline double dawson(double x) {
    const long double xl = x;
    return static_cast<double>(
        integrate([xl](long double v) { return std::exp(v * v - xl * xl); }, 0.0L, xl));
}

// F(x) = x - D(x), integrated directly so small x has no cancellation.
inline double big_f(double x) {
    const long double xl = x;
    return static_cast<double>(
        integrate([xl](long double v) { return -std::expm1(v * v - xl * xl); }, 0.0L, xl));
}

// F^{-1} by plain bisection on the oracle F.
inline double big_f_inv(double y) {
    double lo = 0.0;
    double hi = y + 1.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (big_f(mid) < y ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// int_0^x exp(a v^2) dv for moderate a x^2.
inline double growth_integral(double x, double a) {
    const long double al = a;
    return static_cast<double>(
        integrate([al](long double v) { return std::exp(al * v * v); }, 0.0L, x));
}

}  // namespace oracle
