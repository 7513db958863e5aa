#include "qstar/special.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cfloat>
#include <cmath>
#include <string>

namespace qstar {

void Tolerances::validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || max_iter < 1) {
        throw DomainError("tolerances must be positive and max_iter >= 1");
    }
}

namespace special {

namespace {

// Rybicki's sampling-theorem representation stays accurate to ~1e-16 with
// this step; the sum is cut where exp(-(x - n h)^2) drops below 1e-18.
constexpr double kRybickiStep = 0.25;
constexpr double kRybickiReach = 6.5;

// Upper bound of D on [0, inf), D(0.9241...) = 0.5410442...
constexpr double kDawsonMax = 0.5410442246;

}  // namespace

double dawson_series(double x) {
    // D(x) = sum_n (-1)^n 2^n x^(2n+1) / (2n+1)!!
    const double x2 = x * x;
    double term = x;
    double sum = x;
    for (int n = 1; n < 200; ++n) {
        term *= -2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
        if (std::fabs(term) <= 1e-17 * std::fabs(sum)) break;
    }
    return sum;
}

double dawson_rybicki(double x) {
    const double ax = std::fabs(x);
    const double h = kRybickiStep;
    int n_lo = static_cast<int>(std::floor((ax - kRybickiReach) / h));
    int n_hi = static_cast<int>(std::ceil((ax + kRybickiReach) / h));
    if (n_lo % 2 == 0) ++n_lo;
    double sum = 0.0;
    for (int n = n_lo; n <= n_hi; n += 2) {
        const double d = ax - n * h;
        sum += std::exp(-d * d) / n;
    }
    const double value = sum / kSqrtPi;
    return x < 0.0 ? -value : value;
}

double dawson_asymptotic(double x) {
    // D(x) ~ 1/(2x) sum_n (2n-1)!! / (2x^2)^n, truncated at its smallest term.
    const double ax = std::fabs(x);
    const double y = 1.0 / (2.0 * ax * ax);
    double term = 1.0;
    double sum = 1.0;
    for (int n = 1; n < 400; ++n) {
        const double next = term * (2.0 * n - 1.0) * y;
        if (next >= term) break;
        term = next;
        sum += term;
        if (term <= 1e-17 * sum) break;
    }
    const double value = sum / (2.0 * ax);
    return x < 0.0 ? -value : value;
}

double dawson(double x) {
    if (!std::isfinite(x)) throw DomainError("dawson: non-finite argument");
    const double ax = std::fabs(x);
    double value;
    if (ax <= kDawsonSeriesMax) {
        value = dawson_series(ax);
    } else if (ax < kDawsonAsymptoticMin) {
        value = dawson_rybicki(ax);
    } else {
        value = dawson_asymptotic(ax);
    }
    return x < 0.0 ? -value : value;
}

double big_f(double x) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("big_f: argument must be >= 0");
    if (x > kDawsonSeriesMax) return x - dawson(x);
    // x - D(x) = -sum_{n>=1} (-1)^n 2^n x^(2n+1) / (2n+1)!!, no cancellation.
    const double x2 = x * x;
    double term = x;
    double sum = 0.0;
    for (int n = 1; n < 200; ++n) {
        term *= -2.0 * x2 / (2.0 * n + 1.0);
        sum -= term;
        if (std::fabs(term) <= 1e-17 * std::fabs(sum)) break;
    }
    return sum;
}

double big_f_inv(double y, const Tolerances& tol) {
    tol.validate();
    if (!(y >= 0.0) || !std::isfinite(y)) throw DomainError("big_f_inv: argument must be >= 0");
    if (y == 0.0) return 0.0;

    // F(x) <= min(x, 2x^3/3) gives the lower end; F(x) >= x - max D the safe upper end.
    const double lo = std::max(y, std::cbrt(1.5 * y));
    double hi = std::min(y + 1.0 / (2.0 * y), y + kDawsonMax);
    if (hi <= lo) hi = y + kDawsonMax;
    const auto residual = [y](double x) { return big_f(x) - y; };
    int widen = 0;
    while (residual(hi) < 0.0) {
        hi = y + kDawsonMax * (1.0 + ++widen);
        if (widen > 8) throw BracketError("big_f_inv: could not bracket the root");
    }
    const double f_tol = tol.bound(y);
    const auto root = find_root(residual, lo, hi, f_tol, 4.0 * DBL_EPSILON * hi, tol.max_iter);
    if (std::fabs(root.fx) > 10.0 * f_tol) {
        throw ConvergenceError("big_f_inv: tolerance not met", root.lo, root.hi);
    }
    return root.x;
}

double h_func(double x, const Tolerances& tol) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("h_func: argument must be > 0");
    return x * big_f_inv(1.0 / x, tol);
}

double growth_integral(double x, double a) {
    if (!(a > 0.0)) throw DomainError("growth_integral: a must be > 0");
    const double e = a * x * x;
    if (e > 700.0) return x > 0.0 ? HUGE_VAL : -HUGE_VAL;
    const double s = std::sqrt(a);
    return std::exp(e) * dawson(x * s) / s;
}

double growth_integral_ratio(double p, double q, double a) {
    if (!(a > 0.0)) throw DomainError("growth_integral_ratio: a must be > 0");
    if (q == 0.0 || std::fabs(p) > std::fabs(q)) {
        throw DomainError("growth_integral_ratio: requires |p| <= |q| and q != 0");
    }
    if (p == 0.0) return 0.0;
    const double s = std::sqrt(a);
    const double dq = dawson(q * s);
    if (dq == 0.0) return p / q;
    return std::exp(a * (p - q) * (p + q)) * dawson(p * s) / dq;
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double normal_sf(double z) { return 0.5 * std::erfc(z / kSqrt2); }

double normal_mass(double a, double b) {
    if (b <= a) return 0.0;
    if (a >= 0.0) return normal_sf(a) - normal_sf(b);
    if (b <= 0.0) return normal_cdf(b) - normal_cdf(a);
    return 1.0 - normal_cdf(a) - normal_sf(b);
}

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 61>::integrate(f, a, b, 20, rel_tol);
}

}  // namespace special
}  // namespace qstar
