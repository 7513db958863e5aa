#include "qstar/analytic.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>

#include "qstar/errors.hpp"

namespace qstar {

void CostModel::validate() const {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError("gamma must be >= 0");
    if (!(max_pos > 0.0) || !std::isfinite(max_pos)) throw DomainError("max_pos must be > 0");
}

void CostModel::validate_for_solver() const {
    validate();
    if (!(gamma > 0.0)) throw DomainError("threshold solvers require gamma > 0");
}

const char* to_string(Method method) {
    switch (method) {
        case Method::analytic_continuum: return "analytic-continuum";
        case Method::analytic_limit_naive: return "analytic-limit-naive";
        case Method::analytic_limit_brownian: return "analytic-limit-brownian";
        case Method::analytic_discrete: return "analytic-discrete";
        case Method::fixed_point: return "fixed-point";
        case Method::bellman: return "bellman";
        case Method::grid_search: return "grid-search";
    }
    return "unknown";
}

const char* to_string(Regime regime) {
    switch (regime) {
        case Regime::discrete: return "discrete";
        case Regime::continuum: return "continuum";
        case Regime::crossover: return "crossover";
    }
    return "unknown";
}

namespace analytic {

namespace {

void check_channel(double p, double q) {
    if (!(q > 0.0) || !std::isfinite(q)) throw DomainError("channel half-width q must be > 0");
    if (!(std::fabs(p) <= q)) throw DomainError("start p must satisfy |p| <= q");
}

double growth_coefficient(const OuParams& params) {
    return params.epsilon / (params.beta * params.beta);
}

}  // namespace

double eta(const OuParams& params, const CostModel& cost) {
    params.validate();
    cost.validate_for_solver();
    return cost.gamma * std::pow(params.epsilon, 1.5) / params.beta;
}

double continuum_threshold_raw(const OuParams& params, const CostModel& cost,
                               const Tolerances& tol) {
    const double e = eta(params, cost);
    return params.beta / std::sqrt(params.epsilon) * special::big_f_inv(e, tol);
}

ThresholdEstimate threshold_continuum(const OuParams& params, const CostModel& cost,
                                      const Tolerances& tol, const RegimeCuts& cuts) {
    const double raw = continuum_threshold_raw(params, cost, tol);
    ThresholdEstimate est;
    est.method = Method::analytic_continuum;
    est.q_star = std::min(raw, cost.gamma);
    est.eta = eta(params, cost);
    est.regime = regime_classify(params, cost, cuts);
    est.diagnostics["eta"] = est.eta;
    est.diagnostics["q_unclamped"] = raw;
    est.diagnostics["clamped"] = raw > cost.gamma ? 1.0 : 0.0;
    est.diagnostics["q_over_beta"] = est.q_star / params.beta;
    est.diagnostics["q_over_gamma"] = est.q_star / cost.gamma;
    return est;
}

ThresholdLimits threshold_limits(const OuParams& params, const CostModel& cost) {
    params.validate();
    cost.validate_for_solver();
    const double g = cost.gamma;
    const double b = params.beta;
    const double e = params.epsilon;
    ThresholdLimits lim;
    lim.naive = g * e;
    lim.brownian = std::cbrt(1.5 * g * b * b);
    lim.discrete = g;
    lim.discrete_corrected = g - (1.0 - e) * std::sqrt(2.0 / special::kPi) * g * g / b;
    lim.kappa = std::cbrt(1.5);
    lim.x_star = (2.0 - e) * lim.discrete / b;
    lim.discrete_exit_prob = special::normal_sf(lim.x_star);
    return lim;
}

Regime regime_classify(const OuParams& params, const CostModel& cost, const RegimeCuts& cuts) {
    if (!(cuts.continuum_min_ratio > 0.0) || !(cuts.discrete_min_ratio > 0.0)) {
        throw DomainError("regime cut ratios must be positive");
    }
    const double q = std::min(continuum_threshold_raw(params, cost), cost.gamma);
    if (q / params.beta >= cuts.continuum_min_ratio) return Regime::continuum;
    if (params.beta / cost.gamma >= cuts.discrete_min_ratio) return Regime::discrete;
    return Regime::crossover;
}

double hitting_prob_closed(double p, double q, const OuParams& params) {
    params.validate();
    check_channel(p, q);
    const double ratio = special::growth_integral_ratio(p, q, growth_coefficient(params));
    return 0.5 * (1.0 - ratio);
}

double expected_sum_closed(double p, double q, const OuParams& params) {
    params.validate();
    check_channel(p, q);
    // Evaluated at |p| so that L(-p) = -L(p) holds bit for bit.
    const double x = std::fabs(p);
    const double ratio = special::growth_integral_ratio(x, q, growth_coefficient(params));
    return std::copysign((x - q * ratio) / params.epsilon, p);
}

KolmogorovResidual kolmogorov_residual(double q, const OuParams& params, int n_grid) {
    params.validate();
    if (n_grid < 16) throw DomainError("kolmogorov_residual: n_grid must be >= 16");
    if (!(q > 0.0)) throw DomainError("kolmogorov_residual: q must be > 0");

    const double h = 2.0 * q / (n_grid - 1);
    const double half_var = 0.5 * params.beta * params.beta;
    const double eps = params.epsilon;
    const auto node = [&](int i) { return i == n_grid - 1 ? q : -q + i * h; };

    KolmogorovResidual out;
    double l_prev = expected_sum_closed(node(0), q, params);
    double l_mid = expected_sum_closed(node(1), q, params);
    double p_prev = hitting_prob_closed(node(0), q, params);
    double p_mid = hitting_prob_closed(node(1), q, params);
    for (int i = 1; i + 1 < n_grid; ++i) {
        const double x = node(i);
        const double l_next = expected_sum_closed(node(i + 1), q, params);
        const double p_next = hitting_prob_closed(node(i + 1), q, params);
        const double scale = std::max(1.0, std::fabs(x));

        const double l2 = (l_next - 2.0 * l_mid + l_prev) / (h * h);
        const double l1 = (l_next - l_prev) / (2.0 * h);
        out.max_residual_L =
            std::max(out.max_residual_L, std::fabs(half_var * l2 - eps * x * l1 + x) / scale);

        const double p2 = (p_next - 2.0 * p_mid + p_prev) / (h * h);
        const double p1 = (p_next - p_prev) / (2.0 * h);
        out.max_residual_P =
            std::max(out.max_residual_P, std::fabs(half_var * p2 - eps * x * p1) / scale);

        l_prev = l_mid;
        l_mid = l_next;
        p_prev = p_mid;
        p_mid = p_next;
    }
    return out;
}

double path_identity_ratio(double q, const OuParams& params, double u) {
    if (!(u > 0.0) || !(u < q)) throw DomainError("path_identity_ratio: need 0 < u < q");
    const double p = q - u;
    const double prob = hitting_prob_closed(p, q, params);
    if (!(prob > 0.0)) throw DomainError("path_identity_ratio: u below numerical resolution");
    return expected_sum_closed(p, q, params) / prob;
}

double path_identity_limit(double q, const OuParams& params, double u) {
    if (u == 0.0) u = q * 1e-3;
    return 2.0 * path_identity_ratio(q, params, 0.5 * u) - path_identity_ratio(q, params, u);
}

double path_identity_root(const OuParams& params, const CostModel& cost, double u_fraction,
                          const Tolerances& tol) {
    params.validate();
    cost.validate_for_solver();
    tol.validate();
    if (!(u_fraction > 0.0 && u_fraction < 0.1)) {
        throw DomainError("path_identity_root: u_fraction must lie in (0, 0.1)");
    }
    const double target = 2.0 * cost.gamma;
    const auto residual = [&](double q) {
        return path_identity_limit(q, params, q * u_fraction) - target;
    };
    // The limit ratio is (2/eps)(q - D(q sqrt(a))/sqrt(a)), increasing in q,
    // below 2 gamma at q = gamma eps / 2 and above it past gamma eps + 0.55 / sqrt(a).
    const double lo = 0.5 * cost.gamma * params.epsilon;
    double hi = cost.gamma * params.epsilon + 0.55 * params.beta / std::sqrt(params.epsilon);
    for (int i = 0; i < 60 && residual(hi) < 0.0; ++i) hi *= 2.0;
    const auto root =
        special::find_root(residual, lo, hi, tol.bound(target), 8.0 * DBL_EPSILON * hi,
                           tol.max_iter);
    return root.x;
}

}  // namespace analytic
}  // namespace qstar
