#include "qstar/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <vector>

#include "qstar/analytic.hpp"
#include "qstar/backtest.hpp"
#include "qstar/bellman.hpp"
#include "qstar/errors.hpp"
#include "qstar/sde.hpp"
#include "qstar/special.hpp"

namespace qstar::verify {

namespace {

// A check reports (observed, expected, tolerance); it passes when
// |observed - expected| <= tolerance.
struct Outcome {
    double observed = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

using CheckFn = std::function<Outcome()>;

double dawson_by_quadrature(double x) {
    return special::integrate([x](double v) { return std::exp(v * v - x * x); }, 0.0, x, 1e-14);
}

Outcome dawson_vs_quadrature() {
    double worst = 0.0;
    for (double x : {0.3, 1.0, 2.5, 5.0, 8.0}) {
        worst = std::max(worst, std::fabs(special::dawson(x) - dawson_by_quadrature(x)));
    }
    return {worst, 0.0, 1e-13, "max |D - quadrature| over x in {0.3, 1, 2.5, 5, 8}"};
}

Outcome dawson_seams() {
    const double a = std::fabs(special::dawson_series(1.0) - special::dawson_rybicki(1.0));
    const double b = std::fabs(special::dawson_rybicki(6.0) - special::dawson_asymptotic(6.0));
    return {std::max(a, b), 0.0, 1e-12, "branch mismatch at x = 1 and x = 6"};
}

Outcome big_f_round_trip() {
    const Tolerances tol;
    double worst = 0.0;
    for (int i = 0; i <= 90; ++i) {
        const double y = std::pow(10.0, -6.0 + i / 10.0);
        const double err = std::fabs(special::big_f(special::big_f_inv(y, tol)) - y);
        worst = std::max(worst, err / (10.0 * tol.bound(y)));
    }
    return {worst, 0.0, 1.0, "max |F(F^-1(y)) - y| / (10 tol) over y in [1e-6, 1e3]"};
}

Outcome big_f_asymptotics() {
    double worst = 0.0;
    for (double x : {10.0, 20.0, 100.0, 1e4}) {
        worst = std::max(worst, std::fabs(special::big_f(x) / x - 1.0) / 0.01);
    }
    for (double x : {1e-4, 1e-3, 1e-2, 0.1}) {
        worst = std::max(worst, std::fabs(special::big_f(x) / (2.0 * x * x * x / 3.0) - 1.0) / 0.02);
    }
    return {worst, 0.0, 1.0, "asymptotic ratio error relative to its bound"};
}

Outcome stationary_variance(double tolerance) {
    const OuParams params{0.01, 0.1};
    const PathSample path = sde::simulate_path(params, 1000000, 2024);
    double mean = 0.0;
    for (double p : path.values) mean += p;
    mean /= static_cast<double>(path.values.size());
    double ss = 0.0;
    for (double p : path.values) ss += (p - mean) * (p - mean);
    const double sd = std::sqrt(ss / static_cast<double>(path.values.size() - 1));
    return {sd / sde::stationary_std(params), 1.0, tolerance, "sample std / stationary std, eps = 0.01, n = 1e6"};
}

Outcome path_determinism() {
    const OuParams params{0.05, 0.2};
    const PathSample a = sde::simulate_path(params, 5000, 7);
    const PathSample b = sde::simulate_path(params, 5000, 7);
    const double same = a.values == b.values ? 1.0 : 0.0;
    return {same, 1.0, 0.0, "identical seeds give identical paths"};
}

Outcome continuum_bounds() {
    double worst = 0.0;
    for (double beta : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0}) {
        for (double gamma : {0.1, 1.0, 10.0}) {
            const OuParams params{0.001, beta};
            const CostModel cost{gamma, 1.0};
            const double q = analytic::threshold_continuum(params, cost).q_star;
            const double lo = gamma * params.epsilon;
            const double excess = std::max(lo - q, q - gamma) / gamma;
            worst = std::max(worst, std::max(0.0, excess));
        }
    }
    return {worst, 0.0, 1e-12, "violation of gamma eps <= q* <= gamma (relative)"};
}

Outcome regime_limits() {
    const double eps = 0.001;
    const double gamma = 1.0;
    const double beta_naive = gamma * std::pow(eps, 1.5) / 30.0;
    const double beta_brownian = gamma * std::pow(eps, 1.5) / 0.01;
    const CostModel cost{gamma, 1.0};
    const double naive = analytic::threshold_continuum({eps, beta_naive}, cost).q_star / (gamma * eps);
    const auto lim = analytic::threshold_limits({eps, beta_brownian}, cost);
    const double brownian =
        analytic::threshold_continuum({eps, beta_brownian}, cost).q_star / lim.brownian;
    const double worst = std::max(std::fabs(naive - 1.0), std::fabs(brownian - 1.0));
    return {worst, 0.0, 0.1, "limit ratio error at eta = 30 and eta = 0.01"};
}

Outcome kolmogorov() {
    const OuParams params{0.001, 1e-4};
    const double q = analytic::threshold_continuum(params, {1.0, 1.0}).q_star;
    const auto r = analytic::kolmogorov_residual(q, params, 2001);
    return {std::max(r.max_residual_L, r.max_residual_P), 0.0, 1e-8,
            "backward-equation residual at q*, 2001 nodes"};
}

Outcome path_identity() {
    const OuParams params{0.001, 1e-4};
    const CostModel cost{1.0, 1.0};
    const double root = analytic::path_identity_root(params, cost, 1e-5);
    const double q = analytic::threshold_continuum(params, cost).q_star;
    return {root / q, 1.0, 1e-6, "path-identity root / continuum q*"};
}

Outcome white_noise_fixed_point() {
    const OuParams params{1.0, 1.0};
    const CostModel cost{0.2, 1.0};
    const auto sol = bellman::stationary_g_solve(params, cost, GridSpec::covering(params, 201));
    return {sol.q_star / cost.gamma, 1.0, 0.005, "fixed-point q* / gamma at eps = 1"};
}

Outcome continuum_fixed_point() {
    const OuParams params{0.001, 1e-5};
    const CostModel cost{1.0, 1.0};
    const auto sol = bellman::stationary_g_solve(params, cost, GridSpec::covering(params, 201));
    const double q = analytic::threshold_continuum(params, cost).q_star;
    return {sol.q_star / q, 1.0, 0.05, "fixed-point / continuum q*, beta = 1e-5"};
}

Outcome bang_bang() {
    const OuParams params{0.01, 0.01};
    const CostModel cost{1.0, 1.0};
    FiniteHorizonOptions options;
    options.store_grids = false;
    const auto sol =
        bellman::finite_horizon_solve(params, cost, 200, GridSpec::covering(params, 101), options);
    return {static_cast<double>(sol.bang_bang_violations), 0.0, 0.0,
            "interior argmax count, horizon 200"};
}

Outcome accounting_identity() {
    const OuParams params{0.01, 0.05};
    const PathSample path = sde::simulate_path(params, 100000, 11);
    const auto rep = backtest::run_threshold_strategy(path, 0.2, {0.5, 1.0});
    const auto band = backtest::run_band_strategy(path, 0.1, 1.0, 0.5);
    const double err = std::max(
        std::fabs(rep.net - (rep.gross_gain - rep.cost_paid - rep.risk_penalty)),
        std::fabs(band.net - (band.gross_gain - band.cost_paid - band.risk_penalty)));
    return {err, 0.0, 0.0, "net - (gross - cost - penalty)"};
}

Outcome cost_monotonicity() {
    const OuParams params{0.01, 0.05};
    const PathSample path = sde::simulate_path(params, 100000, 12);
    double previous = INFINITY;
    double worst = 0.0;
    for (int i = 0; i <= 20; ++i) {
        const double cost_paid = backtest::run_threshold_strategy(path, 0.05 * i, {1.0, 1.0}).cost_paid;
        worst = std::max(worst, cost_paid - previous);
        previous = cost_paid;
    }
    return {std::max(0.0, worst), 0.0, 0.0, "largest cost increase along increasing q"};
}

Outcome passage_symmetry() {
    const OuParams params{0.01, 0.05};
    const auto st = backtest::first_passage_mc(params, 0.3, 0.0, 20000, 5);
    const double z = std::fabs(st.est_P.value - 0.5) / st.est_P.std_error;
    return {z, 0.0, 3.0, "|P(0) - 1/2| in standard errors"};
}

}  // namespace

std::vector<CheckResult> run_suite(const SuiteOptions& options) {
    const std::vector<std::pair<std::string, CheckFn>> checks = {
        {"special.dawson_vs_quadrature", dawson_vs_quadrature},
        {"special.dawson_seams", dawson_seams},
        {"special.big_f_round_trip", big_f_round_trip},
        {"special.big_f_asymptotics", big_f_asymptotics},
        {"sde.stationary_variance",
         [&] { return stationary_variance(options.self_test_fault ? 0.0 : 0.02); }},
        {"sde.determinism", path_determinism},
        {"analytic.continuum_bounds", continuum_bounds},
        {"analytic.regime_limits", regime_limits},
        {"analytic.kolmogorov_residual", kolmogorov},
        {"analytic.path_identity_root", path_identity},
        {"bellman.white_noise", white_noise_fixed_point},
        {"bellman.continuum_fixed_point", continuum_fixed_point},
        {"bellman.bang_bang", bang_bang},
        {"backtest.accounting_identity", accounting_identity},
        {"backtest.cost_monotonicity", cost_monotonicity},
        {"backtest.passage_symmetry", passage_symmetry},
    };
    std::vector<CheckResult> out;
    out.reserve(checks.size());
    for (const auto& [name, fn] : checks) {
        CheckResult r;
        r.name = name;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const Outcome o = fn();
            r.observed = o.observed;
            r.expected = o.expected;
            r.tolerance = o.tolerance;
            r.detail = o.detail;
            r.passed = std::fabs(o.observed - o.expected) <= o.tolerance;
        } catch (const Error& e) {
            r.passed = false;
            r.detail = std::string(to_string(e.kind())) + ": " + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace qstar::verify
