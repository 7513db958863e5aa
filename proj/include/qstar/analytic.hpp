#pragma once

// Closed-form thresholds for the Ornstein-Uhlenbeck predictor and the
// first-exit quantities of the channel (-q, q) in the drift-diffusion limit:
//
//   L(p) = (1/eps) (p - q J(p)/J(q)),  P(p) = (1 - J(p)/J(q)) / 2,
//   J(x) = int_0^x exp(a v^2) dv,      a = eps / beta^2.

#include <map>
#include <string>

#include "qstar/sde.hpp"
#include "qstar/special.hpp"

namespace qstar {

/// Linear cost gamma per unit traded and position cap max_pos.
///
/// gamma = 0 is accepted (frictionless backtests); the threshold solvers
/// require gamma > 0.
struct CostModel {
    double gamma = 0.0;
    double max_pos = 1.0;

    void validate() const;
    void validate_for_solver() const;
};

enum class Method {
    analytic_continuum,
    analytic_limit_naive,
    analytic_limit_brownian,
    analytic_discrete,
    fixed_point,
    bellman,
    grid_search,
};

enum class Regime { discrete, continuum, crossover };

const char* to_string(Method method);
const char* to_string(Regime regime);

struct ThresholdEstimate {
    double q_star = 0.0;
    Method method = Method::analytic_continuum;
    Regime regime = Regime::crossover;
    double eta = 0.0;
    std::map<std::string, double> diagnostics;
};

/// Engineering cut-offs for regime_classify.
struct RegimeCuts {
    double continuum_min_ratio = 20.0;  // q*/beta at or above: continuum
    double discrete_min_ratio = 10.0;   // beta/gamma at or above: discrete
};

/// The four closed-form limits plus the quantities used to derive them.
struct ThresholdLimits {
    double naive = 0.0;               // gamma * eps
    double brownian = 0.0;            // cbrt(3/2 gamma beta^2)
    double discrete = 0.0;            // gamma
    double discrete_corrected = 0.0;  // gamma - (1 - eps) sqrt(2/pi) gamma^2 / beta
    double kappa = 0.0;               // cbrt(3/2), brownian = kappa beta cbrt(gamma/beta)
    double x_star = 0.0;              // (2 - eps) q / beta at q = gamma
    double discrete_exit_prob = 0.0;  // P(q) = P(Z > x_star) in the one-step picture
};

struct KolmogorovResidual {
    double max_residual_L = 0.0;
    double max_residual_P = 0.0;
};

namespace analytic {

/// eta = gamma eps^{3/2} / beta, the single dimensionless parameter of the continuum solution.
double eta(const OuParams& params, const CostModel& cost);

/// (beta / sqrt(eps)) F^{-1}(eta), without the q* <= gamma cap.
double continuum_threshold_raw(const OuParams& params, const CostModel& cost,
                               const Tolerances& tol = {});

/// Continuum threshold capped at gamma (q* never exceeds the cost). The
/// uncapped value is kept in diagnostics["q_unclamped"].
ThresholdEstimate threshold_continuum(const OuParams& params, const CostModel& cost,
                                      const Tolerances& tol = {}, const RegimeCuts& cuts = {});

ThresholdLimits threshold_limits(const OuParams& params, const CostModel& cost);

/// Continuum when q*/beta >= cuts.continuum_min_ratio, discrete when
/// beta/gamma >= cuts.discrete_min_ratio, crossover otherwise.
Regime regime_classify(const OuParams& params, const CostModel& cost,
                       const RegimeCuts& cuts = {});

/// Probability of leaving (-q, q) through -q, starting at p.
double hitting_prob_closed(double p, double q, const OuParams& params);

/// Expected integral of the predictor before leaving (-q, q), starting at p.
double expected_sum_closed(double p, double q, const OuParams& params);

/// Max central-difference residual of the two backward equations on n_grid
/// nodes spanning [-q, q] (interior nodes only), each divided by max(1, |p|).
KolmogorovResidual kolmogorov_residual(double q, const OuParams& params, int n_grid);

/// L(q - u) / P(q - u); tends to 2 gamma at the optimal threshold as u -> 0.
double path_identity_ratio(double q, const OuParams& params, double u);

/// Richardson-extrapolated u -> 0 limit: 2 r(u/2) - r(u). Default u = q / 1000.
double path_identity_limit(double q, const OuParams& params, double u = 0.0);

/// Threshold solving path_identity_limit(q) = 2 gamma by bracketed root
/// finding, with u = q * u_fraction. Independent of F^{-1}.
double path_identity_root(const OuParams& params, const CostModel& cost,
                          double u_fraction = 1e-3, const Tolerances& tol = {});

}  // namespace analytic
}  // namespace qstar
