#pragma once

// Strategy execution on simulated predictor paths with expected-gain
// accounting: the step-t gain is p_t * pi_t (the conditional mean of the
// next return), the cost gamma * |pi_t - pi_{t-1}|.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qstar/analytic.hpp"
#include "qstar/sde.hpp"

namespace qstar {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            carry_ += (sum_ - t) + x;
        } else {
            carry_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

struct BacktestReport {
    double gross_gain = 0.0;    // sum p_t pi_t
    double cost_paid = 0.0;     // sum gamma |delta pi_t|
    double risk_penalty = 0.0;  // sum lambda pi_t^2 (band mode only)
    double net = 0.0;           // gross_gain - cost_paid - risk_penalty
    std::size_t n_trades = 0;
    std::size_t steps = 0;
};

struct SearchConfig {
    int n_candidates = 21;
    int rounds = 6;
    double shrink = 0.4;
    double low = 0.0;
    double high = 0.0;

    void validate() const;
};

enum class StrategyMode { threshold, band };

/// What grid_search optimizes: the threshold strategy under `cost`, or the
/// symmetric band under a quadratic penalty lambda with linear cost cost.gamma.
struct StrategyConfig {
    StrategyMode mode = StrategyMode::threshold;
    CostModel cost;
    double lambda = 1.0;
};

struct PnlPoint {
    double candidate = 0.0;
    double mean_net = 0.0;
    double std_error = 0.0;
    double mean_trades = 0.0;
};

struct SearchResult {
    ThresholdEstimate optimum;
    std::vector<PnlPoint> pnl_curve;   // last round
    std::vector<PnlPoint> first_curve; // first (widest) round
};

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

struct FirstPassageStats {
    Estimate est_L;
    Estimate est_P;
    Estimate ratio;  // est_L / est_P with a delta-method standard error
    std::size_t n_paths = 0;
    std::size_t censored = 0;
    double mean_exit_time = 0.0;
};

/// Ensemble means of one strategy row.
struct StrategyRow {
    std::string label;
    double q = 0.0;
    double gross_gain = 0.0;
    double cost_paid = 0.0;
    double net = 0.0;
    double net_std_error = 0.0;
    double trades = 0.0;
    std::vector<double> path_nets;
};

struct ComparisonTable {
    std::vector<StrategyRow> rows;

    /// Mean and standard error of (row a - row b) net, paired path by path.
    Estimate paired_difference(std::size_t a, std::size_t b) const;
};

namespace backtest {

BacktestReport run_threshold_strategy(std::span<const double> path, double q,
                                      const CostModel& cost);
BacktestReport run_threshold_strategy(const PathSample& path, double q, const CostModel& cost);

/// Holds while pi_{t-1} lies within [p_t - h, p_t + h] / (2 lambda), otherwise
/// trades to the nearer band edge. half_band = 0 tracks p_t / (2 lambda) exactly.
BacktestReport run_band_strategy(std::span<const double> path, double half_band, double lambda,
                                 double gamma);
BacktestReport run_band_strategy(const PathSample& path, double half_band, double lambda,
                                 double gamma);

/// Iterative grid search over thresholds (or half-bands) on a common
/// ensemble of n_paths paths of n_steps each.
SearchResult grid_search(const OuParams& params, const StrategyConfig& strategy,
                         const SearchConfig& search, std::size_t n_steps, std::size_t n_paths,
                         std::uint64_t seed, PathStart start = PathStart::stationary());

/// Monte-Carlo estimate of L(start) and P(start) for the channel (-q, q).
/// max_steps = 0 selects 100 * ceil(1 / epsilon).
FirstPassageStats first_passage_mc(const OuParams& params, double q, double start,
                                   std::size_t n_paths, std::uint64_t seed,
                                   std::size_t max_steps = 0);

/// Evaluates every threshold on a shared ensemble. With include_defaults the
/// naive threshold gamma*eps and the continuum q* are prepended.
ComparisonTable compare_strategies(const OuParams& params, const CostModel& cost,
                                   std::span<const double> q_list, std::size_t n_steps,
                                   std::size_t n_paths, std::uint64_t seed,
                                   bool include_defaults = true);

}  // namespace backtest
}  // namespace qstar
