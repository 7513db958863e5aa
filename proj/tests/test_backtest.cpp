#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "qstar/analytic.hpp"
#include "qstar/backtest.hpp"
#include "qstar/bellman.hpp"

using namespace qstar;

namespace {

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

}  // namespace

TEST(ThresholdStrategy, NeverTriggered) {
    const auto path = sde::simulate_path({0.05, 0.1}, 10000, 1);
    const auto rep = backtest::run_threshold_strategy(path, 1.01 * max_abs(path.values), {1.0, 1.0});
    EXPECT_EQ(rep.n_trades, 0u);
    EXPECT_EQ(rep.net, 0.0);
    EXPECT_EQ(rep.steps, 10000u);
}

TEST(ThresholdStrategy, CostlessSignFollowing) {
    const auto path = sde::simulate_path({0.3, 1.0}, 10000, 2);
    const auto rep = backtest::run_threshold_strategy(path, 1e-300, {0.0, 2.0});
    double expected = 0.0;
    for (double p : path.values) expected += 2.0 * std::fabs(p);
    EXPECT_NEAR(rep.gross_gain, expected, 1e-9 * expected);
    EXPECT_EQ(rep.cost_paid, 0.0);
}

TEST(ThresholdStrategy, HandComputed) {
    const std::vector<double> p = {0.1, 0.5, 0.2, -0.6, -0.1, 0.7};
    const auto rep = backtest::run_threshold_strategy(p, 0.4, {0.25, 1.0});
    // positions 0, +1, +1, -1, -1, +1
    EXPECT_DOUBLE_EQ(rep.gross_gain, 0.5 + 0.2 + 0.6 + 0.1 + 0.7);
    EXPECT_DOUBLE_EQ(rep.cost_paid, 0.25 * (1.0 + 2.0 + 2.0));
    EXPECT_EQ(rep.n_trades, 3u);
}

TEST(ThresholdStrategy, PositionDomainAndAccounting) {
    const auto path = sde::simulate_path({0.01, 0.05}, 200000, 3);
    const CostModel cost{0.5, 1.0};
    const double q = 0.2;
    double pos = 0.0;
    for (double p : path.values) {
        const double next = bellman::policy(p, pos, q, cost.max_pos);
        if (next != pos) EXPECT_GE(std::fabs(p), q);
        if (next != 0.0) EXPECT_EQ(std::fabs(next), cost.max_pos);
        pos = next;
    }
    const auto rep = backtest::run_threshold_strategy(path, q, cost);
    EXPECT_EQ(rep.net, rep.gross_gain - rep.cost_paid - rep.risk_penalty);
    EXPECT_LE(rep.n_trades, rep.steps);
}

TEST(ThresholdStrategy, CostNonIncreasingInQ) {
    const auto path = sde::simulate_path({0.01, 0.05}, 100000, 4);
    double prev = INFINITY;
    for (int i = 0; i <= 40; ++i) {
        const double c = backtest::run_threshold_strategy(path, 0.02 * i, {1.0, 1.0}).cost_paid;
        EXPECT_LE(c, prev);
        prev = c;
    }
}

TEST(ThresholdStrategy, WhiteNoiseOptimumAtGamma) {
    const OuParams params{1.0, 0.5};
    const CostModel cost{0.2, 1.0};
    const double qs[] = {cost.gamma / 2.0, 2.0 * cost.gamma};
    const auto table = backtest::compare_strategies(params, cost, qs, 20000, 200, 77, false);
    const std::vector<double> at_gamma = {cost.gamma};
    const auto ref = backtest::compare_strategies(params, cost, at_gamma, 20000, 200, 77, false);
    EXPECT_GE(ref.rows[0].net, table.rows[0].net);
    EXPECT_GE(ref.rows[0].net, table.rows[1].net);
}

TEST(BandStrategy, Frictionless) {
    const auto path = sde::simulate_path({0.05, 0.1}, 10000, 5);
    const double lambda = 2.0;
    const auto rep = backtest::run_band_strategy(path, 0.0, lambda, 0.0);
    double expected = 0.0;
    for (double p : path.values) expected += p * p / (4.0 * lambda);
    EXPECT_NEAR(rep.net, expected, 1e-12 * expected);
    EXPECT_EQ(rep.net, rep.gross_gain - rep.cost_paid - rep.risk_penalty);
}

TEST(BandStrategy, HugeBandFreezesPosition) {
    const std::vector<double> p = {300.0, 3.0, -2.0, 1.0, -4.0};
    const auto rep = backtest::run_band_strategy(p, 200.0, 1.0, 0.1);
    EXPECT_EQ(rep.n_trades, 1u);  // enters at the band edge 50, then holds
    EXPECT_DOUBLE_EQ(rep.gross_gain, 50.0 * (300.0 + 3.0 - 2.0 + 1.0 - 4.0));
}

TEST(BandStrategy, TradesToNearestEdge) {
    const std::vector<double> p = {1.0};
    const auto rep = backtest::run_band_strategy(p, 0.4, 1.0, 1.0);
    // target 0.5, band [0.3, 0.7]: buy up to 0.3
    EXPECT_DOUBLE_EQ(rep.cost_paid, 0.3);
    EXPECT_DOUBLE_EQ(rep.gross_gain, 0.3);
    EXPECT_DOUBLE_EQ(rep.risk_penalty, 0.09);
}

TEST(GridSearch, WhiteNoise) {
    const OuParams params{1.0, 0.5};
    StrategyConfig strategy;
    strategy.cost = {0.1, 1.0};
    const auto res = backtest::grid_search(params, strategy, SearchConfig{}, 1000000, 1, 9);
    EXPECT_NEAR(res.optimum.q_star / 0.1, 1.0, 0.1);
    EXPECT_EQ(res.optimum.method, Method::grid_search);
    EXPECT_EQ(res.pnl_curve.size(), 21u);
    EXPECT_EQ(res.optimum.diagnostics.at("boundary_warning"), 0.0);
}

TEST(GridSearch, CommonRandomNumbersAreDeterministic) {
    const OuParams params{0.05, 0.05};
    StrategyConfig strategy;
    strategy.cost = {1.0, 1.0};
    SearchConfig search;
    search.rounds = 2;
    const auto a = backtest::grid_search(params, strategy, search, 20000, 4, 31);
    const auto b = backtest::grid_search(params, strategy, search, 20000, 4, 31);
    EXPECT_EQ(a.optimum.q_star, b.optimum.q_star);
    for (std::size_t i = 0; i < a.pnl_curve.size(); ++i) {
        EXPECT_EQ(a.pnl_curve[i].mean_net, b.pnl_curve[i].mean_net);
    }
}

TEST(GridSearch, CurveMatchesDirectBacktests) {
    const OuParams params{0.05, 0.05};
    StrategyConfig strategy;
    strategy.cost = {1.0, 1.0};
    SearchConfig search;
    search.rounds = 1;
    search.low = 0.05;
    search.high = 0.5;
    const auto res = backtest::grid_search(params, strategy, search, 30000, 2, 5);
    for (const auto& pt : res.pnl_curve) {
        double total = 0.0;
        for (std::size_t i = 0; i < 2; ++i) {
            const auto path = sde::simulate_path(params, 30000, sde::derive_seed(5, i));
            total += backtest::run_threshold_strategy(path, pt.candidate, strategy.cost).net;
        }
        EXPECT_NEAR(pt.mean_net, total / 2.0, 1e-9 * (1.0 + std::fabs(total)));
    }
}

TEST(GridSearch, BoundaryWarning) {
    const OuParams params{0.05, 0.05};
    StrategyConfig strategy;
    strategy.cost = {1.0, 1.0};
    SearchConfig search;
    search.rounds = 1;
    search.low = 2.0;  // far above any sensible threshold: optimum pinned at low end
    search.high = 3.0;
    const auto res = backtest::grid_search(params, strategy, search, 20000, 1, 5);
    EXPECT_EQ(res.optimum.diagnostics.at("boundary_warning"), 1.0);
}

TEST(GridSearch, ContinuumRegime) {
    const OuParams params{0.001, 1e-4};
    StrategyConfig strategy;
    strategy.cost = {1.0, 1.0};
    const auto res = backtest::grid_search(params, strategy, SearchConfig{}, 10000000, 1, 2);
    EXPECT_NEAR(res.optimum.q_star / 0.00270, 1.0, 0.15);
}

TEST(GridSearch, SparseTradingIsFlaggedNoisy) {
    const OuParams params{0.001, 1e-5};
    StrategyConfig strategy;
    strategy.cost = {1.0, 1.0};
    const auto res = backtest::grid_search(params, strategy, SearchConfig{}, 100000, 1, 3);
    EXPECT_EQ(res.optimum.diagnostics.at("noisy"), 1.0);
}

TEST(GridSearch, ConfigValidation) {
    SearchConfig bad;
    bad.n_candidates = 2;
    EXPECT_THROW(bad.validate(), DomainError);
    bad = SearchConfig{};
    bad.shrink = 1.0;
    EXPECT_THROW(bad.validate(), DomainError);
    bad = SearchConfig{};
    bad.rounds = 0;
    EXPECT_THROW(bad.validate(), DomainError);
}

TEST(FirstPassage, SymmetricStart) {
    const OuParams params{0.01, 0.05};
    const auto st = backtest::first_passage_mc(params, 0.3, 0.0, 20000, 1);
    EXPECT_NEAR(st.est_P.value, 0.5, 3.0 * st.est_P.std_error);
    EXPECT_NEAR(st.est_L.value, 0.0, 3.0 * st.est_L.std_error);
    EXPECT_GE(st.est_P.value, 0.0);
    EXPECT_LE(st.est_P.value, 1.0);
    EXPECT_GT(st.est_L.std_error, 0.0);
    EXPECT_GT(st.mean_exit_time, 0.0);
}

TEST(FirstPassage, ContinuumMatchesClosedForms) {
    const OuParams params{0.001, 1e-4};
    const double q = 0.005;  // q / beta = 50
    const double start = 0.002;
    const auto st = backtest::first_passage_mc(params, q, start, 20000, 2);
    EXPECT_NEAR(st.est_P.value, analytic::hitting_prob_closed(start, q, params),
                3.0 * st.est_P.std_error);
    EXPECT_NEAR(st.est_L.value, analytic::expected_sum_closed(start, q, params),
                3.0 * st.est_L.std_error);
}

TEST(FirstPassage, CensoringIsAReliabilityError) {
    EXPECT_THROW(backtest::first_passage_mc({0.001, 1e-4}, 0.01, 0.0, 200, 3, 50), ReliabilityError);
    EXPECT_THROW(backtest::first_passage_mc({0.001, 1e-4}, 0.01, 0.02, 200, 3), DomainError);
}

TEST(Compare, DefaultRowsAndDominance) {
    const OuParams params{0.001, 0.002};
    const CostModel cost{1.0, 1.0};
    const std::vector<double> extra = {cost.gamma};
    const auto table = backtest::compare_strategies(params, cost, extra, 100000, 100, 4);
    ASSERT_EQ(table.rows.size(), 3u);
    EXPECT_EQ(table.rows[0].label, "naive");
    EXPECT_DOUBLE_EQ(table.rows[0].q, cost.gamma * params.epsilon);
    EXPECT_EQ(table.rows[1].label, "q_star");
    const auto vs_naive = table.paired_difference(1, 0);
    EXPECT_GT(vs_naive.value + 3.0 * vs_naive.std_error, 0.0);
    EXPECT_GT(vs_naive.value, 0.0);
}

TEST(Compare, UnreachableThresholdsEarnNothing) {
    const OuParams params{0.05, 0.01};
    const CostModel cost{1.0, 1.0};
    const std::vector<double> qs = {10.0, 20.0};
    const auto table = backtest::compare_strategies(params, cost, qs, 1000, 10, 5, false);
    for (const auto& row : table.rows) {
        EXPECT_EQ(row.net, 0.0);
        EXPECT_EQ(row.trades, 0.0);
    }
}

TEST(CompensatedSum, RecoversLostLowOrderBits) {
    CompensatedSum s;
    s.add(1e16);
    for (int i = 0; i < 1000; ++i) s.add(1.0);
    s.add(-1e16);
    EXPECT_EQ(s.value(), 1000.0);
}
