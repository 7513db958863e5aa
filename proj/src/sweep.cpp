#include "qstar/sweep.hpp"

#include <cmath>
#include <limits>

#include "qstar/backtest.hpp"
#include "qstar/bellman.hpp"
#include "qstar/errors.hpp"

namespace qstar::sweep {

std::vector<double> beta_grid(const SweepConfig& config) {
    if (!(config.beta_min > 0.0) || !(config.beta_max >= config.beta_min)) {
        throw DomainError("beta range must satisfy 0 < beta_min <= beta_max");
    }
    if (config.points < 1) throw DomainError("points must be >= 1");
    std::vector<double> out(static_cast<std::size_t>(config.points));
    const double a = std::log(config.beta_min);
    const double b = std::log(config.beta_max);
    for (int i = 0; i < config.points; ++i) {
        out[i] = config.points == 1 ? config.beta_min : std::exp(a + (b - a) * i / (config.points - 1));
    }
    if (config.points > 1) out.back() = config.beta_max;
    return out;
}

std::vector<SweepRow> run(const SweepConfig& config) {
    const CostModel cost{config.gamma, 1.0};
    cost.validate_for_solver();
    const std::vector<double> betas = beta_grid(config);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<SweepRow> rows;
    rows.reserve(betas.size());
    for (std::size_t i = 0; i < betas.size(); ++i) {
        SweepRow row;
        row.beta = betas[i];
        const OuParams params{config.epsilon, row.beta};
        const auto fail = [&row](const char* column, const Error& e) {
            if (!row.note.empty()) row.note += "; ";
            row.note += std::string(column) + " " + to_string(e.kind()) + ": " + e.what();
        };
        row.q_analytic = row.q_fixed_point = row.q_grid_search = nan;
        try {
            const auto est = analytic::threshold_continuum(params, cost);
            const auto lim = analytic::threshold_limits(params, cost);
            row.q_analytic = est.q_star;
            row.regime = est.regime;
            row.q_naive = lim.naive;
            row.q_brownian = lim.brownian;
        } catch (const Error& e) {
            fail("analytic", e);
        }
        try {
            row.q_fixed_point =
                bellman::stationary_g_solve(params, cost, GridSpec::covering(params, config.grid_points))
                    .q_star;
        } catch (const Error& e) {
            fail("fixed_point", e);
        }
        if (config.grid_search) {
            try {
                StrategyConfig strategy;
                strategy.cost = cost;
                const auto res = backtest::grid_search(params, strategy, SearchConfig{},
                                                       config.steps, config.paths,
                                                       sde::derive_seed(config.seed, i));
                row.q_grid_search = res.optimum.q_star;
                row.grid_search_noisy = res.optimum.diagnostics.at("noisy") != 0.0;
                if (row.grid_search_noisy) {
                    if (!row.note.empty()) row.note += "; ";
                    row.note += "grid_search noisy";
                }
            } catch (const Error& e) {
                fail("grid_search", e);
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace qstar::sweep
