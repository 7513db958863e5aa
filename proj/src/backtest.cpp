#include "qstar/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "qstar/errors.hpp"

namespace qstar {

void SearchConfig::validate() const {
    if (n_candidates < 3) throw DomainError("n_candidates must be >= 3");
    if (rounds < 1) throw DomainError("rounds must be >= 1");
    if (!(shrink > 0.0 && shrink < 1.0)) throw DomainError("shrink must lie in (0, 1)");
    if (!(low >= 0.0) || !(high >= low)) throw DomainError("search range must satisfy 0 <= low <= high");
}

Estimate ComparisonTable::paired_difference(std::size_t a, std::size_t b) const {
    if (a >= rows.size() || b >= rows.size()) throw DomainError("row index out of range");
    const auto& x = rows[a].path_nets;
    const auto& y = rows[b].path_nets;
    const std::size_t n = x.size();
    if (n == 0 || y.size() != n) throw DomainError("rows do not share an ensemble");
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x[i] - y[i];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - y[i] - mean;
        ss += d * d;
    }
    const double se = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
    return {mean, se};
}

namespace backtest {

namespace {

inline double threshold_target(double p, double prev, double q, double m) {
    if (p >= q) return m;
    if (p <= -q) return -m;
    return prev;
}

inline double band_target(double p, double prev, double half_band, double lambda) {
    const double centre = p / (2.0 * lambda);
    const double width = half_band / (2.0 * lambda);
    return std::clamp(prev, centre - width, centre + width);
}

BacktestReport finish(const CompensatedSum& gross, const CompensatedSum& cost,
                      const CompensatedSum& penalty, std::size_t trades, std::size_t steps) {
    BacktestReport r;
    r.gross_gain = gross.value();
    r.cost_paid = cost.value();
    r.risk_penalty = penalty.value();
    r.net = r.gross_gain - r.cost_paid - r.risk_penalty;
    r.n_trades = trades;
    r.steps = steps;
    return r;
}

struct Moments {
    double mean = 0.0;
    double se = 0.0;
};

Moments moments(const std::vector<double>& x) {
    Moments m;
    const std::size_t n = x.size();
    if (n == 0) return m;
    CompensatedSum s;
    for (double v : x) s.add(v);
    m.mean = s.value() / static_cast<double>(n);
    if (n > 1) {
        double ss = 0.0;
        for (double v : x) ss += (v - m.mean) * (v - m.mean);
        m.se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
    }
    return m;
}

// Runs every candidate over one path, crediting each step's net to the
// block containing it. unit_nets[c][unit0 + b], trades[c] accumulate.
void evaluate_candidates(std::span<const double> path, const StrategyConfig& strategy,
                         const std::vector<double>& candidates, std::size_t blocks,
                         std::size_t unit0, std::vector<std::vector<double>>& unit_nets,
                         std::vector<double>& trades) {
    const std::size_t n = path.size();
    const double gamma = strategy.cost.gamma;
    const double m = strategy.cost.max_pos;
    const double lambda = strategy.lambda;
    const bool band = strategy.mode == StrategyMode::band;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        const double h = candidates[c];
        double pos = 0.0;
        std::size_t count = 0;
        for (std::size_t b = 0; b < blocks; ++b) {
            const std::size_t t0 = b * n / blocks;
            const std::size_t t1 = (b + 1) * n / blocks;
            CompensatedSum net;
            for (std::size_t t = t0; t < t1; ++t) {
                const double p = path[t];
                const double next =
                    band ? band_target(p, pos, h, lambda) : threshold_target(p, pos, h, m);
                if (next != pos) {
                    net.add(-gamma * std::fabs(next - pos));
                    ++count;
                    pos = next;
                }
                net.add(band ? p * pos - lambda * pos * pos : p * pos);
            }
            unit_nets[c][unit0 + b] = net.value();
        }
        trades[c] += static_cast<double>(count);
    }
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
    out.back() = hi;
    return out;
}

// Near-optimal candidates: mean within two paired standard errors of the best.
double near_optimal_spread(const std::vector<double>& candidates,
                           const std::vector<std::vector<double>>& unit_nets, std::size_t best) {
    double lo = candidates[best];
    double hi = candidates[best];
    const std::size_t units = unit_nets[best].size();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        std::vector<double> diff(units);
        for (std::size_t u = 0; u < units; ++u) diff[u] = unit_nets[best][u] - unit_nets[c][u];
        const Moments d = moments(diff);
        if (d.mean <= 2.0 * d.se) {
            lo = std::min(lo, candidates[c]);
            hi = std::max(hi, candidates[c]);
        }
    }
    return hi - lo;
}

}  // namespace

BacktestReport run_threshold_strategy(std::span<const double> path, double q,
                                      const CostModel& cost) {
    if (!(q >= 0.0)) throw DomainError("threshold q must be >= 0");
    cost.validate();
    CompensatedSum gross, paid, penalty;
    double pos = 0.0;
    std::size_t trades = 0;
    for (double p : path) {
        const double next = threshold_target(p, pos, q, cost.max_pos);
        if (next != pos) {
            paid.add(cost.gamma * std::fabs(next - pos));
            ++trades;
            pos = next;
        }
        gross.add(p * pos);
    }
    return finish(gross, paid, penalty, trades, path.size());
}

BacktestReport run_threshold_strategy(const PathSample& path, double q, const CostModel& cost) {
    return run_threshold_strategy(std::span<const double>(path.values), q, cost);
}

BacktestReport run_band_strategy(std::span<const double> path, double half_band, double lambda,
                                 double gamma) {
    if (!(half_band >= 0.0)) throw DomainError("half_band must be >= 0");
    if (!(lambda > 0.0)) throw DomainError("lambda must be > 0");
    if (!(gamma >= 0.0)) throw DomainError("gamma must be >= 0");
    CompensatedSum gross, paid, penalty;
    double pos = 0.0;
    std::size_t trades = 0;
    for (double p : path) {
        const double next = band_target(p, pos, half_band, lambda);
        if (next != pos) {
            paid.add(gamma * std::fabs(next - pos));
            ++trades;
            pos = next;
        }
        gross.add(p * pos);
        penalty.add(lambda * pos * pos);
    }
    return finish(gross, paid, penalty, trades, path.size());
}

BacktestReport run_band_strategy(const PathSample& path, double half_band, double lambda,
                                 double gamma) {
    return run_band_strategy(std::span<const double>(path.values), half_band, lambda, gamma);
}

SearchResult grid_search(const OuParams& params, const StrategyConfig& strategy,
                         const SearchConfig& search, std::size_t n_steps, std::size_t n_paths,
                         std::uint64_t seed, PathStart start) {
    params.validate();
    search.validate();
    strategy.cost.validate_for_solver();
    if (strategy.mode == StrategyMode::band && !(strategy.lambda > 0.0)) {
        throw DomainError("lambda must be > 0");
    }
    if (n_paths == 0) throw DomainError("n_paths must be >= 1");
    if (n_steps == 0) throw EmptyPathError("n_steps must be >= 1");

    const ThresholdEstimate reference = analytic::threshold_continuum(params, strategy.cost);
    double low = search.low;
    double high = search.high;
    if (high <= low) {
        low = 0.05 * reference.q_star;
        high = 2.0 * reference.q_star;
    }

    constexpr std::size_t kMinUnits = 16;
    const std::size_t blocks = std::max<std::size_t>(1, (kMinUnits + n_paths - 1) / n_paths);
    const std::size_t units = blocks * n_paths;

    SearchResult result;
    std::vector<double> candidates = linspace(low, high, search.n_candidates);
    std::size_t best = 0;
    double spread = 0.0;
    std::vector<std::vector<double>> unit_nets;
    std::vector<double> trades;
    for (int round = 0; round < search.rounds; ++round) {
        unit_nets.assign(candidates.size(), std::vector<double>(units, 0.0));
        trades.assign(candidates.size(), 0.0);
        for (std::size_t i = 0; i < n_paths; ++i) {
            const PathSample path =
                sde::simulate_path(params, n_steps, sde::derive_seed(seed, i), start);
            evaluate_candidates(path.values, strategy, candidates, blocks, i * blocks, unit_nets,
                                trades);
        }
        std::vector<PnlPoint> curve(candidates.size());
        best = 0;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            const Moments mo = moments(unit_nets[c]);
            // Unit means are per block; report per path.
            curve[c] = {candidates[c], mo.mean * static_cast<double>(blocks),
                        mo.se * static_cast<double>(blocks),
                        trades[c] / static_cast<double>(n_paths)};
            if (curve[c].mean_net > curve[best].mean_net) best = c;
        }
        if (round == 0) {
            result.first_curve = curve;
            spread = near_optimal_spread(candidates, unit_nets, best);
        }
        result.pnl_curve = curve;
        if (round + 1 == search.rounds) break;
        const double width = search.shrink * (candidates.back() - candidates.front());
        const double lo = std::max(0.0, candidates[best] - 0.5 * width);
        candidates = linspace(lo, lo + width, search.n_candidates);
    }

    const PnlPoint& top = result.pnl_curve[best];
    ThresholdEstimate& est = result.optimum;
    est.q_star = top.candidate;
    est.method = Method::grid_search;
    est.eta = reference.eta;
    est.regime = reference.regime;
    const bool at_edge = best == 0 || best + 1 == result.pnl_curve.size();
    const bool floor_edge = best == 0 && top.candidate == 0.0;
    est.diagnostics["boundary_warning"] = at_edge && !floor_edge ? 1.0 : 0.0;
    est.diagnostics["mean_net"] = top.mean_net;
    est.diagnostics["se_at_optimum"] = top.std_error;
    est.diagnostics["trades"] = top.mean_trades * static_cast<double>(n_paths);
    est.diagnostics["near_optimal_spread"] = spread;
    est.diagnostics["units"] = static_cast<double>(units);
    constexpr double kMinTrades = 50.0;
    const bool noisy = spread > 0.5 * top.candidate ||
                       top.mean_trades * static_cast<double>(n_paths) < kMinTrades;
    est.diagnostics["noisy"] = noisy ? 1.0 : 0.0;
    est.diagnostics["reference"] = reference.q_star;
    return result;
}

FirstPassageStats first_passage_mc(const OuParams& params, double q, double start,
                                   std::size_t n_paths, std::uint64_t seed,
                                   std::size_t max_steps) {
    params.validate();
    if (!(q > 0.0)) throw DomainError("channel half-width q must be > 0");
    if (!(std::fabs(start) < q)) throw DomainError("start must satisfy |start| < q");
    if (n_paths == 0) throw DomainError("n_paths must be >= 1");
    if (max_steps == 0) max_steps = 100 * static_cast<std::size_t>(std::ceil(1.0 / params.epsilon));

    std::vector<double> sums;
    std::vector<double> lower;
    sums.reserve(n_paths);
    lower.reserve(n_paths);
    CompensatedSum exit_time;
    FirstPassageStats stats;
    stats.n_paths = n_paths;
    for (std::size_t i = 0; i < n_paths; ++i) {
        sde::NormalCursor noise(sde::derive_seed(seed, i), sde::kInnovationStream);
        double p = start;
        CompensatedSum sum;
        std::size_t n = 0;
        while (std::fabs(p) < q && n < max_steps) {
            sum.add(p);
            p = sde::step(p, noise.next(), params);
            ++n;
        }
        if (std::fabs(p) < q) {
            ++stats.censored;
            continue;
        }
        sums.push_back(sum.value());
        lower.push_back(p <= -q ? 1.0 : 0.0);
        exit_time.add(static_cast<double>(n));
    }
    if (static_cast<double>(stats.censored) > 0.01 * static_cast<double>(n_paths)) {
        throw ReliabilityError(std::to_string(stats.censored) + " of " + std::to_string(n_paths) +
                               " paths did not exit within " + std::to_string(max_steps) +
                               " steps");
    }
    const std::size_t k = sums.size();
    const Moments ml = moments(sums);
    const Moments mp = moments(lower);
    stats.est_L = {ml.mean, ml.se};
    stats.est_P = {mp.mean, mp.se};
    stats.mean_exit_time = k > 0 ? exit_time.value() / static_cast<double>(k) : 0.0;

    double cov = 0.0;
    for (std::size_t i = 0; i < k; ++i) cov += (sums[i] - ml.mean) * (lower[i] - mp.mean);
    cov = k > 1 ? cov / static_cast<double>(k - 1) / static_cast<double>(k) : 0.0;
    if (mp.mean > 0.0) {
        const double r = ml.mean / mp.mean;
        const double var = (ml.se * ml.se - 2.0 * r * cov + r * r * mp.se * mp.se) /
                           (mp.mean * mp.mean);
        stats.ratio = {r, std::sqrt(std::max(0.0, var))};
    } else {
        stats.ratio = {std::numeric_limits<double>::quiet_NaN(),
                       std::numeric_limits<double>::infinity()};
    }
    return stats;
}

ComparisonTable compare_strategies(const OuParams& params, const CostModel& cost,
                                   std::span<const double> q_list, std::size_t n_steps,
                                   std::size_t n_paths, std::uint64_t seed,
                                   bool include_defaults) {
    params.validate();
    cost.validate();
    if (n_paths == 0) throw DomainError("n_paths must be >= 1");
    if (n_steps == 0) throw EmptyPathError("n_steps must be >= 1");
    if (q_list.empty() && !include_defaults) throw DomainError("q_list must be nonempty");

    ComparisonTable table;
    const auto add_row = [&](std::string label, double q) {
        StrategyRow row;
        row.label = std::move(label);
        row.q = q;
        table.rows.push_back(std::move(row));
    };
    if (include_defaults) {
        cost.validate_for_solver();
        add_row("naive", cost.gamma * params.epsilon);
        add_row("q_star", analytic::threshold_continuum(params, cost).q_star);
    }
    for (double q : q_list) {
        if (!(q >= 0.0)) throw DomainError("thresholds must be >= 0");
        add_row("q=" + std::to_string(q), q);
    }
    std::vector<CompensatedSum> gross(table.rows.size()), paid(table.rows.size());
    std::vector<double> trades(table.rows.size(), 0.0);
    for (auto& row : table.rows) row.path_nets.reserve(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) {
        const PathSample path = sde::simulate_path(params, n_steps, sde::derive_seed(seed, i));
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            const BacktestReport rep = run_threshold_strategy(path, table.rows[r].q, cost);
            gross[r].add(rep.gross_gain);
            paid[r].add(rep.cost_paid);
            trades[r] += static_cast<double>(rep.n_trades);
            table.rows[r].path_nets.push_back(rep.net);
        }
    }
    const double n = static_cast<double>(n_paths);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        StrategyRow& row = table.rows[r];
        const Moments mo = moments(row.path_nets);
        row.gross_gain = gross[r].value() / n;
        row.cost_paid = paid[r].value() / n;
        row.net = mo.mean;
        row.net_std_error = mo.se;
        row.trades = trades[r] / n;
    }
    return table;
}

}  // namespace backtest
}  // namespace qstar
