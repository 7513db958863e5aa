// qstar command-line driver: solve, sweep, backtest, optimize, bellman,
// passage, verify. Parameters come from flags, then --config, then defaults.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qstar/analytic.hpp"
#include "qstar/backtest.hpp"
#include "qstar/bellman.hpp"
#include "qstar/errors.hpp"
#include "qstar/sde.hpp"
#include "qstar/sweep.hpp"
#include "qstar/verify.hpp"

using json = nlohmann::json;
using namespace qstar;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Params {
    std::optional<double> epsilon, beta, gamma, maxpos, q, start, half_band, lambda;
    std::optional<double> beta_min, beta_max, p_max_multiple;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> steps, paths, horizon, max_steps;
    std::optional<int> grid, npos, points, candidates, rounds;
    std::optional<double> shrink, low, high;
    std::string method = "analytic,fixed-point";
    std::string mode = "threshold";
    std::string format;
    std::string output;
    std::vector<double> q_list;
    bool grid_search = false;
    bool burn_in = false;
    bool self_test_fault = false;
};

template <class T>
T need(const std::optional<T>& v, const char* name) {
    if (!v) throw UsageError(std::string("missing parameter: ") + name);
    return *v;
}

template <class T>
T get(const std::optional<T>& v, T fallback) {
    return v ? *v : fallback;
}

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw UsageError("cannot open output file " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

void csv_metadata(std::ostream& os, const std::string& command, std::uint64_t seed) {
    os << "# command: " << command << "\n# seed: " << seed << "\n# version: " << kVersion << "\n";
}

json meta(const std::string& command, std::uint64_t seed) {
    return {{"command", command}, {"seed", seed}, {"version", kVersion}};
}

json estimate_json(const ThresholdEstimate& e) {
    json j = {{"q_star", e.q_star},
              {"method", to_string(e.method)},
              {"regime", to_string(e.regime)},
              {"eta", e.eta}};
    for (const auto& [k, v] : e.diagnostics) j["diagnostics"][k] = v;
    return j;
}

OuParams ou(const Params& p) { return {need(p.epsilon, "epsilon"), need(p.beta, "beta")}; }
CostModel cost_of(const Params& p) { return {need(p.gamma, "gamma"), get(p.maxpos, 1.0)}; }

GridSpec grid_of(const Params& p, const OuParams& params) {
    return GridSpec::covering(params, get(p.grid, 201), get(p.p_max_multiple, 8.0));
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

int cmd_solve(const Params& p) {
    const OuParams params = ou(p);
    const CostModel cost = cost_of(p);
    params.validate();
    cost.validate_for_solver();
    json out = meta("solve", get(p.seed, std::uint64_t{1}));
    out["epsilon"] = params.epsilon;
    out["beta"] = params.beta;
    out["gamma"] = cost.gamma;
    out["eta"] = analytic::eta(params, cost);
    out["regime"] = to_string(analytic::regime_classify(params, cost));
    const auto lim = analytic::threshold_limits(params, cost);
    out["limits"] = {{"naive", lim.naive},
                     {"brownian", lim.brownian},
                     {"discrete", lim.discrete},
                     {"discrete_corrected", lim.discrete_corrected},
                     {"kappa", lim.kappa},
                     {"x_star", lim.x_star},
                     {"discrete_exit_prob", lim.discrete_exit_prob}};
    // The large-beta expansion means nothing once gamma / beta is not small.
    if (params.beta <= cost.gamma) {
        out["limits"]["discrete_corrected"] = nullptr;
        out["limits"]["x_star"] = nullptr;
        out["limits"]["discrete_exit_prob"] = nullptr;
    }
    std::vector<std::string> methods = split(p.method);
    if (methods.size() == 1 && methods[0] == "all") methods = {"analytic", "fixed-point", "bellman"};
    for (const auto& m : methods) {
        if (m == "analytic") {
            const auto est = analytic::threshold_continuum(params, cost);
            out["q_star"][to_string(est.method)] = est.q_star;
            out["estimates"].push_back(estimate_json(est));
        } else if (m == "fixed-point") {
            const auto sol = bellman::stationary_g_solve(params, cost, grid_of(p, params));
            out["q_star"]["fixed-point"] = sol.q_star;
            out["estimates"].push_back({{"q_star", sol.q_star},
                                        {"method", "fixed-point"},
                                        {"iterations", sol.iterations},
                                        {"residual", sol.residual}});
        } else if (m == "bellman") {
            FiniteHorizonOptions opt;
            opt.store_grids = false;
            opt.n_pos = get(p.npos, 11);
            const auto sol = bellman::finite_horizon_solve(params, cost, get(p.horizon, std::size_t{500}),
                                                           grid_of(p, params), opt);
            out["q_star"]["bellman"] = sol.thresholds.front();
            out["estimates"].push_back({{"q_star", sol.thresholds.front()},
                                        {"method", "bellman"},
                                        {"horizon", sol.thresholds.size()},
                                        {"bang_bang_violations", sol.bang_bang_violations}});
        } else {
            throw UsageError("unknown method '" + m + "' (analytic, fixed-point, bellman, all)");
        }
    }
    Output o(p.output);
    o.stream() << out.dump(2) << "\n";
    return 0;
}

int cmd_sweep(const Params& p) {
    SweepConfig c;
    c.epsilon = need(p.epsilon, "epsilon");
    c.gamma = need(p.gamma, "gamma");
    c.beta_min = need(p.beta_min, "beta-min");
    c.beta_max = need(p.beta_max, "beta-max");
    c.points = get(p.points, 12);
    c.grid_points = get(p.grid, 201);
    c.grid_search = p.grid_search;
    c.steps = get(p.steps, std::size_t{10000000});
    c.paths = get(p.paths, std::size_t{1});
    c.seed = get(p.seed, std::uint64_t{1});
    const auto rows = sweep::run(c);
    Output o(p.output);
    auto& os = o.stream();
    csv_metadata(os, "sweep", c.seed);
    os << "beta,q_analytic,q_fixed_point,q_grid_search,q_naive,q_brownian,regime,note\n";
    for (const auto& r : rows) {
        os << num(r.beta) << ',' << num(r.q_analytic) << ',' << num(r.q_fixed_point) << ','
           << num(r.q_grid_search) << ',' << num(r.q_naive) << ',' << num(r.q_brownian) << ','
           << to_string(r.regime) << ',' << csv_field(r.note) << "\n";
    }
    return 0;
}

int cmd_backtest(const Params& p) {
    const OuParams params = ou(p);
    const std::uint64_t seed = get(p.seed, std::uint64_t{1});
    const std::size_t steps = get(p.steps, std::size_t{1000000});
    const std::size_t paths = get(p.paths, std::size_t{1});
    Output o(p.output);
    auto& os = o.stream();
    csv_metadata(os, "backtest", seed);
    if (p.mode == "band") {
        const double gamma = need(p.gamma, "gamma");
        const double lambda = get(p.lambda, 1.0);
        const double h = need(p.half_band, "half-band");
        os << "path,half_band,gross_gain,cost_paid,risk_penalty,net,n_trades,steps\n";
        for (std::size_t i = 0; i < paths; ++i) {
            const PathSample path = sde::simulate_path(params, steps, sde::derive_seed(seed, i));
            const auto r = backtest::run_band_strategy(path, h, lambda, gamma);
            os << i << ',' << num(h) << ',' << num(r.gross_gain) << ',' << num(r.cost_paid) << ','
               << num(r.risk_penalty) << ',' << num(r.net) << ',' << r.n_trades << ',' << r.steps
               << "\n";
        }
        return 0;
    }
    if (p.mode != "threshold") throw UsageError("mode must be threshold or band");
    const CostModel cost = cost_of(p);
    std::vector<double> qs = p.q_list;
    if (p.q) qs.push_back(*p.q);
    const auto table = backtest::compare_strategies(params, cost, qs, steps, paths, seed, true);
    os << "label,q,gross_gain,cost_paid,net,net_std_error,trades\n";
    for (const auto& r : table.rows) {
        os << csv_field(r.label) << ',' << num(r.q) << ',' << num(r.gross_gain) << ','
           << num(r.cost_paid) << ',' << num(r.net) << ',' << num(r.net_std_error) << ','
           << num(r.trades) << "\n";
    }
    return 0;
}

int cmd_optimize(const Params& p) {
    const OuParams params = ou(p);
    StrategyConfig strategy;
    strategy.cost = cost_of(p);
    if (p.mode == "band") {
        strategy.mode = StrategyMode::band;
        strategy.lambda = get(p.lambda, 1.0);
    } else if (p.mode != "threshold") {
        throw UsageError("mode must be threshold or band");
    }
    SearchConfig search;
    search.n_candidates = get(p.candidates, search.n_candidates);
    search.rounds = get(p.rounds, search.rounds);
    search.shrink = get(p.shrink, search.shrink);
    search.low = get(p.low, 0.0);
    search.high = get(p.high, 0.0);
    const std::uint64_t seed = get(p.seed, std::uint64_t{1});
    const PathStart start = p.burn_in ? PathStart::zero_with_burn_in() : PathStart::stationary();
    const auto res = backtest::grid_search(params, strategy, search, get(p.steps, std::size_t{1000000}),
                                           get(p.paths, std::size_t{1}), seed, start);
    Output o(p.output);
    auto& os = o.stream();
    if (p.format == "csv") {
        csv_metadata(os, "optimize", seed);
        os << "candidate,mean_net,std_error,mean_trades\n";
        for (const auto& pt : res.pnl_curve) {
            os << num(pt.candidate) << ',' << num(pt.mean_net) << ',' << num(pt.std_error) << ','
               << num(pt.mean_trades) << "\n";
        }
        return 0;
    }
    json out = meta("optimize", seed);
    out["mode"] = p.mode;
    out["optimum"] = estimate_json(res.optimum);
    for (const auto& pt : res.pnl_curve) {
        out["pnl_curve"].push_back({{"candidate", pt.candidate},
                                    {"mean_net", pt.mean_net},
                                    {"std_error", pt.std_error},
                                    {"mean_trades", pt.mean_trades}});
    }
    os << out.dump(2) << "\n";
    return 0;
}

int cmd_bellman(const Params& p) {
    const OuParams params = ou(p);
    const CostModel cost = cost_of(p);
    FiniteHorizonOptions opt;
    opt.store_grids = false;
    opt.n_pos = get(p.npos, 11);
    const std::size_t horizon = get(p.horizon, std::size_t{500});
    const auto sol = bellman::finite_horizon_solve(params, cost, horizon, grid_of(p, params), opt);
    Output o(p.output);
    auto& os = o.stream();
    csv_metadata(os, "bellman", get(p.seed, std::uint64_t{1}));
    os << "# bang_bang_violations: " << sol.bang_bang_violations << "\n";
    os << "t,q_t\n";
    for (std::size_t t = 0; t < sol.thresholds.size(); ++t) {
        os << t << ',' << num(sol.thresholds[t]) << "\n";
    }
    return 0;
}

int cmd_passage(const Params& p) {
    const OuParams params = ou(p);
    const double q = need(p.q, "q");
    const double start = get(p.start, 0.0);
    const std::uint64_t seed = get(p.seed, std::uint64_t{1});
    const auto st = backtest::first_passage_mc(params, q, start, get(p.paths, std::size_t{10000}),
                                               seed, get(p.max_steps, std::size_t{0}));
    json out = meta("passage", seed);
    out["q"] = q;
    out["start"] = start;
    out["est_L"] = {{"value", st.est_L.value}, {"std_error", st.est_L.std_error}};
    out["est_P"] = {{"value", st.est_P.value}, {"std_error", st.est_P.std_error}};
    out["ratio"] = {{"value", st.ratio.value}, {"std_error", st.ratio.std_error}};
    out["n_paths"] = st.n_paths;
    out["censored"] = st.censored;
    out["mean_exit_time"] = st.mean_exit_time;
    out["closed_form"] = {{"L", analytic::expected_sum_closed(start, q, params)},
                          {"P", analytic::hitting_prob_closed(start, q, params)}};
    Output o(p.output);
    o.stream() << out.dump(2) << "\n";
    return 0;
}

int cmd_verify(const Params& p) {
    verify::SuiteOptions options;
    options.self_test_fault = p.self_test_fault;
    const auto results = verify::run_suite(options);
    json out = meta("verify", get(p.seed, std::uint64_t{1}));
    int failures = 0;
    double total = 0.0;
    for (const auto& r : results) {
        failures += r.passed ? 0 : 1;
        total += r.seconds;
        out["checks"].push_back({{"name", r.name},
                                 {"passed", r.passed},
                                 {"observed", r.observed},
                                 {"expected", r.expected},
                                 {"tolerance", r.tolerance},
                                 {"seconds", r.seconds},
                                 {"detail", r.detail}});
    }
    out["failures"] = failures;
    out["seconds"] = total;
    if (total > 300.0) out["warning"] = "suite exceeded its 5 minute budget";
    Output o(p.output);
    o.stream() << out.dump(2) << "\n";
    return failures == 0 ? 0 : 1;
}

void print_error(const std::string& code, const std::string& message) {
    std::cout << json{{"error", code}, {"message", message}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal trading thresholds under linear costs"};
    app.set_config("--config", "", "flat key=value parameter file");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);

    Params p;
    app.add_option("--epsilon", p.epsilon, "mean reversion per step, in (0, 1]");
    app.add_option("--beta", p.beta, "predictor innovation std");
    app.add_option("--gamma", p.gamma, "linear cost per unit traded");
    app.add_option("--maxpos", p.maxpos, "position cap (default 1)");
    app.add_option("--seed", p.seed, "master seed (default 1)");
    app.add_option("--steps", p.steps, "steps per path");
    app.add_option("--paths", p.paths, "number of paths");
    app.add_option("--horizon", p.horizon, "finite-horizon length (default 500)");
    app.add_option("--grid", p.grid, "predictor grid nodes (default 201)");
    app.add_option("--grid-multiple", p.p_max_multiple, "grid half-width in stationary stds");
    app.add_option("--npos", p.npos, "position grid nodes (default 11)");
    app.add_option("--method", p.method, "solve: analytic,fixed-point,bellman or all");
    app.add_option("--mode", p.mode, "threshold or band");
    app.add_option("--q", p.q, "threshold / channel half-width");
    app.add_option("--q-list", p.q_list, "extra thresholds for backtest")->delimiter(',');
    app.add_option("--start", p.start, "passage start value (default 0)");
    app.add_option("--half-band", p.half_band, "band half-width");
    app.add_option("--lambda", p.lambda, "quadratic risk penalty (default 1)");
    app.add_option("--beta-min", p.beta_min, "sweep lower beta");
    app.add_option("--beta-max", p.beta_max, "sweep upper beta");
    app.add_option("--points", p.points, "sweep points (default 12)");
    app.add_option("--candidates", p.candidates, "grid-search candidates per round");
    app.add_option("--rounds", p.rounds, "grid-search rounds");
    app.add_option("--shrink", p.shrink, "grid-search range shrink per round");
    app.add_option("--low", p.low, "grid-search initial range low");
    app.add_option("--high", p.high, "grid-search initial range high");
    app.add_option("--max-steps", p.max_steps, "passage censoring limit");
    app.add_option("--format", p.format, "optimize output: json (default) or csv");
    app.add_option("--output", p.output, "write to file instead of stdout");
    app.add_flag("--grid-search", p.grid_search, "sweep: add the grid-search column");
    app.add_flag("--burn-in", p.burn_in, "start paths at 0 with a burn-in");
    app.add_flag("--self-test-fault", p.self_test_fault, "verify: inject one failing tolerance");

    struct Command {
        const char* name;
        const char* help;
        int (*fn)(const Params&);
    };
    const std::vector<Command> commands = {
        {"solve", "optimal threshold by closed form, fixed point or finite horizon", cmd_solve},
        {"sweep", "threshold estimates over a log grid of beta (CSV)", cmd_sweep},
        {"backtest", "compare strategies on simulated paths (CSV)", cmd_backtest},
        {"optimize", "grid search for the best threshold or band", cmd_optimize},
        {"bellman", "finite-horizon thresholds q_t (CSV)", cmd_bellman},
        {"passage", "first-passage Monte Carlo against closed forms", cmd_passage},
        {"verify", "built-in numerical self checks", cmd_verify},
    };
    for (const auto& c : commands) app.add_subcommand(c.name, c.help)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("usage_error", e.what());
        return 2;
    }

    try {
        for (const auto& c : commands) {
            if (app.got_subcommand(c.name)) return c.fn(p);
        }
    } catch (const UsageError& e) {
        print_error("usage_error", e.what());
        return 2;
    } catch (const Error& e) {
        print_error(to_string(e.kind()), e.what());
        return e.kind() == ErrorKind::domain || e.kind() == ErrorKind::empty_path ? 2 : 3;
    }
    return 2;
}
