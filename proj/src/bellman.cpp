#include "qstar/bellman.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <string>

#include "kernel_weights.hpp"
#include "qstar/errors.hpp"

namespace qstar {

void GridFunction::validate() const {
    if (nodes.size() != values.size()) throw DomainError("GridFunction: length mismatch");
    if (nodes.size() < 2) throw DomainError("GridFunction: need at least two nodes");
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        if (!(nodes[i] > nodes[i - 1])) throw DomainError("GridFunction: nodes not increasing");
    }
}

double GridFunction::operator()(double x) const {
    if (x <= nodes.front()) return values.front();
    if (x >= nodes.back()) return values.back();
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - nodes.begin());
    const double t = (x - nodes[j - 1]) / (nodes[j] - nodes[j - 1]);
    return values[j - 1] + t * (values[j] - values[j - 1]);
}

bool GridFunction::strictly_increasing() const {
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (!(values[i] > values[i - 1])) return false;
    }
    return true;
}

void GridSpec::validate(const OuParams& params) const {
    if (n_points < 33 || n_points % 2 == 0) {
        throw DomainError("GridSpec: n_points must be odd and >= 33, got " +
                          std::to_string(n_points));
    }
    const double needed = 8.0 * sde::stationary_std(params);
    if (!(p_max >= needed * (1.0 - 1e-12))) {
        throw DomainError("GridSpec: p_max must be >= 8 stationary_std = " +
                          std::to_string(needed));
    }
}

GridSpec GridSpec::covering(const OuParams& params, int n_points, double multiple) {
    GridSpec grid;
    grid.p_max = std::max(multiple, 8.0) * sde::stationary_std(params);
    grid.n_points = n_points;
    return grid;
}

namespace bellman {

namespace {

// Nodes symmetric about zero bit-for-bit: x_{n-1-i} = -x_i.
std::vector<double> symmetric_nodes(double half_width, int n) {
    std::vector<double> x(static_cast<std::size_t>(n));
    const double h = half_width / (n - 1);
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = (2 * i - (n - 1)) * h;
    x.front() = -half_width;
    x.back() = half_width;
    return x;
}

// First upward crossing of gamma on the p >= 0 half of a tabulated g.
double crossing_from_centre(const std::vector<double>& p, const std::vector<double>& g,
                            double gamma) {
    const std::size_t c = p.size() / 2;
    if (g[c] >= gamma) return p[c];
    for (std::size_t i = c + 1; i < p.size(); ++i) {
        if (g[i] >= gamma) {
            const double t = (gamma - g[i - 1]) / (g[i] - g[i - 1]);
            return p[i - 1] + t * (p[i] - p[i - 1]);
        }
    }
    throw ResolutionError("finite_horizon_solve: g never reaches gamma on the grid; increase p_max");
}

struct StationarySystem {
    std::vector<double> nodes;
    std::vector<double> quad_weights;  // Gauss-Legendre only
    std::vector<double> rhs;
    std::vector<detail::WeightRow> rows;
};

StationarySystem build_system(const OuParams& params, const CostModel& cost, double q,
                              const GridSpec& grid) {
    StationarySystem sys;
    if (grid.quadrature == Quadrature::trapezoid) {
        sys.nodes = symmetric_nodes(q, grid.n_points);
    } else {
        detail::gauss_legendre_panels(-q, q, std::max(1, grid.n_points / 8), sys.nodes,
                                      sys.quad_weights);
    }
    const std::size_t n = sys.nodes.size();
    sys.rhs.resize(n);
    sys.rows.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double p = sys.nodes[i];
        sys.rhs[i] = p + cost.gamma * (sde::prob_above(q, p, params) -
                                       sde::prob_below(-q, p, params));
        const Transition t = sde::transition(p, params);
        sys.rows[i] = grid.quadrature == Quadrature::trapezoid
                          ? detail::product_trapezoid_row(sys.nodes, t, detail::Tails::none)
                          : detail::nystrom_row(sys.nodes, sys.quad_weights, t);
    }
    return sys;
}

std::vector<double> solve_direct(const StationarySystem& sys) {
    const std::size_t n = sys.nodes.size();
    std::size_t nnz = 0;
    for (const auto& row : sys.rows) nnz += row.w.size();
    Eigen::VectorXd b(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) b[static_cast<Eigen::Index>(i)] = sys.rhs[i];
    Eigen::VectorXd g;

    if (nnz * 4 > n * n) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                                      static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            const auto& row = sys.rows[i];
            for (std::size_t j = 0; j < row.w.size(); ++j) {
                a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(row.first + j)) -=
                    row.w[j];
            }
        }
        g = a.partialPivLu().solve(b);
    } else {
        std::vector<Eigen::Triplet<double>> triplets;
        triplets.reserve(nnz + n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto ii = static_cast<int>(i);
            triplets.emplace_back(ii, ii, 1.0);
            const auto& row = sys.rows[i];
            for (std::size_t j = 0; j < row.w.size(); ++j) {
                triplets.emplace_back(ii, static_cast<int>(row.first + j), -row.w[j]);
            }
        }
        Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        a.setFromTriplets(triplets.begin(), triplets.end());
        a.makeCompressed();
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(a);
        if (lu.info() != Eigen::Success) {
            throw DivergenceError("stationary solve: kernel system is singular");
        }
        g = lu.solve(b);
    }
    if (!g.allFinite()) throw DivergenceError("stationary solve: non-finite solution");
    return {g.data(), g.data() + g.size()};
}

std::vector<double> solve_successive(const StationarySystem& sys, const Tolerances& tol,
                                     double scale, int& sweeps) {
    const std::size_t n = sys.nodes.size();
    std::vector<double> g = sys.rhs;
    std::vector<double> next(n);
    double damping = 1.0;
    double prev_change = std::numeric_limits<double>::infinity();
    int growing = 0;
    const long max_sweeps = 1000L * tol.max_iter;
    for (long sweep = 1; sweep <= max_sweeps; ++sweep) {
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] = sys.rhs[i] + sys.rows[i].apply(g);
            change = std::max(change, std::fabs(next[i] - g[i]));
        }
        for (std::size_t i = 0; i < n; ++i) g[i] += damping * (next[i] - g[i]);
        ++sweeps;
        if (!std::isfinite(change)) throw DivergenceError("successive substitution overflowed");
        if (change < tol.bound(scale)) return g;
        growing = change > prev_change ? growing + 1 : 0;
        prev_change = change;
        if (growing >= 3) {
            if (damping < 1.0) {
                throw DivergenceError("successive substitution: residual keeps growing");
            }
            damping = 0.5;
            growing = 0;
        }
    }
    throw ConvergenceError("successive substitution did not converge", 0.0, prev_change);
}

double g_at_threshold(const StationarySystem& sys, const std::vector<double>& g,
                      const OuParams& params, const CostModel& cost, double q,
                      Quadrature quadrature) {
    if (quadrature == Quadrature::trapezoid) return g.back();
    // Nystrom interpolation at p = q.
    const auto row = detail::nystrom_row(sys.nodes, sys.quad_weights, sde::transition(q, params));
    return q + cost.gamma * (sde::prob_above(q, q, params) - sde::prob_below(-q, q, params)) +
           row.apply(g);
}

void check_inputs(const OuParams& params, const CostModel& cost, const GridSpec& grid,
                  const Tolerances& tol) {
    params.validate();
    cost.validate_for_solver();
    grid.validate(params);
    tol.validate();
}

}  // namespace

double policy(double p, double prev_pos, double q, double max_pos) {
    if (!(std::fabs(prev_pos) <= max_pos)) {
        throw DomainError("policy: |prev_pos| exceeds max_pos");
    }
    if (p >= q) return max_pos;
    if (p <= -q) return -max_pos;
    return prev_pos;
}

GridFunction stationary_g_for(const OuParams& params, const CostModel& cost, double q,
                              const GridSpec& grid, const Tolerances& tol, InnerSolver solver,
                              int* inner_iterations) {
    check_inputs(params, cost, grid, tol);
    if (!(q > 0.0)) throw DomainError("stationary_g_for: q must be > 0");
    const StationarySystem sys = build_system(params, cost, q, grid);
    int sweeps = 0;
    std::vector<double> g = solver == InnerSolver::direct
                                ? solve_direct(sys)
                                : solve_successive(sys, tol, cost.gamma, sweeps);
    if (inner_iterations != nullptr) *inner_iterations += sweeps;
    return {sys.nodes, std::move(g)};
}

double stationary_gap(const OuParams& params, const CostModel& cost, double q,
                      const GridSpec& grid, const Tolerances& tol, InnerSolver solver) {
    check_inputs(params, cost, grid, tol);
    if (!(q > 0.0)) throw DomainError("stationary_gap: q must be > 0");
    const StationarySystem sys = build_system(params, cost, q, grid);
    int sweeps = 0;
    const std::vector<double> g = solver == InnerSolver::direct
                                      ? solve_direct(sys)
                                      : solve_successive(sys, tol, cost.gamma, sweeps);
    return g_at_threshold(sys, g, params, cost, q, grid.quadrature) - cost.gamma;
}

SelfConsistentSolution stationary_g_solve(const OuParams& params, const CostModel& cost,
                                          const GridSpec& grid, const Tolerances& tol,
                                          InnerSolver solver) {
    check_inputs(params, cost, grid, tol);
    SelfConsistentSolution out;
    int inner = 0;
    const auto gap = [&](double q) {
        ++out.iterations;
        const StationarySystem sys = build_system(params, cost, q, grid);
        int sweeps = 0;
        const std::vector<double> g = solver == InnerSolver::direct
                                          ? solve_direct(sys)
                                          : solve_successive(sys, tol, cost.gamma, sweeps);
        inner += sweeps;
        return g_at_threshold(sys, g, params, cost, q, grid.quadrature) - cost.gamma;
    };

    // Bracket by stepping up from below. For q far above q* the chain almost
    // never exits and (I - K) is singular to working precision, so gap(q)
    // is only evaluated up to the first sign change.
    const double f_tol = tol.bound(cost.gamma);
    constexpr double kGrowth = 1.5;
    double lo = 0.5 * cost.gamma * params.epsilon;
    double gap_lo = gap(lo);
    for (int i = 0; i < 30 && gap_lo > 0.0; ++i) {
        lo *= 0.5;
        gap_lo = gap(lo);
    }
    if (gap_lo > 0.0) throw BracketError("stationary_g_solve: could not bracket q* from below");
    double hi = lo;
    double gap_hi = gap_lo;
    while (gap_hi < 0.0 && hi < cost.gamma) {
        lo = hi;
        gap_lo = gap_hi;
        hi = std::min(hi * kGrowth, cost.gamma);
        gap_hi = gap(hi);
    }
    double q_star;
    if (std::fabs(gap_hi) <= f_tol) {
        q_star = hi;
    } else if (gap_hi < 0.0) {
        throw BracketError("stationary_g_solve: g(gamma) < gamma, no threshold below gamma");
    } else {
        const double x_tol = std::max(4.0 * DBL_EPSILON, 0.01 * tol.rel_tol) * hi;
        q_star = special::find_root(gap, lo, hi, f_tol, x_tol, tol.max_iter).x;
    }

    out.q_star = q_star;
    out.g = stationary_g_for(params, cost, q_star, grid, tol, solver, &inner);
    out.inner_iterations = inner;
    const StationarySystem sys = build_system(params, cost, q_star, grid);
    out.residual = std::fabs(
        g_at_threshold(sys, out.g.values, params, cost, q_star, grid.quadrature) - cost.gamma);
    return out;
}

double extract_threshold(const GridFunction& g, double gamma) {
    g.validate();
    if (!g.strictly_increasing()) throw DomainError("extract_threshold: g must be increasing");
    if (gamma < g.values.front() || gamma > g.values.back()) {
        throw BracketError("extract_threshold: gamma outside the range of g");
    }
    const auto it = std::lower_bound(g.values.begin(), g.values.end(), gamma);
    const std::size_t j = static_cast<std::size_t>(it - g.values.begin());
    if (j == 0) return g.nodes.front();
    const double t = (gamma - g.values[j - 1]) / (g.values[j] - g.values[j - 1]);
    return g.nodes[j - 1] + t * (g.nodes[j] - g.nodes[j - 1]);
}

BellmanSolution finite_horizon_solve(const OuParams& params, const CostModel& cost,
                                     std::size_t horizon, const GridSpec& grid,
                                     const FiniteHorizonOptions& options) {
    params.validate();
    cost.validate_for_solver();
    grid.validate(params);
    if (horizon < 1) throw DomainError("finite_horizon_solve: horizon must be >= 1");
    if (options.n_pos < 3) throw DomainError("finite_horizon_solve: n_pos must be >= 3");

    BellmanSolution sol;
    sol.p_nodes = symmetric_nodes(grid.p_max, grid.n_points);
    sol.position_nodes = symmetric_nodes(cost.max_pos, options.n_pos);
    const auto& p = sol.p_nodes;
    const auto& pos = sol.position_nodes;
    const std::size_t n_p = p.size();
    const std::size_t n_k = pos.size();
    const std::size_t top = n_k - 1;
    const double gamma = cost.gamma;
    const double tie = options.tie_tol * gamma * cost.max_pos;

    std::vector<detail::WeightRow> rows(n_p);
    for (std::size_t i = 0; i < n_p; ++i) {
        rows[i] = detail::product_trapezoid_row(p, sde::transition(p[i], params),
                                                detail::Tails::linear);
    }

    sol.thresholds.assign(horizon, 0.0);
    if (options.store_grids) {
        sol.value_grids.resize(horizon);
        sol.g_grids.resize(horizon);
    }

    std::vector<double> objective(n_k * n_p);  // objective[l * n_p + i], cost excluded
    std::vector<double> value(n_k * n_p);
    std::vector<double> next_value;
    std::vector<double> g(n_p);

    for (std::size_t step = 0; step < horizon; ++step) {
        const std::size_t t = horizon - 1 - step;
        if (step == 0) {
            for (std::size_t l = 0; l < n_k; ++l) {
                for (std::size_t i = 0; i < n_p; ++i) {
                    objective[l * n_p + i] = sde::integrated_predictability(p[i], params) * pos[l];
                }
            }
        } else {
            for (std::size_t l = 0; l < n_k; ++l) {
                for (std::size_t i = 0; i < n_p; ++i) {
                    objective[l * n_p + i] = p[i] * pos[l] + rows[i].apply(next_value, l * n_p);
                }
            }
        }

        for (std::size_t i = 0; i < n_p; ++i) {
            for (std::size_t k = 0; k < n_k; ++k) {
                double best_all = -std::numeric_limits<double>::infinity();
                for (std::size_t l = 0; l < n_k; ++l) {
                    const double v = objective[l * n_p + i] - gamma * std::fabs(pos[l] - pos[k]);
                    best_all = std::max(best_all, v);
                }
                double best_allowed = objective[k * n_p + i];
                best_allowed = std::max(best_allowed,
                                        objective[i] - gamma * std::fabs(pos[0] - pos[k]));
                best_allowed = std::max(
                    best_allowed, objective[top * n_p + i] - gamma * std::fabs(pos[top] - pos[k]));
                const double excess = best_all - best_allowed;
                if (excess > tie) ++sol.bang_bang_violations;
                sol.max_interior_excess = std::max(sol.max_interior_excess, excess);
                value[k * n_p + i] = best_all;
            }
            g[i] = (objective[top * n_p + i] - objective[i]) / (pos[top] - pos[0]);
        }

        sol.thresholds[t] = crossing_from_centre(p, g, gamma);
        if (options.store_grids) {
            sol.value_grids[t].values = value;
            sol.g_grids[t] = GridFunction{p, g};
        }
        next_value.swap(value);
        value.resize(n_k * n_p);
    }
    return sol;
}

}  // namespace bellman
}  // namespace qstar
