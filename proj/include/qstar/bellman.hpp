#pragma once

// Dynamic-programming side of the threshold problem: finite-horizon value
// iteration of
//
//   V_t(pi, p) = max_{|pi'| <= M} [ p pi' - Gamma |pi' - pi| + E V_{t+1}(pi', p') ]
//
// with terminal V_T built from the integrated predictability, and the
// stationary self-consistent equation for the gain-per-lot function g:
//
//   g(p) = p + Gamma [P(p' > q | p) - P(p' < -q | p)] + int_{-q}^{q} P(p' | p) g(p') dp',
//   g(q*) = Gamma.

#include <cstddef>
#include <vector>

#include "qstar/analytic.hpp"
#include "qstar/sde.hpp"
#include "qstar/special.hpp"

namespace qstar {

/// Tabulated function with linear interpolation between strictly increasing nodes.
struct GridFunction {
    std::vector<double> nodes;
    std::vector<double> values;

    void validate() const;
    /// Linear interpolation; constant extrapolation beyond the end nodes.
    double operator()(double x) const;
    bool strictly_increasing() const;
};

enum class Quadrature {
    trapezoid,       // product trapezoid: kernel integrated exactly against hat functions
    gauss_legendre,  // composite 8-point Gauss-Legendre Nystrom rule
};

struct GridSpec {
    double p_max = 0.0;
    int n_points = 201;
    Quadrature quadrature = Quadrature::trapezoid;

    /// n_points odd and >= 33, p_max >= 8 stationary_std(params).
    void validate(const OuParams& params) const;

    /// p_max = multiple * stationary_std(params).
    static GridSpec covering(const OuParams& params, int n_points, double multiple = 8.0);
};

/// One time slice of the finite-horizon solution.
struct ValueSlice {
    std::vector<double> values;  // row-major: values[k * n_p + i] = V_t(position_k, p_i)
};

struct BellmanSolution {
    std::vector<double> p_nodes;
    std::vector<double> position_nodes;
    std::vector<double> thresholds;      // q_t, index 0 = earliest, back() = terminal
    std::vector<ValueSlice> value_grids; // same indexing as thresholds (empty if not stored)
    std::vector<GridFunction> g_grids;   // g(t, .) on p_nodes (empty if not stored)
    std::size_t bang_bang_violations = 0;
    double max_interior_excess = 0.0;    // largest margin by which an interior node beat {-M, hold, +M}

    double value(std::size_t t, std::size_t pos, std::size_t p) const {
        return value_grids[t].values[pos * p_nodes.size() + p];
    }
};

struct FiniteHorizonOptions {
    int n_pos = 11;
    bool store_grids = true;
    /// Ties closer than tie_tol * gamma * max_pos are not counted as interior argmax.
    double tie_tol = 1e-12;
};

struct SelfConsistentSolution {
    GridFunction g;
    double q_star = 0.0;
    int iterations = 0;        // outer root-finder evaluations
    int inner_iterations = 0;  // accumulated inner sweeps (successive substitution only)
    double residual = 0.0;     // |g(q*) - gamma|
};

enum class InnerSolver {
    direct,                   // sparse LU of (I - K) g = b
    successive_substitution,  // g <- b + K g, damped by 1/2 if the residual oscillates
};

namespace bellman {

/// +M when p >= q, -M when p <= -q, otherwise prev_pos. Throws when |prev_pos| > M.
double policy(double p, double prev_pos, double q, double max_pos);

BellmanSolution finite_horizon_solve(const OuParams& params, const CostModel& cost,
                                     std::size_t horizon, const GridSpec& grid,
                                     const FiniteHorizonOptions& options = {});

/// g(q) - gamma for a candidate threshold q; the stationary root condition.
double stationary_gap(const OuParams& params, const CostModel& cost, double q,
                      const GridSpec& grid, const Tolerances& tol = {},
                      InnerSolver solver = InnerSolver::direct);

/// Solves g on [-q, q] for a fixed candidate q.
GridFunction stationary_g_for(const OuParams& params, const CostModel& cost, double q,
                              const GridSpec& grid, const Tolerances& tol = {},
                              InnerSolver solver = InnerSolver::direct,
                              int* inner_iterations = nullptr);

SelfConsistentSolution stationary_g_solve(const OuParams& params, const CostModel& cost,
                                          const GridSpec& grid, const Tolerances& tol = {},
                                          InnerSolver solver = InnerSolver::direct);

/// Linear-interpolated root of g(p) = gamma.
double extract_threshold(const GridFunction& g, double gamma);

}  // namespace bellman
}  // namespace qstar
