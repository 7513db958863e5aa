#pragma once

// Threshold as a function of beta at fixed (epsilon, gamma).

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qstar/analytic.hpp"

namespace qstar {

inline constexpr const char* kVersion = "1.0.0";

struct SweepConfig {
    double epsilon = 0.001;
    double gamma = 1.0;
    double beta_min = 1e-5;
    double beta_max = 3e-3;
    int points = 12;
    int grid_points = 201;
    bool grid_search = false;
    std::size_t steps = 10000000;
    std::size_t paths = 1;
    std::uint64_t seed = 1;
};

struct SweepRow {
    double beta = 0.0;
    double q_analytic = 0.0;
    double q_fixed_point = 0.0;
    double q_grid_search = 0.0;  // NaN when not requested or failed
    bool grid_search_noisy = false;
    double q_naive = 0.0;
    double q_brownian = 0.0;
    Regime regime = Regime::crossover;
    std::string note;  // per-row failures; the sweep carries on
};

namespace sweep {

/// Log-spaced beta grid, beta_min and beta_max included.
std::vector<double> beta_grid(const SweepConfig& config);

/// One row per beta. Grid search row i uses seed derive_seed(config.seed, i).
std::vector<SweepRow> run(const SweepConfig& config);

}  // namespace sweep
}  // namespace qstar
