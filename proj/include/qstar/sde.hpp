#pragma once

// Discrete Ornstein-Uhlenbeck predictor
//
//   p_{t+1} = p_t - epsilon * p_t + beta * xi_t,   xi_t ~ N(0, 1) iid
//
// with counter-based noise: xi_k depends only on (seed, k), so a path is
// reproducible regardless of how its generation is chunked or scheduled.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace qstar {

/// Predictor dynamics: per-step mean reversion epsilon in (0, 1] and
/// innovation standard deviation beta > 0 (price units).
struct OuParams {
    double epsilon = 0.0;
    double beta = 0.0;

    /// Throws DomainError unless 0 < epsilon <= 1 and beta > 0.
    void validate() const;
};

/// Where a simulated path starts.
struct PathStart {
    enum class Kind { fixed, stationary, burn_in };

    Kind kind = Kind::stationary;
    double value = 0.0;

    static PathStart at(double p) { return {Kind::fixed, p}; }
    /// p_0 = stationary_std * N(0,1).
    static PathStart stationary() { return {Kind::stationary, 0.0}; }
    /// p = 0 followed by ceil(10 / epsilon) discarded steps.
    static PathStart zero_with_burn_in() { return {Kind::burn_in, 0.0}; }
};

struct PathSample {
    std::vector<double> values;
    std::uint64_t seed = 0;
    OuParams params;
};

/// Gaussian one-step transition law of the predictor.
struct Transition {
    double mean = 0.0;
    double std = 0.0;
};

namespace sde {

// Noise streams keyed alongside the seed so the start draw and the
// burn-in never reuse innovation indices of the recorded path.
inline constexpr std::uint64_t kInnovationStream = 0;
inline constexpr std::uint64_t kStartStream = 1;
inline constexpr std::uint64_t kBurnInStream = 2;

/// Philox4x32-10 block: 128-bit counter, 64-bit key.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::uint64_t key);

/// Standard normal variate number `index` of (seed, stream). Box-Muller on
/// Philox output; consecutive even/odd indices share one block.
double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

/// Fills out[i] with standard_normal(seed, stream, first + i).
void fill_standard_normals(std::uint64_t seed, std::uint64_t stream, std::uint64_t first,
                           std::span<double> out);

/// Sequential reader over one noise stream, reusing each Box-Muller pair.
class NormalCursor {
public:
    NormalCursor(std::uint64_t seed, std::uint64_t stream, std::uint64_t first = 0)
        : seed_(seed), stream_(stream), index_(first) {}

    double next();
    std::uint64_t index() const { return index_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t index_;
    std::uint64_t cached_block_ = ~std::uint64_t{0};
    std::array<double, 2> cached_{};
};

/// Independent per-path seed derived from a master seed and a path index.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

inline double step(double p, double xi, const OuParams& params) {
    return p - params.epsilon * p + params.beta * xi;
}

/// Path of n values p_0 .. p_{n-1}. Throws EmptyPathError for n = 0.
PathSample simulate_path(const OuParams& params, std::size_t n, std::uint64_t seed,
                         PathStart start = PathStart::stationary());

/// Exact stationary deviation of the discrete chain, beta / sqrt(2 eps - eps^2).
double stationary_std(const OuParams& params);

/// Number of steps discarded by PathStart::zero_with_burn_in.
std::size_t burn_in_steps(const OuParams& params);

/// p_inf(p) = sum_n E[p_{t+n} | p_t = p] = p / epsilon.
double integrated_predictability(double p, const OuParams& params);

/// Gaussian kernel P(p' | p): mean (1 - eps) p, std beta.
Transition transition(double p, const OuParams& params);

/// P(p_{t+1} > q | p_t = p).
double prob_above(double q, double p, const OuParams& params);

/// P(p_{t+1} < q | p_t = p).
double prob_below(double q, double p, const OuParams& params);

}  // namespace sde
}  // namespace qstar
