#include "qstar/sde.hpp"

#include <cmath>
#include <string>

#include "qstar/errors.hpp"
#include "qstar/special.hpp"

namespace qstar {

void OuParams::validate() const {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) {
        throw DomainError("epsilon must lie in (0, 1], got " + std::to_string(epsilon));
    }
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw DomainError("beta must be positive, got " + std::to_string(beta));
    }
}

namespace sde {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

// 53-bit uniform in (0, 1].
inline double to_unit_open_closed(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

inline std::array<double, 2> normal_pair(std::uint64_t seed, std::uint64_t stream,
                                         std::uint64_t block) {
    const auto out = philox4x32({static_cast<std::uint32_t>(block),
                                 static_cast<std::uint32_t>(block >> 32),
                                 static_cast<std::uint32_t>(stream),
                                 static_cast<std::uint32_t>(stream >> 32)},
                                seed);
    const double u1 = to_unit_open_closed(out[0], out[1]);
    const double u2 = to_unit_open_closed(out[2], out[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * special::kPi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::uint64_t key) {
    std::uint32_t k0 = static_cast<std::uint32_t>(key);
    std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
        k0 += kPhiloxW0;
        k1 += kPhiloxW1;
    }
    return ctr;
}

double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    return normal_pair(seed, stream, index / 2)[index % 2];
}

void fill_standard_normals(std::uint64_t seed, std::uint64_t stream, std::uint64_t first,
                           std::span<double> out) {
    std::size_t i = 0;
    std::uint64_t index = first;
    if (index % 2 == 1 && i < out.size()) {
        out[i++] = standard_normal(seed, stream, index++);
    }
    for (; i + 1 < out.size(); i += 2, index += 2) {
        const auto pair = normal_pair(seed, stream, index / 2);
        out[i] = pair[0];
        out[i + 1] = pair[1];
    }
    if (i < out.size()) out[i] = standard_normal(seed, stream, index);
}

double NormalCursor::next() {
    const std::uint64_t block = index_ / 2;
    if (block != cached_block_) {
        cached_ = normal_pair(seed_, stream_, block);
        cached_block_ = block;
    }
    return cached_[index_++ % 2];
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master ^ splitmix64(index + 0x632BE59BD9B4E019ull));
}

std::size_t burn_in_steps(const OuParams& params) {
    params.validate();
    return static_cast<std::size_t>(std::ceil(10.0 / params.epsilon));
}

PathSample simulate_path(const OuParams& params, std::size_t n, std::uint64_t seed,
                         PathStart start) {
    params.validate();
    if (n == 0) throw EmptyPathError("simulate_path: n must be >= 1");

    double p0 = 0.0;
    switch (start.kind) {
        case PathStart::Kind::fixed:
            p0 = start.value;
            break;
        case PathStart::Kind::stationary:
            p0 = stationary_std(params) * standard_normal(seed, kStartStream, 0);
            break;
        case PathStart::Kind::burn_in: {
            const std::size_t burn = burn_in_steps(params);
            for (std::size_t k = 0; k < burn; ++k) {
                p0 = step(p0, standard_normal(seed, kBurnInStream, k), params);
            }
            break;
        }
    }

    PathSample sample;
    sample.seed = seed;
    sample.params = params;
    sample.values.resize(n);
    std::vector<double> noise(n - 1);
    fill_standard_normals(seed, kInnovationStream, 0, noise);
    double p = p0;
    sample.values[0] = p;
    for (std::size_t k = 1; k < n; ++k) {
        p = step(p, noise[k - 1], params);
        sample.values[k] = p;
    }
    return sample;
}

double stationary_std(const OuParams& params) {
    params.validate();
    const double e = params.epsilon;
    return params.beta / std::sqrt(2.0 * e - e * e);
}

double integrated_predictability(double p, const OuParams& params) {
    params.validate();
    return p / params.epsilon;
}

Transition transition(double p, const OuParams& params) {
    return {(1.0 - params.epsilon) * p, params.beta};
}

double prob_above(double q, double p, const OuParams& params) {
    const Transition t = transition(p, params);
    return special::normal_sf((q - t.mean) / t.std);
}

double prob_below(double q, double p, const OuParams& params) {
    const Transition t = transition(p, params);
    return special::normal_cdf((q - t.mean) / t.std);
}

}  // namespace sde
}  // namespace qstar
