#pragma once

// Quadrature weights for int P(p' | p) f(p') dp' with a Gaussian kernel,
// expressed on a fixed node set so that the integral becomes sum_j w_j f_j.

#include <cstddef>
#include <span>
#include <vector>

#include "qstar/sde.hpp"

namespace qstar::detail {

/// Contiguous band of weights starting at node `first`.
struct WeightRow {
    std::size_t first = 0;
    std::vector<double> w;

    template <class Vec>
    double apply(const Vec& f, std::size_t offset = 0) const {
        double sum = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) sum += w[j] * f[offset + first + j];
        return sum;
    }
};

enum class Tails {
    none,    // integrate over [nodes.front(), nodes.back()] only
    linear,  // extend f linearly beyond both end segments
};

/// Kernel integrated exactly against the piecewise-linear interpolant of f.
/// Segments further than `window` standard deviations from the mean are skipped.
WeightRow product_trapezoid_row(std::span<const double> nodes, Transition kernel, Tails tails,
                                double window = 8.0);

/// Plain Nystrom row: w_j = quad_weight_j * density(node_j).
WeightRow nystrom_row(std::span<const double> nodes, std::span<const double> quad_weights,
                      Transition kernel, double window = 8.0);

/// Composite 8-point Gauss-Legendre nodes and weights on [lo, hi].
void gauss_legendre_panels(double lo, double hi, int panels, std::vector<double>& nodes,
                           std::vector<double>& weights);

}  // namespace qstar::detail
