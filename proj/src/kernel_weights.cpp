#include "kernel_weights.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>

#include "qstar/special.hpp"

namespace qstar::detail {

using special::normal_cdf;
using special::normal_mass;
using special::normal_pdf;
using special::normal_sf;

WeightRow product_trapezoid_row(std::span<const double> nodes, Transition kernel, Tails tails,
                                double window) {
    const std::size_t n = nodes.size();
    const double m = kernel.mean;
    const double s = kernel.std;
    const double lo = m - window * s;
    const double hi = m + window * s;

    // Segments [x_k, x_{k+1}] that intersect [lo, hi].
    const auto first_it = std::upper_bound(nodes.begin(), nodes.end(), lo);
    const auto last_it = std::lower_bound(nodes.begin(), nodes.end(), hi);
    std::size_t k_begin = first_it == nodes.begin() ? 0 : (first_it - nodes.begin()) - 1;
    std::size_t k_end = std::min<std::size_t>(last_it - nodes.begin(), n - 1);  // exclusive segment end
    const bool lower_tail = tails == Tails::linear && lo < nodes.front();
    const bool upper_tail = tails == Tails::linear && hi > nodes.back();
    if (lower_tail) k_begin = 0;
    if (upper_tail) k_end = n - 1;

    WeightRow row;
    if (k_begin >= k_end && !lower_tail && !upper_tail) return row;
    row.first = std::min(k_begin, n - 2);
    const std::size_t last_node = std::max(k_end, row.first + 1);
    row.w.assign(last_node - row.first + 1, 0.0);
    const auto at = [&](std::size_t j) -> double& { return row.w[j - row.first]; };

    for (std::size_t k = k_begin; k < k_end; ++k) {
        const double xa = nodes[k];
        const double xb = nodes[k + 1];
        const double h = xb - xa;
        const double za = (xa - m) / s;
        const double zb = (xb - m) / s;
        const double mass = normal_mass(za, zb);
        if (mass == 0.0) continue;
        // int (y - x_a) phi(y) dy over the segment
        const double first_moment = s * (normal_pdf(za) - normal_pdf(zb)) + (m - xa) * mass;
        at(k + 1) += first_moment / h;
        at(k) += mass - first_moment / h;
    }
    if (upper_tail) {
        const std::size_t last = n - 1;
        const double h = nodes[last] - nodes[last - 1];
        const double z = (nodes[last] - m) / s;
        const double mass = normal_sf(z);
        const double moment = s * normal_pdf(z) + (m - nodes[last]) * mass;
        at(last) += mass + moment / h;
        at(last - 1) -= moment / h;
    }
    if (lower_tail) {
        const double h = nodes[1] - nodes[0];
        const double z = (nodes[0] - m) / s;
        const double mass = normal_cdf(z);
        const double moment = s * normal_pdf(z) + (nodes[0] - m) * mass;
        at(0) += mass + moment / h;
        at(1) -= moment / h;
    }
    return row;
}

WeightRow nystrom_row(std::span<const double> nodes, std::span<const double> quad_weights,
                      Transition kernel, double window) {
    const double lo = kernel.mean - window * kernel.std;
    const double hi = kernel.mean + window * kernel.std;
    const auto first_it = std::lower_bound(nodes.begin(), nodes.end(), lo);
    const auto last_it = std::upper_bound(nodes.begin(), nodes.end(), hi);
    WeightRow row;
    row.first = static_cast<std::size_t>(first_it - nodes.begin());
    for (auto it = first_it; it != last_it; ++it) {
        const std::size_t j = static_cast<std::size_t>(it - nodes.begin());
        const double z = (*it - kernel.mean) / kernel.std;
        row.w.push_back(quad_weights[j] * normal_pdf(z) / kernel.std);
    }
    return row;
}

void gauss_legendre_panels(double lo, double hi, int panels, std::vector<double>& nodes,
                           std::vector<double>& weights) {
    using Rule = boost::math::quadrature::gauss<double, 8>;
    const auto& abscissa = Rule::abscissa();  // non-negative half, 4 entries
    const auto& rule_weights = Rule::weights();
    nodes.clear();
    weights.clear();
    const double width = (hi - lo) / panels;
    for (int k = 0; k < panels; ++k) {
        const double centre = lo + (k + 0.5) * width;
        const double half = 0.5 * width;
        for (std::size_t i = abscissa.size(); i-- > 0;) {
            nodes.push_back(centre - half * abscissa[i]);
            weights.push_back(half * rule_weights[i]);
        }
        for (std::size_t i = 0; i < abscissa.size(); ++i) {
            nodes.push_back(centre + half * abscissa[i]);
            weights.push_back(half * rule_weights[i]);
        }
    }
}

}  // namespace qstar::detail
