#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "uqkit/tensor.hpp"

// Global-magnitude sparsity diagnostics. Thresholding follows the pruning
// rule f(w) = 0 iff |w| < t (strict), but weights are never modified.

namespace uqkit {

// The report's default magnitude range boundaries.
inline const std::vector<double> kDefaultSparsityBoundaries = {1e-5, 5e-5, 1e-4, 5e-4, 1e-3, 5e-3};

// Fraction of weights with |w| strictly below t.
inline double sparsity_at_threshold(const WeightVector& weights, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("sparsity_at_threshold: threshold must be positive");
    if (weights.size() == 0) throw std::invalid_argument("sparsity_at_threshold: empty weights");
    std::size_t below = 0;
    for (double w : weights.values)
        if (std::abs(w) < t) ++below;
    return static_cast<double>(below) / static_cast<double>(weights.size());
}

struct SparsityProfile {
    struct Range {
        double lo = 0.0;                                   // inclusive
        double hi = std::numeric_limits<double>::infinity();  // exclusive
        std::size_t count = 0;
        double percent = 0.0;
        double cumulative_percent = 0.0;
    };
    std::vector<Range> ranges;
    std::size_t total = 0;
};

// Range r counts |w| in [b_{r-1}, b_r) with b_{-1} = 0; final range is
// [b_last, inf).
inline SparsityProfile sparsity_profile(const WeightVector& weights,
                                        const std::vector<double>& boundaries =
                                            kDefaultSparsityBoundaries) {
    if (boundaries.empty()) throw std::invalid_argument("sparsity_profile: no boundaries");
    for (std::size_t i = 0; i < boundaries.size(); ++i) {
        if (!(boundaries[i] > 0.0))
            throw std::invalid_argument("sparsity_profile: boundaries must be positive");
        if (i > 0 && !(boundaries[i] > boundaries[i - 1]))
            throw std::invalid_argument("sparsity_profile: boundaries must be strictly ascending");
    }
    if (weights.size() == 0) throw std::invalid_argument("sparsity_profile: empty weights");

    SparsityProfile p;
    p.total = weights.size();
    p.ranges.resize(boundaries.size() + 1);
    for (std::size_t r = 0; r < boundaries.size() + 1; ++r) {
        p.ranges[r].lo = r == 0 ? 0.0 : boundaries[r - 1];
        p.ranges[r].hi = r < boundaries.size() ? boundaries[r]
                                               : std::numeric_limits<double>::infinity();
    }
    for (double w : weights.values) {
        double mag = std::abs(w);
        std::size_t r = static_cast<std::size_t>(
            std::upper_bound(boundaries.begin(), boundaries.end(), mag) - boundaries.begin());
        ++p.ranges[r].count;
    }
    double cum = 0.0;
    for (auto& r : p.ranges) {
        r.percent = 100.0 * static_cast<double>(r.count) / static_cast<double>(p.total);
        cum += r.percent;
        r.cumulative_percent = cum;
    }
    p.ranges.back().cumulative_percent = 100.0;
    return p;
}

struct ThresholdSearchResult {
    double threshold = 0.0;
    double achieved = 0.0;
};

// Smallest candidate threshold (0, the distinct magnitudes, or just above
// the max magnitude) whose sparsity reaches the target.
inline ThresholdSearchResult threshold_for_target_sparsity(const WeightVector& weights,
                                                           double kappa) {
    if (!(kappa >= 0.0 && kappa <= 1.0))
        throw std::invalid_argument("threshold_for_target_sparsity: kappa must be in [0,1]");
    if (weights.size() == 0)
        throw std::invalid_argument("threshold_for_target_sparsity: empty weights");
    if (kappa == 0.0) return {0.0, 0.0};

    std::vector<double> mags;
    mags.reserve(weights.size());
    for (double w : weights.values) mags.push_back(std::abs(w));
    std::sort(mags.begin(), mags.end());

    const double w_total = static_cast<double>(mags.size());
    // At candidate t = mags[i] (ascending, duplicates skipped), the strict
    // rule counts every magnitude below mags[i].
    for (std::size_t i = 0; i < mags.size(); ++i) {
        if (i + 1 < mags.size() && mags[i + 1] == mags[i]) continue;
        double frac = static_cast<double>(std::lower_bound(mags.begin(), mags.end(), mags[i]) -
                                          mags.begin()) /
                      w_total;
        if (frac >= kappa && mags[i] > 0.0) return {mags[i], frac};
    }
    double top = mags.back() * (1.0 + std::numeric_limits<double>::epsilon() * 4);
    if (top == 0.0) top = std::numeric_limits<double>::min();
    return {top, 1.0};
}

}  // namespace uqkit
