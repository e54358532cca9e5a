#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "uqkit/tensor.hpp"

// Inductive conformal prediction: nonconformity scoring on a calibration
// split, quantile thresholding, and per-sample prediction sets with
// coverage/efficiency metrics.

namespace uqkit {

struct NonconformityScores {
    std::vector<double> values;  // each is 1 - p_true, so in [0,1]

    std::size_t n() const { return values.size(); }
};

struct QuantileThreshold {
    double q_hat = 0.0;
    double alpha = 0.0;
    std::size_t n = 0;
    std::size_t k = 0;  // selected order-statistic index, 1-based
};

// Per-sample label subsets as bitmasks; limited to 64 classes.
class PredictionSets {
public:
    PredictionSets(std::vector<std::uint64_t> masks, std::size_t n_classes, bool force_argmax)
        : masks_(std::move(masks)), c_(n_classes), force_argmax_(force_argmax) {
        if (c_ > 64) throw std::invalid_argument("PredictionSets: more than 64 classes");
    }

    std::size_t n_samples() const { return masks_.size(); }
    std::size_t n_classes() const { return c_; }
    bool force_argmax() const { return force_argmax_; }

    bool contains(std::size_t i, std::size_t c) const {
        return (masks_[i] >> c) & 1ULL;
    }

    std::size_t set_size(std::size_t i) const {
        return static_cast<std::size_t>(__builtin_popcountll(masks_[i]));
    }

    const std::vector<std::uint64_t>& masks() const { return masks_; }

private:
    std::vector<std::uint64_t> masks_;
    std::size_t c_;
    bool force_argmax_;
};

// s_i = 1 - probability assigned to the true class.
inline NonconformityScores nonconformity_scores(const ProbMatrix& probs, const Labels& labels) {
    labels.check_against(probs.n_samples(), probs.n_classes());
    NonconformityScores s;
    s.values.resize(probs.n_samples());
    for (std::size_t i = 0; i < probs.n_samples(); ++i)
        s.values[i] = 1.0 - probs.at(i, labels.at(i));
    return s;
}

// Split-conformal quantile: the k-th smallest calibration score with
// k = ceil((n+1)(1-alpha)), clamped to [1, n].
inline QuantileThreshold calibration_quantile(const NonconformityScores& scores, double alpha) {
    const std::size_t n = scores.n();
    if (n == 0) throw std::invalid_argument("calibration_quantile: empty scores");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("calibration_quantile: alpha must be in (0,1)");

    std::size_t k = static_cast<std::size_t>(
        std::ceil(static_cast<double>(n + 1) * (1.0 - alpha) - 1e-12));
    if (k < 1) k = 1;
    if (k > n) k = n;

    std::vector<double> sorted = scores.values;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     sorted.end());
    QuantileThreshold q;
    q.q_hat = sorted[k - 1];
    q.alpha = alpha;
    q.n = n;
    q.k = k;
    return q;
}

// set_i = { c : 1 - probs[i,c] <= q_hat }; force_argmax additionally inserts
// the argmax class so no set is empty.
inline PredictionSets prediction_sets(const ProbMatrix& probs, const QuantileThreshold& q,
                                      bool force_argmax = true) {
    const std::size_t c = probs.n_classes();
    if (c > 64) throw std::invalid_argument("prediction_sets: more than 64 classes");
    std::vector<std::uint64_t> masks(probs.n_samples(), 0);
    for (std::size_t i = 0; i < probs.n_samples(); ++i) {
        std::uint64_t m = 0;
        for (std::size_t j = 0; j < c; ++j)
            if (1.0 - probs.at(i, j) <= q.q_hat) m |= 1ULL << j;
        if (force_argmax) m |= 1ULL << probs.argmax(i);
        masks[i] = m;
    }
    return PredictionSets(std::move(masks), c, force_argmax);
}

// Fraction of samples whose set contains the true label. The caller supplies
// the already-restricted test slice.
inline double empirical_coverage(const PredictionSets& sets, const Labels& labels) {
    if (sets.n_samples() == 0) throw std::invalid_argument("empirical_coverage: empty input");
    labels.check_against(sets.n_samples(), sets.n_classes());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < sets.n_samples(); ++i)
        if (sets.contains(i, labels.at(i))) ++hits;
    return static_cast<double>(hits) / static_cast<double>(sets.n_samples());
}

// Mean |set| — the efficiency metric (smaller is better).
inline double mean_set_size(const PredictionSets& sets) {
    if (sets.n_samples() == 0) throw std::invalid_argument("mean_set_size: empty input");
    std::size_t total = 0;
    for (std::size_t i = 0; i < sets.n_samples(); ++i) total += sets.set_size(i);
    return static_cast<double>(total) / static_cast<double>(sets.n_samples());
}

// Mean set size from a precomputed size->count table (e.g. a published
// frequency table).
inline double mean_set_size_from_counts(const std::map<std::size_t, std::size_t>& counts) {
    std::size_t n = 0, total = 0;
    for (const auto& [size, count] : counts) {
        n += count;
        total += size * count;
    }
    if (n == 0) throw std::invalid_argument("mean_set_size_from_counts: empty table");
    return static_cast<double>(total) / static_cast<double>(n);
}

struct SetSizeHistogram {
    std::map<std::size_t, std::size_t> global;                       // size -> count
    std::map<std::size_t, std::map<std::size_t, std::size_t>> per_class;  // key class -> (size -> count)
    bool keyed_by_predicted = false;
};

// Size-frequency tables, keyed by TRUE class by default. `probs` is only
// needed for predicted-label keying.
inline SetSizeHistogram set_size_histogram(const PredictionSets& sets, const Labels& labels,
                                           bool key_by_predicted = false,
                                           const ProbMatrix* probs = nullptr) {
    labels.check_against(sets.n_samples(), sets.n_classes());
    if (key_by_predicted && probs == nullptr)
        throw std::invalid_argument("set_size_histogram: predicted keying needs probabilities");
    SetSizeHistogram h;
    h.keyed_by_predicted = key_by_predicted;
    for (std::size_t i = 0; i < sets.n_samples(); ++i) {
        std::size_t size = sets.set_size(i);
        std::size_t key = key_by_predicted ? probs->argmax(i) : labels.at(i);
        ++h.global[size];
        ++h.per_class[key][size];
    }
    return h;
}

// Equal-width score histogram over [0,1]; last bin right-closed.
inline std::vector<std::size_t> score_histogram(const NonconformityScores& scores,
                                                std::size_t n_bins) {
    if (n_bins < 1) throw std::invalid_argument("score_histogram: need at least 1 bin");
    std::vector<std::size_t> counts(n_bins, 0);
    for (double s : scores.values) {
        std::size_t b = static_cast<std::size_t>(s * static_cast<double>(n_bins));
        if (b >= n_bins) b = n_bins - 1;
        ++counts[b];
    }
    return counts;
}

}  // namespace uqkit
