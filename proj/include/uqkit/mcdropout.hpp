#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "uqkit/tensor.hpp"

// Uncertainty aggregation over stochastic forward passes: predictive
// entropy (total), expected entropy (aleatoric proxy), mutual information
// (epistemic proxy), per-class dispersion, and the class/correctness
// breakdowns used in the reports.

namespace uqkit {

// Probabilities below this are treated as exact zeros inside entropy.
inline constexpr double kEntropyFloor = 1e-12;
inline constexpr double kMiClampFloor = -1e-12;

// -sum p ln p in nats; 0 ln 0 := 0.
inline double entropy_nats(const double* p, std::size_t c) {
    double h = 0.0;
    for (std::size_t j = 0; j < c; ++j)
        if (p[j] > kEntropyFloor) h -= p[j] * std::log(p[j]);
    return h;
}

// Element-wise mean over the pass axis.
inline ProbMatrix mean_prediction(const PassTensor& passes) {
    const std::size_t t = passes.n_passes(), n = passes.n_samples(), c = passes.n_classes();
    std::vector<double> mean(n * c, 0.0);
    for (std::size_t k = 0; k < t; ++k)
        for (std::size_t i = 0; i < n * c; ++i) mean[i] += passes.values()[k * n * c + i];
    const double inv_t = 1.0 / static_cast<double>(t);
    for (double& v : mean) v *= inv_t;
    // Mean of row-stochastic rows can drift past 1 by a few ulp.
    for (double& v : mean) v = std::clamp(v, 0.0, 1.0);
    return ProbMatrix(n, c, std::move(mean));
}

inline std::vector<double> predictive_entropy(const ProbMatrix& mean_probs) {
    std::vector<double> h(mean_probs.n_samples());
    for (std::size_t i = 0; i < mean_probs.n_samples(); ++i)
        h[i] = entropy_nats(mean_probs.values().data() + i * mean_probs.n_classes(),
                            mean_probs.n_classes());
    return h;
}

// (1/T) sum_t H[p_t] per sample.
inline std::vector<double> expected_entropy(const PassTensor& passes) {
    const std::size_t t = passes.n_passes(), n = passes.n_samples(), c = passes.n_classes();
    std::vector<double> acc(n, 0.0);
    for (std::size_t k = 0; k < t; ++k)
        for (std::size_t i = 0; i < n; ++i)
            acc[i] += entropy_nats(passes.values().data() + (k * n + i) * c, c);
    const double inv_t = 1.0 / static_cast<double>(t);
    for (double& v : acc) v *= inv_t;
    return acc;
}

// MI = H[mean prediction] - mean per-pass entropy, clamped at 0 for float
// noise down to kMiClampFloor; anything more negative is an internal error.
inline std::vector<double> mutual_information(const PassTensor& passes) {
    auto h_pred = predictive_entropy(mean_prediction(passes));
    auto h_avg = expected_entropy(passes);
    std::vector<double> mi(h_pred.size());
    for (std::size_t i = 0; i < mi.size(); ++i) {
        double v = h_pred[i] - h_avg[i];
        if (v < 0.0) {
            if (v < kMiClampFloor)
                throw std::runtime_error("mutual_information: negative beyond tolerance at sample " +
                                         std::to_string(i));
            v = 0.0;
        }
        mi[i] = v;
    }
    return mi;
}

// Population standard deviation (divide by T) of each class probability
// across passes; N x C row-major.
inline std::vector<double> classwise_std(const PassTensor& passes) {
    const std::size_t t = passes.n_passes(), n = passes.n_samples(), c = passes.n_classes();
    std::vector<double> mean(n * c, 0.0), out(n * c, 0.0);
    for (std::size_t k = 0; k < t; ++k)
        for (std::size_t i = 0; i < n * c; ++i) mean[i] += passes.values()[k * n * c + i];
    const double inv_t = 1.0 / static_cast<double>(t);
    for (double& v : mean) v *= inv_t;
    for (std::size_t k = 0; k < t; ++k)
        for (std::size_t i = 0; i < n * c; ++i) {
            double d = passes.values()[k * n * c + i] - mean[i];
            out[i] += d * d;
        }
    for (double& v : out) v = std::sqrt(v * inv_t);
    return out;
}

struct UncertaintyTable {
    struct Row {
        std::size_t pred = 0;
        double predictive_entropy = 0.0;
        double expected_entropy = 0.0;
        double mutual_information = 0.0;
        double max_confidence = 0.0;
        double confidence_std = 0.0;  // std of the argmax class across passes
    };
    std::vector<Row> rows;
    std::size_t n_passes = 0;
    std::size_t n_classes = 0;
};

inline UncertaintyTable uncertainty_table(const PassTensor& passes) {
    auto mean = mean_prediction(passes);
    auto h_pred = predictive_entropy(mean);
    auto h_avg = expected_entropy(passes);
    auto mi = mutual_information(passes);
    auto stds = classwise_std(passes);

    UncertaintyTable tbl;
    tbl.n_passes = passes.n_passes();
    tbl.n_classes = passes.n_classes();
    tbl.rows.resize(passes.n_samples());
    const std::size_t c = passes.n_classes();
    for (std::size_t i = 0; i < passes.n_samples(); ++i) {
        auto& r = tbl.rows[i];
        r.pred = mean.argmax(i);
        r.predictive_entropy = h_pred[i];
        r.expected_entropy = h_avg[i];
        r.mutual_information = mi[i];
        r.max_confidence = mean.at(i, r.pred);
        r.confidence_std = stds[i * c + r.pred];
    }
    return tbl;
}

struct ClassUncertaintySummary {
    struct PerClass {
        std::optional<double> mean_entropy_correct;
        std::optional<double> mean_entropy_incorrect;
        std::size_t count_correct = 0;
        std::size_t count_incorrect = 0;
    };
    std::map<std::size_t, PerClass> classes;  // keyed by TRUE class by default
    bool keyed_by_predicted = false;
};

// Group entropies by class, split by prediction correctness. Empty groups
// are reported as absent, never as zero.
inline ClassUncertaintySummary entropy_by_correctness(const std::vector<double>& entropy,
                                                      const ProbMatrix& mean_probs,
                                                      const Labels& labels,
                                                      bool key_by_predicted = false) {
    labels.check_against(mean_probs.n_samples(), mean_probs.n_classes());
    if (entropy.size() != mean_probs.n_samples())
        throw std::invalid_argument("entropy_by_correctness: length mismatch");

    std::map<std::size_t, std::pair<double, double>> sums;  // class -> (correct, incorrect)
    ClassUncertaintySummary out;
    out.keyed_by_predicted = key_by_predicted;
    for (std::size_t i = 0; i < entropy.size(); ++i) {
        std::size_t pred = mean_probs.argmax(i);
        std::size_t key = key_by_predicted ? pred : labels.at(i);
        auto& cls = out.classes[key];
        auto& sum = sums[key];
        if (pred == labels.at(i)) {
            ++cls.count_correct;
            sum.first += entropy[i];
        } else {
            ++cls.count_incorrect;
            sum.second += entropy[i];
        }
    }
    for (auto& [key, cls] : out.classes) {
        if (cls.count_correct > 0)
            cls.mean_entropy_correct = sums[key].first / static_cast<double>(cls.count_correct);
        if (cls.count_incorrect > 0)
            cls.mean_entropy_incorrect = sums[key].second / static_cast<double>(cls.count_incorrect);
    }
    return out;
}

struct ConfidencePoint {
    double mean_confidence = 0.0;
    double confidence_std = 0.0;
};

// Per-sample (mean, std) of the argmax class probability across passes,
// sorted ascending by mean.
inline std::vector<ConfidencePoint> confidence_profile(const PassTensor& passes) {
    auto mean = mean_prediction(passes);
    auto stds = classwise_std(passes);
    const std::size_t c = passes.n_classes();
    std::vector<ConfidencePoint> pts(passes.n_samples());
    for (std::size_t i = 0; i < passes.n_samples(); ++i) {
        std::size_t best = mean.argmax(i);
        pts[i] = {mean.at(i, best), stds[i * c + best]};
    }
    std::stable_sort(pts.begin(), pts.end(), [](const ConfidencePoint& a, const ConfidencePoint& b) {
        return a.mean_confidence < b.mean_confidence;
    });
    return pts;
}

struct FiveNumberSummary {
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

// Quantile by linear interpolation between closest ranks over sorted data.
inline double interpolated_quantile(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    double pos = q * static_cast<double>(n - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    if (lo >= n - 1) return sorted[n - 1];
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline std::map<std::size_t, FiveNumberSummary> classwise_entropy_distribution(
    const std::vector<double>& entropy, const Labels& labels) {
    if (entropy.size() != labels.size())
        throw std::invalid_argument("classwise_entropy_distribution: length mismatch");
    std::map<std::size_t, std::vector<double>> buckets;
    for (std::size_t i = 0; i < entropy.size(); ++i) buckets[labels.at(i)].push_back(entropy[i]);

    std::map<std::size_t, FiveNumberSummary> out;
    for (auto& [cls, vals] : buckets) {
        std::sort(vals.begin(), vals.end());
        FiveNumberSummary s;
        s.min = vals.front();
        s.q1 = interpolated_quantile(vals, 0.25);
        s.median = interpolated_quantile(vals, 0.5);
        s.q3 = interpolated_quantile(vals, 0.75);
        s.max = vals.back();
        out[cls] = s;
    }
    return out;
}

}  // namespace uqkit
