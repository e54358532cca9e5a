#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "uqkit/tensor.hpp"

// Expected Calibration Error with its reliability-bin table, confusion
// matrices, and accuracy. Confidence is the max softmax entry of the
// supplied matrix; for Bayesian ECE callers pass the MC-dropout mean.

namespace uqkit {

struct ReliabilityBins {
    struct Bin {
        double lo = 0.0, hi = 0.0;     // confidence interval (lo, hi]
        std::size_t count = 0;
        double mean_confidence = 0.0;  // conf(B_m); 0 when empty
        double accuracy = 0.0;         // acc(B_m); 0 when empty
    };
    std::vector<Bin> bins;
    double ece = 0.0;
};

// Equal-width bins over (0,1], right-closed so confidence 1.0 lands in the
// top bin; bin 0 additionally covers 0.
inline ReliabilityBins ece(const ProbMatrix& probs, const Labels& labels, std::size_t m = 15) {
    if (m < 1) throw std::invalid_argument("ece: need at least 1 bin");
    const std::size_t n = probs.n_samples();
    if (n == 0) throw std::invalid_argument("ece: empty input");
    labels.check_against(n, probs.n_classes());

    ReliabilityBins out;
    out.bins.resize(m);
    std::vector<double> conf_sum(m, 0.0);
    std::vector<std::size_t> correct(m, 0);
    for (std::size_t b = 0; b < m; ++b) {
        out.bins[b].lo = static_cast<double>(b) / static_cast<double>(m);
        out.bins[b].hi = static_cast<double>(b + 1) / static_cast<double>(m);
    }

    for (std::size_t i = 0; i < n; ++i) {
        std::size_t pred = probs.argmax(i);
        double conf = probs.at(i, pred);
        // Bin index for (lo, hi]: smallest b with conf <= hi_b.
        std::size_t b = 0;
        if (conf > 0.0) {
            b = static_cast<std::size_t>(std::ceil(conf * static_cast<double>(m))) - 1;
            if (b >= m) b = m - 1;
        }
        ++out.bins[b].count;
        conf_sum[b] += conf;
        if (pred == labels.at(i)) ++correct[b];
    }

    double e = 0.0;
    for (std::size_t b = 0; b < m; ++b) {
        auto& bin = out.bins[b];
        if (bin.count == 0) continue;
        bin.mean_confidence = conf_sum[b] / static_cast<double>(bin.count);
        bin.accuracy = static_cast<double>(correct[b]) / static_cast<double>(bin.count);
        e += (static_cast<double>(bin.count) / static_cast<double>(n)) *
             std::abs(bin.accuracy - bin.mean_confidence);
    }
    out.ece = e;
    return out;
}

struct ConfusionMatrix {
    std::size_t n_classes = 0;
    std::vector<std::size_t> counts;  // rows = true class, cols = predicted

    std::size_t at(std::size_t true_c, std::size_t pred_c) const {
        return counts[true_c * n_classes + pred_c];
    }
    std::size_t total() const {
        std::size_t t = 0;
        for (auto v : counts) t += v;
        return t;
    }
    std::size_t trace() const {
        std::size_t t = 0;
        for (std::size_t c = 0; c < n_classes; ++c) t += counts[c * n_classes + c];
        return t;
    }
};

inline ConfusionMatrix confusion_matrix(const ProbMatrix& probs, const Labels& labels) {
    labels.check_against(probs.n_samples(), probs.n_classes());
    ConfusionMatrix cm;
    cm.n_classes = probs.n_classes();
    cm.counts.assign(cm.n_classes * cm.n_classes, 0);
    for (std::size_t i = 0; i < probs.n_samples(); ++i)
        ++cm.counts[labels.at(i) * cm.n_classes + probs.argmax(i)];
    return cm;
}

inline double accuracy(const ProbMatrix& probs, const Labels& labels) {
    if (probs.n_samples() == 0) throw std::invalid_argument("accuracy: empty input");
    auto cm = confusion_matrix(probs, labels);
    return static_cast<double>(cm.trace()) / static_cast<double>(probs.n_samples());
}

}  // namespace uqkit
