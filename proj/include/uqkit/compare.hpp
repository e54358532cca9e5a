#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "uqkit/conformal.hpp"
#include "uqkit/mcdropout.hpp"

// Cross-method analysis: join conformal set sizes with Bayesian entropy
// per sample and quantify the relationship.

namespace uqkit {

struct JointRecord {
    std::size_t set_size = 0;
    double predictive_entropy = 0.0;
    bool correct = false;
};

inline std::vector<JointRecord> join(const PredictionSets& sets, const UncertaintyTable& table,
                                     const Labels& labels) {
    const std::size_t n = sets.n_samples();
    if (table.rows.size() != n || labels.size() != n)
        throw std::invalid_argument("join: sample count mismatch");
    std::vector<JointRecord> records(n);
    for (std::size_t i = 0; i < n; ++i) {
        records[i].set_size = sets.set_size(i);
        records[i].predictive_entropy = table.rows[i].predictive_entropy;
        records[i].correct = table.rows[i].pred == labels.at(i);
    }
    return records;
}

namespace detail {

// Average ranks (1-based) with ties sharing their mean rank.
inline std::vector<double> average_ranks(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

}  // namespace detail

// Spearman rank correlation with average ranks for ties. Absent (nullopt)
// when either ranked sequence has zero variance.
inline std::optional<double> spearman_rho(const std::vector<double>& x,
                                          const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("spearman_rho: length mismatch");
    if (x.size() < 2) throw std::invalid_argument("spearman_rho: need at least 2 points");
    auto rx = detail::average_ranks(x);
    auto ry = detail::average_ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = rx[i] - mx, dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

struct SetSizeEntropyGroup {
    std::size_t count = 0;
    double mean_entropy = 0.0;
    double std_entropy = 0.0;  // population std
};

inline std::map<std::size_t, SetSizeEntropyGroup> entropy_by_setsize(
    const std::vector<JointRecord>& records) {
    if (records.empty()) throw std::invalid_argument("entropy_by_setsize: empty input");
    std::map<std::size_t, std::vector<double>> groups;
    for (const auto& r : records) groups[r.set_size].push_back(r.predictive_entropy);

    std::map<std::size_t, SetSizeEntropyGroup> out;
    for (const auto& [size, vals] : groups) {
        SetSizeEntropyGroup g;
        g.count = vals.size();
        for (double v : vals) g.mean_entropy += v;
        g.mean_entropy /= static_cast<double>(vals.size());
        for (double v : vals) g.std_entropy += (v - g.mean_entropy) * (v - g.mean_entropy);
        g.std_entropy = std::sqrt(g.std_entropy / static_cast<double>(vals.size()));
        out[size] = g;
    }
    return out;
}

}  // namespace uqkit
