#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "uqkit/rng.hpp"

namespace uqkit {

struct DatasetSplit {
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> cal_idx;
    std::vector<std::size_t> test_idx;
    // Boundary index separating calibration from test within the shuffled
    // order: cal occupies [v - cal, v), test occupies [v, v + test).
    std::size_t v = 0;
};

namespace detail {

inline std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

}  // namespace detail

// Three-way split with floored sizes; flooring remainder goes to train.
inline DatasetSplit split_dataset(std::size_t n, double train_ratio, double cal_ratio,
                                  double test_ratio, std::uint64_t seed) {
    if (n < 3) throw std::invalid_argument("split_dataset: need at least 3 samples");
    if (train_ratio < 0.0 || cal_ratio < 0.0 || test_ratio < 0.0)
        throw std::invalid_argument("split_dataset: negative ratio");
    if (std::abs(train_ratio + cal_ratio + test_ratio - 1.0) > 1e-9)
        throw std::invalid_argument("split_dataset: ratios must sum to 1");

    const std::size_t n_cal = static_cast<std::size_t>(std::floor(cal_ratio * static_cast<double>(n)));
    const std::size_t n_test = static_cast<std::size_t>(std::floor(test_ratio * static_cast<double>(n)));
    const std::size_t n_train = n - n_cal - n_test;

    auto idx = detail::shuffled_indices(n, seed);
    DatasetSplit s;
    s.train_idx.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.cal_idx.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                     idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_cal));
    s.test_idx.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_cal), idx.end());
    s.v = n_train + n_cal;
    return s;
}

// k folds whose validation parts partition [0, n); sizes differ by at most 1.
inline std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>>
kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("kfold_split: k must be at least 2");
    if (k > n) throw std::invalid_argument("kfold_split: k exceeds sample count");

    auto idx = detail::shuffled_indices(n, seed);
    std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> folds;
    folds.reserve(k);
    const std::size_t base = n / k;
    const std::size_t extra = n % k;  // first `extra` folds get one more
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        std::vector<std::size_t> val(idx.begin() + static_cast<std::ptrdiff_t>(pos),
                                     idx.begin() + static_cast<std::ptrdiff_t>(pos + size));
        std::vector<std::size_t> train;
        train.reserve(n - size);
        train.insert(train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(pos));
        train.insert(train.end(), idx.begin() + static_cast<std::ptrdiff_t>(pos + size), idx.end());
        folds.emplace_back(std::move(train), std::move(val));
        pos += size;
    }
    return folds;
}

}  // namespace uqkit
