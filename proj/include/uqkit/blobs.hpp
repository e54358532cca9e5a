#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "uqkit/rng.hpp"
#include "uqkit/tensor.hpp"

// Synthetic Gaussian-blob classification data. Samples are i.i.d. (class
// drawn uniformly, then an isotropic Gaussian around that class center), so
// any split of them is exchangeable.

namespace uqkit {

struct BlobData {
    std::size_t n = 0;
    std::size_t dim = 0;
    std::vector<double> values;  // n x dim row-major
    Labels labels{std::vector<std::size_t>{}};
};

// Class centers sit on a circle in the first two coordinates so adjacent
// centers are `center_distance` apart.
inline BlobData make_blobs(std::size_t n, std::size_t n_classes, std::size_t dim,
                           double center_distance, double sigma, std::uint64_t seed) {
    if (n_classes < 2) throw std::invalid_argument("make_blobs: need at least 2 classes");
    if (dim < 2) throw std::invalid_argument("make_blobs: need at least 2 dimensions");

    const double pi = 3.14159265358979323846;
    const double radius =
        n_classes == 2 ? center_distance / 2.0
                       : center_distance / (2.0 * std::sin(pi / static_cast<double>(n_classes)));
    std::vector<double> centers(n_classes * dim, 0.0);
    for (std::size_t c = 0; c < n_classes; ++c) {
        double angle = 2.0 * pi * static_cast<double>(c) / static_cast<double>(n_classes);
        centers[c * dim + 0] = radius * std::cos(angle);
        centers[c * dim + 1] = radius * std::sin(angle);
    }

    BlobData data;
    data.n = n;
    data.dim = dim;
    data.values.resize(n * dim);
    std::vector<std::size_t> labels(n);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t c = static_cast<std::size_t>(rng.next_below(n_classes));
        labels[i] = c;
        for (std::size_t d = 0; d < dim; ++d)
            data.values[i * dim + d] = centers[c * dim + d] + sigma * rng.next_gaussian();
    }
    data.labels = Labels(std::move(labels));
    return data;
}

// Row subset helper for applying dataset splits to blob data.
inline std::pair<std::vector<double>, Labels> take_rows(const BlobData& data,
                                                        const std::vector<std::size_t>& idx) {
    std::vector<double> values;
    values.reserve(idx.size() * data.dim);
    std::vector<std::size_t> labels;
    labels.reserve(idx.size());
    for (std::size_t i : idx) {
        values.insert(values.end(),
                      data.values.begin() + static_cast<std::ptrdiff_t>(i * data.dim),
                      data.values.begin() + static_cast<std::ptrdiff_t>((i + 1) * data.dim));
        labels.push_back(data.labels.at(i));
    }
    return {std::move(values), Labels(std::move(labels))};
}

}  // namespace uqkit
