#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Core containers. All values live in doubles in memory; the on-disk
// container format is 32-bit floats (see io.hpp). Containers are immutable
// after construction and validate their invariants up front.

namespace uqkit {

inline constexpr double kRowSumTolerance = 1e-6;

class ProbMatrix {
public:
    ProbMatrix(std::size_t n_samples, std::size_t n_classes, std::vector<double> values)
        : n_(n_samples), c_(n_classes), values_(std::move(values)) {
        if (c_ < 2) throw std::invalid_argument("ProbMatrix: need at least 2 classes");
        if (values_.size() != n_ * c_)
            throw std::invalid_argument("ProbMatrix: value count does not match shape");
        for (std::size_t i = 0; i < n_; ++i) {
            double sum = 0.0;
            for (std::size_t c = 0; c < c_; ++c) {
                double v = values_[i * c_ + c];
                if (!(v >= 0.0 && v <= 1.0))
                    throw std::invalid_argument("ProbMatrix: entry outside [0,1] at row " +
                                                std::to_string(i));
                sum += v;
            }
            if (std::abs(sum - 1.0) > kRowSumTolerance)
                throw std::invalid_argument("ProbMatrix: row " + std::to_string(i) +
                                            " does not sum to 1");
        }
    }

    std::size_t n_samples() const { return n_; }
    std::size_t n_classes() const { return c_; }
    double at(std::size_t i, std::size_t c) const { return values_[i * c_ + c]; }
    const std::vector<double>& values() const { return values_; }

    // Argmax with lowest class index winning ties.
    std::size_t argmax(std::size_t i) const {
        std::size_t best = 0;
        for (std::size_t c = 1; c < c_; ++c)
            if (values_[i * c_ + c] > values_[i * c_ + best]) best = c;
        return best;
    }

    double max_prob(std::size_t i) const { return values_[i * c_ + argmax(i)]; }

private:
    std::size_t n_;
    std::size_t c_;
    std::vector<double> values_;
};

class PassTensor {
public:
    PassTensor(std::size_t n_passes, std::size_t n_samples, std::size_t n_classes,
               std::vector<double> values)
        : t_(n_passes), n_(n_samples), c_(n_classes), values_(std::move(values)) {
        if (t_ < 1) throw std::invalid_argument("PassTensor: need at least 1 pass");
        if (values_.size() != t_ * n_ * c_)
            throw std::invalid_argument("PassTensor: value count does not match shape");
        for (std::size_t t = 0; t < t_; ++t) slice(t);  // validates each T-slice
    }

    std::size_t n_passes() const { return t_; }
    std::size_t n_samples() const { return n_; }
    std::size_t n_classes() const { return c_; }
    double at(std::size_t t, std::size_t i, std::size_t c) const {
        return values_[(t * n_ + i) * c_ + c];
    }
    const std::vector<double>& values() const { return values_; }

    ProbMatrix slice(std::size_t t) const {
        auto first = values_.begin() + static_cast<std::ptrdiff_t>(t * n_ * c_);
        return ProbMatrix(n_, c_, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n_ * c_)));
    }

private:
    std::size_t t_;
    std::size_t n_;
    std::size_t c_;
    std::vector<double> values_;
};

class Labels {
public:
    explicit Labels(std::vector<std::size_t> values) : values_(std::move(values)) {}

    std::size_t size() const { return values_.size(); }
    std::size_t at(std::size_t i) const { return values_[i]; }
    const std::vector<std::size_t>& values() const { return values_; }

    void check_against(std::size_t n_samples, std::size_t n_classes) const {
        if (values_.size() != n_samples)
            throw std::invalid_argument("Labels: length mismatch with paired matrix");
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (values_[i] >= n_classes)
                throw std::invalid_argument("Labels: value out of class range at index " +
                                            std::to_string(i));
    }

private:
    std::vector<std::size_t> values_;
};

struct WeightVector {
    std::vector<double> values;
    std::string source_tag;

    WeightVector(std::vector<double> v, std::string tag)
        : values(std::move(v)), source_tag(std::move(tag)) {
        for (double w : values)
            if (!std::isfinite(w))
                throw std::invalid_argument("WeightVector: non-finite entry");
    }

    std::size_t size() const { return values.size(); }
};

// Row-wise numerically stable softmax; the entry point for external logits.
inline ProbMatrix softmax_rows(std::size_t n, std::size_t c, const std::vector<double>& logits) {
    if (logits.size() != n * c) throw std::invalid_argument("softmax_rows: shape mismatch");
    std::vector<double> out(n * c);
    for (std::size_t i = 0; i < n; ++i) {
        double mx = logits[i * c];
        for (std::size_t j = 0; j < c; ++j) {
            double v = logits[i * c + j];
            if (!std::isfinite(v))
                throw std::invalid_argument("softmax_rows: non-finite logit in row " +
                                            std::to_string(i));
            if (v > mx) mx = v;
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            double e = std::exp(logits[i * c + j] - mx);
            out[i * c + j] = e;
            sum += e;
        }
        for (std::size_t j = 0; j < c; ++j) out[i * c + j] /= sum;
    }
    return ProbMatrix(n, c, std::move(out));
}

}  // namespace uqkit
