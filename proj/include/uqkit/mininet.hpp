#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "uqkit/rng.hpp"
#include "uqkit/tensor.hpp"

// Small fully-connected classifier with inverted dropout, plain mini-batch
// SGD on cross-entropy, and stochastic (dropout-on) forward passes. This is
// the toolkit's built-in pass generator; everything is deterministic per
// seed.

namespace uqkit {

struct TrainConfig {
    std::size_t epochs = 10;
    std::size_t batch_size = 64;
    double learning_rate = 0.1;
    std::uint64_t seed = 0;

    void validate() const {
        if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
        if (learning_rate < 0.0) throw std::invalid_argument("TrainConfig: negative learning rate");
    }
};

struct EpochStats {
    double loss = 0.0;      // full-train cross-entropy, dropout off
    double accuracy = 0.0;  // full-train accuracy, dropout off
};

class MiniNet {
public:
    // Weights are Glorot-uniform in +-sqrt(6/(fan_in+fan_out)), quantized to
    // float32 precision so checkpoints round-trip bitwise; biases start at 0.
    MiniNet(std::vector<std::size_t> layer_dims, double dropout_rate, std::uint64_t seed)
        : dims_(std::move(layer_dims)), dropout_rate_(dropout_rate), seed_(seed) {
        if (dims_.size() < 2) throw std::invalid_argument("MiniNet: need at least 2 layers");
        for (std::size_t d : dims_)
            if (d < 1) throw std::invalid_argument("MiniNet: zero-width layer");
        if (!(dropout_rate_ >= 0.0 && dropout_rate_ < 1.0))
            throw std::invalid_argument("MiniNet: dropout rate must be in [0,1)");

        Rng rng(seed_);
        weights_.resize(n_layers());
        biases_.resize(n_layers());
        for (std::size_t l = 0; l < n_layers(); ++l) {
            const std::size_t fan_in = dims_[l], fan_out = dims_[l + 1];
            const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
            weights_[l].resize(fan_out * fan_in);
            for (double& w : weights_[l])
                w = static_cast<double>(static_cast<float>((2.0 * rng.next_double() - 1.0) * bound));
            biases_[l].assign(fan_out, 0.0);
        }
    }

    const std::vector<std::size_t>& layer_dims() const { return dims_; }
    std::size_t n_layers() const { return dims_.size() - 1; }  // weight layers
    std::size_t input_dim() const { return dims_.front(); }
    std::size_t n_classes() const { return dims_.back(); }
    double dropout_rate() const { return dropout_rate_; }
    std::uint64_t seed() const { return seed_; }

    std::vector<double>& weights(std::size_t l) { return weights_[l]; }
    std::vector<double>& biases(std::size_t l) { return biases_[l]; }
    const std::vector<double>& weights(std::size_t l) const { return weights_[l]; }
    const std::vector<double>& biases(std::size_t l) const { return biases_[l]; }

    // One forward evaluation. With dropout on, hidden activations are masked
    // by Bernoulli(1-p) and scaled by 1/(1-p); the output layer is never
    // dropped. Returns class probabilities per sample.
    ProbMatrix forward(const std::vector<double>& batch, std::size_t n, bool dropout_on,
                       Rng& rng) const {
        check_batch(batch, n);
        std::vector<double> out(n * n_classes());
        std::vector<double> act, next;
        for (std::size_t i = 0; i < n; ++i) {
            act.assign(batch.begin() + static_cast<std::ptrdiff_t>(i * input_dim()),
                       batch.begin() + static_cast<std::ptrdiff_t>((i + 1) * input_dim()));
            forward_sample(act, dropout_on ? &rng : nullptr, nullptr, nullptr);
            for (std::size_t c = 0; c < n_classes(); ++c) out[i * n_classes() + c] = act[c];
        }
        return ProbMatrix(n, n_classes(), std::move(out));
    }

    ProbMatrix forward(const std::vector<double>& batch, std::size_t n) const {
        Rng unused(0);
        return forward(batch, n, false, unused);
    }

    // T dropout-on passes with per-pass sub-seeds derived from `seed` by a
    // fixed counter scheme.
    PassTensor mc_forward(const std::vector<double>& data, std::size_t n, std::size_t t,
                          std::uint64_t seed) const {
        if (t < 1) throw std::invalid_argument("mc_forward: need at least 1 pass");
        check_batch(data, n);
        std::vector<double> values;
        values.reserve(t * n * n_classes());
        Rng base(seed);
        for (std::size_t pass = 0; pass < t; ++pass) {
            Rng pass_rng = base.fork(pass);
            ProbMatrix p = forward(data, n, true, pass_rng);
            values.insert(values.end(), p.values().begin(), p.values().end());
        }
        return PassTensor(t, n, n_classes(), std::move(values));
    }

    struct Gradients {
        std::vector<std::vector<double>> weights;
        std::vector<std::vector<double>> biases;
    };

    // Mean cross-entropy over the batch plus analytic gradients. Dropout
    // masks (if any) are drawn from `rng` exactly as in forward().
    std::pair<double, Gradients> loss_and_gradients(const std::vector<double>& batch,
                                                    std::size_t n, const Labels& labels,
                                                    Rng* rng = nullptr) const {
        check_batch(batch, n);
        labels.check_against(n, n_classes());
        Gradients g;
        g.weights.resize(n_layers());
        g.biases.resize(n_layers());
        for (std::size_t l = 0; l < n_layers(); ++l) {
            g.weights[l].assign(weights_[l].size(), 0.0);
            g.biases[l].assign(biases_[l].size(), 0.0);
        }

        double loss = 0.0;
        std::vector<std::vector<double>> acts(n_layers() + 1);  // post-activation per layer
        std::vector<std::vector<double>> masks(n_layers());     // effective hidden scale factors
        for (std::size_t i = 0; i < n; ++i) {
            acts[0].assign(batch.begin() + static_cast<std::ptrdiff_t>(i * input_dim()),
                           batch.begin() + static_cast<std::ptrdiff_t>((i + 1) * input_dim()));
            std::vector<double> act = acts[0];
            forward_sample(act, rng, &acts, &masks);

            const std::size_t y = labels.at(i);
            double p_true = act[y];
            loss -= std::log(p_true > 1e-300 ? p_true : 1e-300);

            // Output delta for softmax + cross-entropy.
            std::vector<double> delta(n_classes());
            for (std::size_t c = 0; c < n_classes(); ++c)
                delta[c] = act[c] - (c == y ? 1.0 : 0.0);

            for (std::size_t l = n_layers(); l-- > 0;) {
                const std::size_t in = dims_[l], out = dims_[l + 1];
                for (std::size_t o = 0; o < out; ++o) {
                    g.biases[l][o] += delta[o];
                    for (std::size_t j = 0; j < in; ++j)
                        g.weights[l][o * in + j] += delta[o] * acts[l][j];
                }
                if (l == 0) break;
                std::vector<double> prev(in, 0.0);
                for (std::size_t j = 0; j < in; ++j) {
                    double s = 0.0;
                    for (std::size_t o = 0; o < out; ++o) s += weights_[l][o * in + j] * delta[o];
                    // ReLU and dropout-mask gradient: acts[l][j] already has
                    // mask and scale applied; gradient is 0 where the unit was
                    // dropped or the pre-activation was negative.
                    prev[j] = acts[l][j] > 0.0 ? s * masks[l - 1][j] : 0.0;
                }
                delta = std::move(prev);
            }
        }

        const double inv_n = 1.0 / static_cast<double>(n);
        loss *= inv_n;
        for (std::size_t l = 0; l < n_layers(); ++l) {
            for (double& v : g.weights[l]) v *= inv_n;
            for (double& v : g.biases[l]) v *= inv_n;
        }
        return {loss, std::move(g)};
    }

    // Mini-batch SGD with dropout active. History records end-of-epoch
    // full-train loss/accuracy with dropout off.
    std::vector<EpochStats> train(const std::vector<double>& data, std::size_t n,
                                  const Labels& labels, const TrainConfig& cfg) {
        cfg.validate();
        check_batch(data, n);
        labels.check_against(n, n_classes());

        std::vector<EpochStats> history;
        Rng train_rng(cfg.seed);
        for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
            Rng shuffle_rng = train_rng.fork(2 * epoch);
            Rng mask_rng = train_rng.fork(2 * epoch + 1);
            std::vector<std::size_t> order(n);
            std::iota(order.begin(), order.end(), std::size_t{0});
            for (std::size_t i = n; i > 1; --i)
                std::swap(order[i - 1], order[shuffle_rng.next_below(i)]);

            std::vector<double> batch;
            std::vector<std::size_t> batch_labels;
            for (std::size_t start = 0; start < n; start += cfg.batch_size) {
                const std::size_t b = std::min(cfg.batch_size, n - start);
                batch.clear();
                batch_labels.clear();
                for (std::size_t i = 0; i < b; ++i) {
                    const std::size_t idx = order[start + i];
                    batch.insert(batch.end(),
                                 data.begin() + static_cast<std::ptrdiff_t>(idx * input_dim()),
                                 data.begin() + static_cast<std::ptrdiff_t>((idx + 1) * input_dim()));
                    batch_labels.push_back(labels.at(idx));
                }
                auto [loss, grads] =
                    loss_and_gradients(batch, b, Labels(batch_labels),
                                       dropout_rate_ > 0.0 ? &mask_rng : nullptr);
                if (!std::isfinite(loss))
                    throw std::runtime_error("train: non-finite loss at epoch " +
                                             std::to_string(epoch));
                for (std::size_t l = 0; l < n_layers(); ++l) {
                    for (std::size_t k = 0; k < weights_[l].size(); ++k)
                        weights_[l][k] -= cfg.learning_rate * grads.weights[l][k];
                    for (std::size_t k = 0; k < biases_[l].size(); ++k)
                        biases_[l][k] -= cfg.learning_rate * grads.biases[l][k];
                }
            }
            history.push_back(evaluate(data, n, labels));
        }
        return history;
    }

    EpochStats evaluate(const std::vector<double>& data, std::size_t n,
                        const Labels& labels) const {
        ProbMatrix p = forward(data, n);
        EpochStats s;
        std::size_t correct = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double p_true = p.at(i, labels.at(i));
            s.loss -= std::log(p_true > 1e-300 ? p_true : 1e-300);
            if (p.argmax(i) == labels.at(i)) ++correct;
        }
        s.loss /= static_cast<double>(n);
        s.accuracy = static_cast<double>(correct) / static_cast<double>(n);
        return s;
    }

    // All weights and biases flattened in layer order (weights then biases
    // per layer), quantized to float32 precision so the UQTK container
    // round-trips bitwise.
    WeightVector export_weights() const {
        std::vector<double> flat;
        flat.reserve(parameter_count());
        for (std::size_t l = 0; l < n_layers(); ++l) {
            for (double w : weights_[l]) flat.push_back(static_cast<double>(static_cast<float>(w)));
            for (double b : biases_[l]) flat.push_back(static_cast<double>(static_cast<float>(b)));
        }
        return WeightVector(std::move(flat), "mininet");
    }

    void import_weights(const WeightVector& w) {
        if (w.size() != parameter_count())
            throw std::invalid_argument("import_weights: parameter count mismatch");
        std::size_t pos = 0;
        for (std::size_t l = 0; l < n_layers(); ++l) {
            for (double& v : weights_[l]) v = w.values[pos++];
            for (double& v : biases_[l]) v = w.values[pos++];
        }
    }

    std::size_t parameter_count() const {
        std::size_t total = 0;
        for (std::size_t l = 0; l < n_layers(); ++l) total += dims_[l] * dims_[l + 1] + dims_[l + 1];
        return total;
    }

private:
    void check_batch(const std::vector<double>& batch, std::size_t n) const {
        if (batch.size() != n * input_dim())
            throw std::invalid_argument("MiniNet: batch size does not match input dim");
    }

    // In-place forward of one sample. `act` holds the input on entry and the
    // softmax probabilities on exit. When `all_acts` is given, records the
    // post-activation of every layer plus the per-hidden-layer effective
    // scale factors (0 for dropped units, 1/(1-p) for kept, 1 without
    // dropout) into `masks`.
    void forward_sample(std::vector<double>& act, Rng* dropout_rng,
                        std::vector<std::vector<double>>* all_acts,
                        std::vector<std::vector<double>>* masks) const {
        const double keep = 1.0 - dropout_rate_;
        std::vector<double> next;
        for (std::size_t l = 0; l < n_layers(); ++l) {
            const std::size_t in = dims_[l], out = dims_[l + 1];
            next.assign(out, 0.0);
            for (std::size_t o = 0; o < out; ++o) {
                double z = biases_[l][o];
                for (std::size_t j = 0; j < in; ++j) z += weights_[l][o * in + j] * act[j];
                next[o] = z;
            }
            if (l + 1 < dims_.size() - 1) {
                // Hidden layer: ReLU then inverted dropout.
                std::vector<double> scale(out, 1.0);
                for (std::size_t o = 0; o < out; ++o) {
                    next[o] = next[o] > 0.0 ? next[o] : 0.0;
                    if (dropout_rng != nullptr && dropout_rate_ > 0.0) {
                        if (dropout_rng->next_bernoulli(dropout_rate_)) {
                            scale[o] = 0.0;
                            next[o] = 0.0;
                        } else {
                            scale[o] = 1.0 / keep;
                            next[o] /= keep;
                        }
                    }
                }
                if (masks != nullptr) (*masks)[l] = std::move(scale);
            } else {
                // Output layer: stable softmax.
                double mx = next[0];
                for (double v : next) mx = std::max(mx, v);
                double sum = 0.0;
                for (double& v : next) {
                    v = std::exp(v - mx);
                    sum += v;
                }
                for (double& v : next) v /= sum;
            }
            act = next;
            if (all_acts != nullptr) (*all_acts)[l + 1] = act;
        }
    }

    std::vector<std::size_t> dims_;
    double dropout_rate_;
    std::uint64_t seed_;
    std::vector<std::vector<double>> weights_;
    std::vector<std::vector<double>> biases_;
};

}  // namespace uqkit
