#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "uqkit/conformal.hpp"
#include "uqkit/rng.hpp"

using namespace uqkit;
using Catch::Approx;

namespace {

// Independent order-statistic oracle: full sort, then index by the smallest
// k with k + 1e-12 >= (n+1)(1-alpha), clamped to [1, n].
double quantile_oracle(std::vector<double> scores, double alpha, std::size_t* k_out = nullptr) {
    std::sort(scores.begin(), scores.end());
    const std::size_t n = scores.size();
    std::size_t k = 1;
    while (k < n &&
           static_cast<double>(k) + 1e-12 < static_cast<double>(n + 1) * (1.0 - alpha))
        ++k;
    if (k_out != nullptr) *k_out = k;
    return scores[k - 1];
}

ProbMatrix single_row(std::vector<double> row) {
    const std::size_t c = row.size();
    return ProbMatrix(1, c, std::move(row));
}

}  // namespace

TEST_CASE("nonconformity score is one minus the true-class probability") {
    ProbMatrix probs(3, 3, {0.7, 0.2, 0.1, 1.0, 0.0, 0.0, 0.7, 0.2, 0.1});
    Labels labels({0, 0, 2});
    auto s = nonconformity_scores(probs, labels);
    CHECK(s.values[0] == Approx(0.3).margin(1e-15));
    CHECK(s.values[1] == Approx(0.0).margin(1e-15));
    CHECK(s.values[2] == Approx(0.9).margin(1e-15));
}

TEST_CASE("nonconformity rejects misaligned inputs") {
    ProbMatrix probs(2, 2, {0.5, 0.5, 0.5, 0.5});
    CHECK_THROWS(nonconformity_scores(probs, Labels({0})));
    CHECK_THROWS(nonconformity_scores(probs, Labels({0, 2})));
}

TEST_CASE("calibration_quantile hand-computed examples") {
    SECTION("four scores at alpha 0.25 select the 4th order statistic") {
        auto q = calibration_quantile({{0.1, 0.2, 0.3, 0.4}}, 0.25);
        CHECK(q.k == 4);
        CHECK(q.q_hat == Approx(0.4));
    }
    SECTION("single score") {
        auto q = calibration_quantile({{0.5}}, 0.05);
        CHECK(q.k == 1);
        CHECK(q.q_hat == Approx(0.5));
    }
    SECTION("99 evenly spaced scores at alpha 0.1 select the 90th") {
        std::vector<double> scores;
        for (int i = 1; i <= 99; ++i) scores.push_back(i / 100.0);
        auto q = calibration_quantile({scores}, 0.1);
        CHECK(q.k == 90);
        CHECK(q.q_hat == Approx(0.90));
    }
    SECTION("empty scores rejected") {
        CHECK_THROWS(calibration_quantile({{}}, 0.1));
        CHECK_THROWS(calibration_quantile({{0.5}}, 0.0));
        CHECK_THROWS(calibration_quantile({{0.5}}, 1.0));
    }
}

TEST_CASE("calibration_quantile agrees with the full-sort oracle") {
    Rng rng(13);
    for (int trial = 0; trial < 500; ++trial) {
        std::size_t n = 1 + rng.next_below(2000);
        double alpha = 0.01 + 0.49 * rng.next_double();
        NonconformityScores s;
        s.values.resize(n);
        for (auto& v : s.values) v = rng.next_double();
        std::size_t k_oracle = 0;
        double q_oracle = quantile_oracle(s.values, alpha, &k_oracle);
        auto q = calibration_quantile(s, alpha);
        REQUIRE(q.k == k_oracle);
        REQUIRE(q.q_hat == q_oracle);
    }
}

TEST_CASE("prediction set membership rule") {
    QuantileThreshold q{0.25, 0.05, 10, 10};
    SECTION("only qualifying classes included") {
        auto sets = prediction_sets(single_row({0.8, 0.15, 0.05}), q, true);
        CHECK(sets.set_size(0) == 1);
        CHECK(sets.contains(0, 0));
    }
    SECTION("argmax forced when nothing qualifies") {
        auto sets = prediction_sets(single_row({0.5, 0.4, 0.1}), q, true);
        CHECK(sets.set_size(0) == 1);
        CHECK(sets.contains(0, 0));
    }
    SECTION("strict variant allows empty sets") {
        auto sets = prediction_sets(single_row({0.5, 0.4, 0.1}), q, false);
        CHECK(sets.set_size(0) == 0);
    }
    SECTION("saturated threshold includes every class") {
        QuantileThreshold full{1.0, 0.05, 10, 10};
        auto sets = prediction_sets(single_row({0.5, 0.4, 0.1}), full, false);
        CHECK(sets.set_size(0) == 3);
    }
}

TEST_CASE("empirical coverage and mean set size") {
    // sets {0}, {1}, {0,1} vs labels 0, 2, 1 -> coverage 2/3.
    PredictionSets sets({0b01, 0b10, 0b11}, 3, false);
    CHECK(empirical_coverage(sets, Labels({0, 2, 1})) == Approx(2.0 / 3.0));
    CHECK(mean_set_size(sets) == Approx(4.0 / 3.0));

    PredictionSets full({0b111, 0b111}, 3, false);
    CHECK(empirical_coverage(full, Labels({2, 0})) == Approx(1.0));

    CHECK_THROWS(empirical_coverage(PredictionSets({}, 3, false), Labels({})));
    CHECK_THROWS(mean_set_size(PredictionSets({}, 3, false)));
}

TEST_CASE("mean set size reproduces the published frequency tables") {
    // 8000-sample set-size counts for the two reference models.
    CHECK(mean_set_size_from_counts({{1, 6431}, {2, 1377}, {3, 185}, {4, 7}}) ==
          Approx(1.2210).margin(1e-4));
    CHECK(mean_set_size_from_counts({{1, 7551}, {2, 398}, {3, 44}, {4, 7}}) ==
          Approx(1.063375).margin(1e-4));
}

TEST_CASE("set size histogram keys on the true class") {
    PredictionSets sets({0b01, 0b11}, 2, true);
    Labels labels({0, 0});
    auto h = set_size_histogram(sets, labels);
    CHECK(h.per_class.at(0).at(1) == 1);
    CHECK(h.per_class.at(0).at(2) == 1);
    std::size_t total = 0;
    for (const auto& [size, count] : h.global) total += count;
    CHECK(total == 2);
}

TEST_CASE("score histogram bin edges") {
    CHECK(score_histogram({{0.0, 1.0}}, 2) == std::vector<std::size_t>{1, 1});
    CHECK(score_histogram({{0.0, 0.0, 0.0}}, 4) == std::vector<std::size_t>{3, 0, 0, 0});
    Rng rng(4);
    NonconformityScores s;
    s.values.resize(500);
    for (auto& v : s.values) v = rng.next_double();
    auto counts = score_histogram(s, 7);
    std::size_t total = 0;
    for (auto c : counts) total += c;
    CHECK(total == 500);
}

TEST_CASE("quantile and set monotonicity in alpha") {
    Rng rng(17);
    NonconformityScores s;
    s.values.resize(200);
    for (auto& v : s.values) v = rng.next_double();
    std::vector<double> probs_raw(30 * 4);
    for (std::size_t i = 0; i < 30; ++i) {
        double sum = 0.0;
        for (int j = 0; j < 4; ++j) sum += probs_raw[i * 4 + j] = rng.next_double() + 1e-3;
        for (int j = 0; j < 4; ++j) probs_raw[i * 4 + j] /= sum;
    }
    ProbMatrix probs(30, 4, probs_raw);

    auto q1 = calibration_quantile(s, 0.05);
    auto q2 = calibration_quantile(s, 0.25);
    CHECK(q1.q_hat >= q2.q_hat);

    auto sets1 = prediction_sets(probs, q1, true);
    auto sets2 = prediction_sets(probs, q2, true);
    for (std::size_t i = 0; i < 30; ++i)
        CHECK((sets1.masks()[i] & sets2.masks()[i]) == sets2.masks()[i]);
}

TEST_CASE("force_argmax keeps mean set size at least 1") {
    Rng rng(23);
    std::vector<double> raw(50 * 3);
    for (std::size_t i = 0; i < 50; ++i) {
        double sum = 0.0;
        for (int j = 0; j < 3; ++j) sum += raw[i * 3 + j] = rng.next_double() + 1e-3;
        for (int j = 0; j < 3; ++j) raw[i * 3 + j] /= sum;
    }
    ProbMatrix probs(50, 3, raw);
    QuantileThreshold tiny{0.0, 0.05, 10, 10};
    auto sets = prediction_sets(probs, tiny, true);
    CHECK(mean_set_size(sets) >= 1.0);
    for (std::size_t i = 0; i < 50; ++i) CHECK(sets.set_size(i) >= 1);
}
