#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "uqkit/rng.hpp"
#include "uqkit/sparsity.hpp"

using namespace uqkit;
using Catch::Approx;

TEST_CASE("sparsity_at_threshold counts strict magnitudes") {
    WeightVector w({0.0001, 0.01, -0.002}, "t");
    CHECK(sparsity_at_threshold(w, 0.005) == Approx(2.0 / 3.0));
    CHECK(sparsity_at_threshold(w, 1e-6) == 0.0);
    CHECK(sparsity_at_threshold(w, 1.0) == 1.0);
    // Boundary weights survive: |w| < t is strict.
    CHECK(sparsity_at_threshold(WeightVector({0.5, 0.4}, "t"), 0.5) == Approx(0.5));
    CHECK_THROWS(sparsity_at_threshold(w, 0.0));
    CHECK_THROWS(sparsity_at_threshold(w, -1.0));
}

TEST_CASE("sparsity_at_threshold is non-decreasing in t") {
    Rng rng(59);
    std::vector<double> values(300);
    for (auto& v : values) v = (2.0 * rng.next_double() - 1.0) * 0.02;
    WeightVector w(values, "rand");
    double prev = 0.0;
    for (double t = 1e-4; t < 0.03; t *= 1.5) {
        double s = sparsity_at_threshold(w, t);
        CHECK(s >= prev);
        prev = s;
    }
}

TEST_CASE("sparsity_profile ranges and conservation") {
    SECTION("single boundary above max magnitude") {
        WeightVector w({0.001, -0.002, 0.0005}, "t");
        auto p = sparsity_profile(w, {1.0});
        REQUIRE(p.ranges.size() == 2);
        CHECK(p.ranges[0].count == 3);
        CHECK(p.ranges[1].count == 0);
        CHECK(p.ranges[0].percent == Approx(100.0));
        CHECK(p.ranges[1].cumulative_percent == Approx(100.0));
    }
    SECTION("counts match a per-weight oracle on random vectors") {
        Rng rng(61);
        for (int trial = 0; trial < 100; ++trial) {
            std::size_t n = 1 + rng.next_below(200);
            std::vector<double> values(n);
            for (auto& v : values) v = (2.0 * rng.next_double() - 1.0) * 0.01;
            WeightVector w(values, "rand");
            auto p = sparsity_profile(w);

            const auto& b = kDefaultSparsityBoundaries;
            std::vector<std::size_t> oracle(b.size() + 1, 0);
            for (double v : values) {
                double mag = std::abs(v);
                std::size_t r = 0;
                while (r < b.size() && mag >= b[r]) ++r;
                ++oracle[r];
            }
            std::size_t total = 0;
            for (std::size_t r = 0; r < p.ranges.size(); ++r) {
                REQUIRE(p.ranges[r].count == oracle[r]);
                total += p.ranges[r].count;
            }
            REQUIRE(total == n);
        }
    }
    SECTION("cumulative percent is non-decreasing and ends at 100") {
        Rng rng(67);
        std::vector<double> values(500);
        for (auto& v : values) v = (2.0 * rng.next_double() - 1.0) * 0.01;
        auto p = sparsity_profile(WeightVector(values, "rand"));
        double prev = 0.0;
        for (const auto& r : p.ranges) {
            CHECK(r.cumulative_percent >= prev);
            prev = r.cumulative_percent;
        }
        CHECK(p.ranges.back().cumulative_percent == Approx(100.0));
    }
    SECTION("unsorted or non-positive boundaries rejected") {
        WeightVector w({0.1}, "t");
        CHECK_THROWS(sparsity_profile(w, {0.2, 0.1}));
        CHECK_THROWS(sparsity_profile(w, {0.0, 0.1}));
        CHECK_THROWS(sparsity_profile(w, {}));
    }
}

TEST_CASE("threshold_for_target_sparsity candidate sweep") {
    WeightVector w({0.1, -0.2, 0.3, 0.4}, "t");
    SECTION("half sparsity hits the third magnitude") {
        auto r = threshold_for_target_sparsity(w, 0.5);
        CHECK(r.threshold == Approx(0.3));
        CHECK(r.achieved == Approx(0.5));
    }
    SECTION("kappa 0 needs no threshold") {
        auto r = threshold_for_target_sparsity(w, 0.0);
        CHECK(r.threshold == 0.0);
        CHECK(r.achieved == 0.0);
    }
    SECTION("kappa 1 lands just above the max magnitude") {
        auto r = threshold_for_target_sparsity(w, 1.0);
        CHECK(r.threshold > 0.4);
        CHECK(r.achieved == 1.0);
        CHECK(sparsity_at_threshold(w, r.threshold) == 1.0);
    }
    SECTION("achieved always reaches kappa and is attained by the threshold") {
        Rng rng(71);
        for (int trial = 0; trial < 100; ++trial) {
            std::size_t n = 1 + rng.next_below(50);
            std::vector<double> values(n);
            for (auto& v : values) v = (2.0 * rng.next_double() - 1.0);
            WeightVector wv(values, "rand");
            double kappa = rng.next_double();
            auto r = threshold_for_target_sparsity(wv, kappa);
            REQUIRE(r.achieved >= kappa);
            if (r.threshold > 0.0)
                REQUIRE(sparsity_at_threshold(wv, r.threshold) == Approx(r.achieved));
        }
    }
    SECTION("duplicate magnitudes may overshoot kappa") {
        WeightVector dup({0.1, 0.1, 0.1, 0.5}, "t");
        auto r = threshold_for_target_sparsity(dup, 0.5);
        CHECK(r.threshold == Approx(0.5));
        CHECK(r.achieved == Approx(0.75));
    }
}
