#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "uqkit/compare.hpp"
#include "uqkit/rng.hpp"

using namespace uqkit;
using Catch::Approx;

TEST_CASE("join aligns set sizes, entropy, and correctness") {
    PredictionSets sets({0b01, 0b11}, 2, true);
    UncertaintyTable table;
    table.n_passes = 4;
    table.rows.resize(2);
    table.rows[0].pred = 0;
    table.rows[0].predictive_entropy = 0.2;
    table.rows[1].pred = 1;
    table.rows[1].predictive_entropy = 0.6;
    auto records = join(sets, table, Labels({0, 0}));
    REQUIRE(records.size() == 2);
    CHECK(records[0].set_size == 1);
    CHECK(records[0].predictive_entropy == Approx(0.2));
    CHECK(records[0].correct);
    CHECK(records[1].set_size == 2);
    CHECK_FALSE(records[1].correct);

    CHECK_THROWS(join(sets, table, Labels({0})));
    UncertaintyTable short_table;
    short_table.rows.resize(1);
    CHECK_THROWS(join(sets, short_table, Labels({0, 0})));
}

TEST_CASE("average ranks share tied positions") {
    auto r = detail::average_ranks({10.0, 20.0, 20.0, 30.0});
    CHECK(r[0] == Approx(1.0));
    CHECK(r[1] == Approx(2.5));
    CHECK(r[2] == Approx(2.5));
    CHECK(r[3] == Approx(4.0));

    auto all_tied = detail::average_ranks({5.0, 5.0, 5.0});
    for (double v : all_tied) CHECK(v == Approx(2.0));
}

TEST_CASE("spearman rho analytic values") {
    CHECK(*spearman_rho({1, 2, 3, 4}, {10, 20, 30, 40}) == Approx(1.0));
    CHECK(*spearman_rho({1, 2, 3, 4}, {40, 30, 20, 10}) == Approx(-1.0));
    // Tied pair in y: rho = 2/sqrt(5).
    CHECK(*spearman_rho({1, 2, 3, 4}, {1, 1, 2, 2}) == Approx(0.8944).margin(1e-3));
    CHECK_FALSE(spearman_rho({1, 2, 3}, {7, 7, 7}).has_value());
    CHECK_THROWS(spearman_rho({1, 2}, {1, 2, 3}));
    CHECK_THROWS(spearman_rho({1}, {1}));
}

TEST_CASE("spearman rho is invariant under monotone transforms") {
    Rng rng(73);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(30), y(30);
        for (std::size_t i = 0; i < 30; ++i) {
            x[i] = rng.next_double();
            y[i] = rng.next_double();
        }
        auto base = spearman_rho(x, y);
        REQUIRE(base.has_value());
        std::vector<double> xt(30), yt(30);
        for (std::size_t i = 0; i < 30; ++i) {
            xt[i] = std::exp(3.0 * x[i]);
            yt[i] = y[i] * y[i] * y[i] + 2.0 * y[i];
        }
        CHECK(*spearman_rho(xt, yt) == Approx(*base).margin(1e-12));
        CHECK(*spearman_rho(x, x) == Approx(1.0));
    }
}

TEST_CASE("entropy grouped by set size") {
    std::vector<JointRecord> records = {
        {1, 0.1, true}, {1, 0.3, true}, {2, 0.8, false}, {3, 1.0, false}};
    auto groups = entropy_by_setsize(records);
    REQUIRE(groups.size() == 3);
    CHECK(groups.at(1).count == 2);
    CHECK(groups.at(1).mean_entropy == Approx(0.2));
    CHECK(groups.at(1).std_entropy == Approx(0.1));
    CHECK(groups.at(2).count == 1);
    CHECK(groups.at(2).std_entropy == 0.0);
    CHECK(groups.at(3).mean_entropy == Approx(1.0));

    std::size_t total = 0;
    for (const auto& [size, g] : groups) total += g.count;
    CHECK(total == records.size());
    CHECK_THROWS(entropy_by_setsize({}));
}
