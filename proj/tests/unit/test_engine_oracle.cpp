#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "support.hpp"
#include "weshap/engine.hpp"
#include "weshap/oracle.hpp"
#include "weshap/proxy.hpp"
#include "weshap/synth.hpp"

using namespace weshap;
using weshap::testing::InstanceShape;
using weshap::testing::random_bundle;
using weshap::testing::ref_shapley;
using weshap::testing::ref_utility;

namespace {

const ProxyConfig kRunningConfig{3, Metric::kEuclidean, Weighting::kUniform};

double sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

struct ScopedThreads {
    explicit ScopedThreads(const char* n) { setenv("WESHAP_THREADS", n, 1); }
    ~ScopedThreads() { unsetenv("WESHAP_THREADS"); }
};

}  // namespace

TEST_CASE("vote counts split active LFs by agreement") {
    std::vector<int> row{0, 1, -1, 0, 2};
    CHECK(vote_counts(row, 0) == VoteCounts{2, 2});
    CHECK(vote_counts(row, 1) == VoteCounts{1, 3});
    std::vector<int> silent{-1, -1};
    CHECK(vote_counts(silent, 1) == VoteCounts{0, 0});
}

TEST_CASE("weights on the running example") {
    auto b = running_example();
    auto t = build_tables(2, 2);
    // x3 (row 2): lambda1 says 0, lambda2 says 1, lambda3 abstains.
    CHECK(weshap_weight(b.weak_labels, 2, 0, 0, t) == 0.5);
    CHECK(weshap_weight(b.weak_labels, 2, 1, 0, t) == -0.5);
    CHECK(weshap_weight(b.weak_labels, 2, 2, 0, t) == 0.0);
    CHECK(weshap_weight(b.weak_labels, 0, 0, 0, t) == 0.5);
}

TEST_CASE("instance values on the running example") {
    auto b = running_example();
    auto t = build_tables(2, 2);
    auto x7 = b.valid.features.row(0);
    CHECK(weshap_instance(0, x7, 0, b, kRunningConfig, t) == 0.5);
    CHECK(weshap_instance(1, x7, 0, b, kRunningConfig, t) == doctest::Approx(-1.0 / 6.0));
    CHECK(weshap_instance(2, x7, 0, b, kRunningConfig, t) == 0.0);

    // Uniform weighting is the weighted form with constant weights.
    NeighborIndex index(b.train_features, Metric::kEuclidean);
    auto nb = index.query(x7, 3);
    auto flat = nb;
    for (auto& d : flat.distances) d = 1.0;
    CHECK(weshap_instance(0, nb, 0, b.weak_labels, Weighting::kUniform, t) ==
          weshap_instance(0, flat, 0, b.weak_labels, Weighting::kInverseDistance, t));
}

TEST_CASE("dataset values and contributions on the running example") {
    auto b = running_example();
    auto r = weshap_dataset(b, kRunningConfig);
    CHECK(r.values[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(r.values[1] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(r.values[2] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(r.contributions.at(2, 1) == doctest::Approx(-1.0 / 12.0));
    CHECK(r.contributions.at(3, 0) == doctest::Approx(-1.0 / 12.0));
    CHECK(r.contributions.at(4, 0) == 0.0);  // abstain, never stored
    CHECK(r.table_size == 2);
    CHECK(r.holdout_size == 2);
    CHECK(r.soft_accuracy_full == doctest::Approx(5.0 / 6.0));
    CHECK(sum(r.values) == doctest::Approx(r.soft_accuracy_full - 0.5).epsilon(1e-15));
    // Stored entries are exactly the active weak labels on neighbor rows, row-major.
    CHECK(r.contributions.entries().size() == 8);
    for (std::size_t e = 1; e < r.contributions.entries().size(); ++e) {
        const auto& a = r.contributions.entries()[e - 1];
        const auto& c = r.contributions.entries()[e];
        CHECK((a.row < c.row || (a.row == c.row && a.lf < c.lf)));
    }
}

TEST_CASE("engine matches the reference Shapley values") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        InstanceShape shape;
        shape.n = 30;
        shape.m = 4 + seed % 3;
        shape.n_val = 8;
        shape.num_classes = 2 + static_cast<int>(seed % 2);
        auto b = random_bundle(shape, 500 + seed);
        ProxyConfig cfg{3 + seed % 4, static_cast<Metric>(seed % 3), static_cast<Weighting>(seed % 2)};
        auto expected = ref_shapley(b, cfg);
        auto got = weshap_dataset(b, cfg).values;
        for (std::size_t j = 0; j < b.num_lfs(); ++j) {
            CAPTURE(seed);
            CAPTURE(j);
            CHECK(std::abs(got[j] - expected[j]) <= 1e-9);
        }
    }
}

TEST_CASE("proxy game utilities match the reference") {
    InstanceShape shape;
    shape.m = 4;
    auto b = random_bundle(shape, 77);
    ProxyConfig cfg{5, Metric::kManhattan, Weighting::kInverseDistance};
    auto game = make_proxy_game(b, cfg);
    CHECK(game.players == 4);
    CHECK(game.utility(0) == 0.0);
    for (std::uint64_t mask = 1; mask < 16; ++mask) {
        CHECK(game.utility(mask) == doctest::Approx(ref_utility(b, mask, cfg)).epsilon(1e-12));
    }
}

TEST_CASE("subset and permutation formulations agree") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        InstanceShape shape;
        shape.m = 5;
        auto b = random_bundle(shape, 900 + seed);
        auto game = make_proxy_game(b, ProxyConfig{4, Metric::kEuclidean, Weighting::kUniform});
        auto a = exact_shapley_subsets(game);
        auto p = exact_shapley_permutations(game);
        for (std::size_t j = 0; j < 5; ++j) CHECK(std::abs(a[j] - p[j]) <= 1e-12);
        CHECK(std::abs(sum(a) - game.utility(31)) <= 1e-12);
    }
}

TEST_CASE("oracle on hand-built games") {
    CoalitionGame single{1, [](std::uint64_t mask) { return mask ? 0.7 : 0.0; }};
    CHECK(exact_shapley_permutations(single)[0] == doctest::Approx(0.7));
    CHECK(exact_shapley_subsets(single)[0] == doctest::Approx(0.7));

    CoalitionGame symmetric{2, [](std::uint64_t mask) { return mask == 3 ? 1.0 : (mask ? 0.25 : 0.0); }};
    auto s = exact_shapley_permutations(symmetric);
    CHECK(s[0] == doctest::Approx(0.5));
    CHECK(s[1] == doctest::Approx(0.5));

    // Glove game: player 0 owns a left glove, players 1 and 2 right gloves.
    CoalitionGame glove{3, [](std::uint64_t mask) { return (mask & 1) && (mask & 6) ? 1.0 : 0.0; }};
    auto g = exact_shapley_subsets(glove);
    CHECK(g[0] == doctest::Approx(2.0 / 3.0));
    CHECK(g[1] == doctest::Approx(1.0 / 6.0));

    auto both = exact_shapley_subsets(sum_games(glove, glove));
    for (std::size_t j = 0; j < 3; ++j) CHECK(both[j] == doctest::Approx(2.0 * g[j]));

    CoalitionGame big{13, [](std::uint64_t) { return 0.0; }};
    CHECK_THROWS_AS(exact_shapley_subsets(big), ConfigError);
    CoalitionGame nine{9, [](std::uint64_t) { return 0.0; }};
    CHECK_THROWS_AS(exact_shapley_permutations(nine), ConfigError);
    CHECK_THROWS_AS(sum_games(glove, single), ConfigError);
}

TEST_CASE("one LF correct everywhere takes the whole gain") {
    auto b = random_bundle({}, 11);
    for (std::size_t i = 0; i < b.num_train(); ++i) {
        for (std::size_t j = 0; j < b.num_lfs(); ++j) b.weak_labels(i, j) = kAbstain;
    }
    // Every training row gets LF 2's vote for class 0 and every validation label is 0.
    for (std::size_t i = 0; i < b.num_train(); ++i) b.weak_labels(i, 2) = 0;
    for (auto& y : b.valid.labels) y = 0;
    ProxyConfig cfg{5, Metric::kEuclidean, Weighting::kUniform};
    auto oracle = exact_shapley_subsets(make_proxy_game(b, cfg));
    auto engine = weshap_dataset(b, cfg).values;
    for (std::size_t j = 0; j < b.num_lfs(); ++j) {
        double expected = j == 2 ? 0.5 : 0.0;
        CHECK(oracle[j] == doctest::Approx(expected).epsilon(1e-12));
        CHECK(engine[j] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("axioms on the engine") {
    InstanceShape shape;
    shape.m = 6;
    shape.n_val = 20;
    auto b = random_bundle(shape, 4242);
    for (std::size_t i = 0; i < b.num_train(); ++i) {
        b.weak_labels(i, 4) = b.weak_labels(i, 1);  // duplicate column
        b.weak_labels(i, 5) = kAbstain;              // null player
    }
    ProxyConfig cfg{5, Metric::kCosine, Weighting::kInverseDistance};
    auto r = weshap_dataset(b, cfg);
    CHECK(r.values[5] == 0.0);
    for (const auto& e : r.contributions.entries()) CHECK(e.lf != 5);
    CHECK(std::abs(r.values[1] - r.values[4]) <= 1e-12);
    CHECK(std::abs(sum(r.values) - (r.soft_accuracy_full - 0.5)) <= 1e-9);

    // Holdout additivity: split the validation set in two.
    std::vector<std::size_t> first, second;
    for (std::size_t v = 0; v < b.valid.size(); ++v) (v < 7 ? first : second).push_back(v);
    auto r1 = weshap_dataset(b.train_features, b.weak_labels, b.valid.select_rows(first), 2, cfg);
    auto r2 = weshap_dataset(b.train_features, b.weak_labels, b.valid.select_rows(second), 2, cfg);
    for (std::size_t j = 0; j < b.num_lfs(); ++j) {
        double combined = (7.0 * r1.values[j] + 13.0 * r2.values[j]) / 20.0;
        CHECK(std::abs(combined - r.values[j]) <= 1e-12);
    }

    // Contribution rows sum to the LF values.
    std::vector<double> col(b.num_lfs(), 0.0);
    for (const auto& e : r.contributions.entries()) col[e.lf] += e.weight;
    for (std::size_t j = 0; j < b.num_lfs(); ++j) CHECK(std::abs(col[j] - r.values[j]) <= 1e-10);
}

TEST_CASE("results do not depend on the worker count") {
    InstanceShape shape;
    shape.n = 400;
    shape.n_val = 97;
    shape.m = 9;
    shape.num_classes = 3;
    auto b = random_bundle(shape, 31);
    ProxyConfig cfg{7, Metric::kEuclidean, Weighting::kInverseDistance};
    WeShapResult one, many;
    {
        ScopedThreads t("1");
        one = weshap_dataset(b, cfg);
    }
    {
        ScopedThreads t("5");
        many = weshap_dataset(b, cfg);
    }
    CHECK(one.values == many.values);
    CHECK(one.contributions == many.contributions);
    CHECK(one.soft_accuracy_full == many.soft_accuracy_full);
}

TEST_CASE("engine argument errors") {
    auto b = running_example();
    CHECK_THROWS_AS(weshap_dataset(b, ProxyConfig{7, Metric::kEuclidean, Weighting::kUniform}), ConfigError);
    CHECK_THROWS_AS(weshap_dataset(b, ProxyConfig{0, Metric::kEuclidean, Weighting::kUniform}), ConfigError);
    LabeledSet empty;
    CHECK_THROWS_AS(weshap_dataset(b.train_features, b.weak_labels, empty, 2, kRunningConfig), ConfigError);
}

TEST_CASE("explanations") {
    auto b = running_example();
    auto r = weshap_dataset(b, kRunningConfig);

    auto ex = explain(0, r, b, kRunningConfig, 10);
    CHECK(ex.label == 0);
    CHECK(ex.lf_values[0] == 0.5);
    CHECK(ex.most_negative.front().lf == 1);  // lambda2 misleads x7 through x3
    CHECK(ex.most_positive.front().lf == 0);
    CHECK(ex.most_negative.size() == 3);      // clamped to m
    CHECK(ex.lowest_rows.size() == 3);
    CHECK(ex.lowest_rows.front().row == 2);   // x3 carries the conflicting vote
    CHECK(ex.lowest_weak_labels.front().row == 2);
    CHECK(ex.lowest_weak_labels.front().lf == 1);

    // lambda2 abstains on x8's own validation weak labels yet shows up through x6.
    auto ex8 = explain(1, r, b, kRunningConfig, 1);
    CHECK(ex8.lf_values[1] > 0.0);
    CHECK(ex8.most_negative.size() == 1);
    CHECK(ex8.most_negative.front().lf == 0);

    // Descending order: lambda1, then lambda3 at zero, then lambda2.
    auto ex_ties = explain(0, r, b, kRunningConfig, 3);
    CHECK(ex_ties.most_positive[1].lf == 2);
    CHECK(ex_ties.most_positive[2].lf == 1);

    CHECK_THROWS_AS(explain(2, r, b, kRunningConfig, 3), ConfigError);
    CHECK_THROWS_AS(explain(0, r, b, ProxyConfig{2, Metric::kEuclidean, Weighting::kUniform}, 3), ConfigError);
}
