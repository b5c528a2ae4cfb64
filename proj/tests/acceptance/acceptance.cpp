// Acceptance checks. Prints one PASS/FAIL line per criterion and exits non-zero if any
// criterion fails. Each check compares library output against values computed here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "weshap/engine.hpp"
#include "weshap/evaluation.hpp"
#include "weshap/lf_summary.hpp"
#include "weshap/neighbors.hpp"
#include "weshap/oracle.hpp"
#include "weshap/parallel.hpp"
#include "weshap/proxy.hpp"
#include "weshap/shapley_tables.hpp"
#include "weshap/synth.hpp"

namespace fs = std::filesystem;
using namespace weshap;
using weshap::testing::InstanceShape;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double x) {
    std::ostringstream out;
    out.precision(4);
    out << x;
    return out.str();
}

// ---------------------------------------------------------------------------------------
// Table oracles

double vote_share(std::size_t correct, std::size_t wrong, int c) {
    if (correct + wrong == 0) return 1.0 / c;
    return static_cast<double>(correct) / static_cast<double>(correct + wrong);
}

// Enumerates every ordering of p correct voters (player 0 is the valued one) and w wrong
// voters. Orderings are counted per predecessor state in integers, and the average marginal
// gain of player 0 is formed once at the end.
double permutation_sv_plus(std::size_t p, std::size_t w, int c) {
    const std::size_t n = p + w;
    std::vector<std::uint64_t> count((p + 1) * (w + 1), 0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::uint64_t total = 0;
    do {
        std::size_t correct = 0, wrong = 0;
        for (std::size_t player : order) {
            if (player == 0) break;
            if (player < p) {
                ++correct;
            } else {
                ++wrong;
            }
        }
        ++count[correct * (w + 1) + wrong];
        ++total;
    } while (std::next_permutation(order.begin(), order.end()));
    double sum = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j <= w; ++j) {
            double gain = vote_share(i + 1, j, c) - vote_share(i, j, c);
            sum += gain * static_cast<double>(count[i * (w + 1) + j]);
        }
    }
    return sum / static_cast<double>(total);
}

double log_choose(std::size_t n, std::size_t k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Closed-form double sum with the binomial ratio evaluated through lgamma.
double direct_sv_plus(std::size_t p, std::size_t w, int c) {
    double sum = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j <= w; ++j) {
            double gain = vote_share(i + 1, j, c) - vote_share(i, j, c);
            sum += gain * std::exp(log_choose(p - 1, i) + log_choose(w, j) - log_choose(p + w - 1, i + j));
        }
    }
    return sum / static_cast<double>(p + w);
}

Outcome table_correctness() {
    Outcome out;
    double worst_perm = 0.0, worst_direct = 0.0;
    double dp_seconds = 0.0;
    for (int c : {2, 3, 5, 6}) {
        auto start = Clock::now();
        auto tables = build_tables(kDirectFormulaMaxSize, c);
        dp_seconds += seconds_since(start);
        for (std::size_t p = 1; p <= kDirectFormulaMaxSize; ++p) {
            for (std::size_t w = 0; p + w <= kDirectFormulaMaxSize; ++w) {
                double dp = tables.sv_plus(p, w);
                worst_direct = std::max(worst_direct, std::abs(dp - direct_sv_plus(p, w, c)));
                if (p + w <= 9) worst_perm = std::max(worst_perm, std::abs(dp - permutation_sv_plus(p, w, c)));
            }
        }
    }
    out.pass = worst_perm <= 1e-12 && worst_direct <= 1e-9 && dp_seconds < 1.0;
    out.detail = "max |DP - permutations| " + fmt(worst_perm) + ", max |DP - direct| " + fmt(worst_direct) +
                 ", DP build " + fmt(dp_seconds) + " s";
    return out;
}

Outcome efficiency_identity() {
    double worst = 0.0;
    const std::size_t m = 200;
    for (int c = 2; c <= 10; ++c) {
        auto t = build_tables(m, c);
        for (std::size_t p = 0; p <= m; ++p) {
            for (std::size_t w = 1; p + w <= m; ++w) {
                double lhs = static_cast<double>(p) * t.sv_plus(p, w) + static_cast<double>(w) * t.sv_minus(p, w);
                double rhs = static_cast<double>(p) / static_cast<double>(p + w) - 1.0 / c;
                worst = std::max(worst, std::abs(lhs - rhs));
            }
        }
        // w = 0: every voter is correct and SV- is undefined.
        for (std::size_t p = 1; p <= m; ++p) {
            worst = std::max(worst, std::abs(static_cast<double>(p) * t.sv_plus(p, 0) - (1.0 - 1.0 / c)));
        }
    }
    return {worst <= 1e-12, "max residual " + fmt(worst) + " over M=200, C=2..10"};
}

// ---------------------------------------------------------------------------------------
// Randomized instances shared by criteria 3 and 4

struct Instance {
    SplitBundle bundle;
    ProxyConfig config;
};

std::vector<Instance> random_instances() {
    std::vector<Instance> out;
    const Metric metrics[] = {Metric::kEuclidean, Metric::kManhattan, Metric::kCosine};
    const Weighting weightings[] = {Weighting::kUniform, Weighting::kInverseDistance};
    std::mt19937_64 rng(2024);
    for (std::size_t t = 0; t < 50; ++t) {
        InstanceShape shape;
        shape.n = std::uniform_int_distribution<std::size_t>(20, 200)(rng);
        shape.d = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
        shape.m = std::uniform_int_distribution<std::size_t>(2, 10)(rng);
        shape.n_val = std::uniform_int_distribution<std::size_t>(2, 50)(rng);
        shape.num_classes = 2 + static_cast<int>(t % 2);
        shape.activation = std::uniform_real_distribution<double>(0.1, 0.7)(rng);
        shape.grid = t % 3 == 0 ? 0.5 : 1e-3;
        ProxyConfig cfg;
        cfg.metric = metrics[t % 3];
        cfg.weighting = weightings[(t / 3) % 2];
        cfg.k = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(shape.n, 15))(rng);
        out.push_back({weshap::testing::random_bundle(shape, 1000 + t), cfg});
    }
    return out;
}

Outcome exact_equivalence(const std::vector<Instance>& instances) {
    auto start = Clock::now();
    double worst = 0.0, worst_game = 0.0;
    for (const auto& inst : instances) {
        auto ws = weshap_dataset(inst.bundle, inst.config);
        auto game = make_proxy_game(inst.bundle, inst.config);
        auto exact = exact_shapley_subsets(game);
        for (std::size_t j = 0; j < exact.size(); ++j) worst = std::max(worst, std::abs(ws.values[j] - exact[j]));
        // The library game itself must agree with utilities computed from scratch here.
        const std::uint64_t full = (std::uint64_t{1} << inst.bundle.num_lfs()) - 1;
        for (std::uint64_t mask : {std::uint64_t{0}, std::uint64_t{1}, full / 3, full}) {
            double diff = game.utility(mask) - weshap::testing::ref_utility(inst.bundle, mask, inst.config);
            worst_game = std::max(worst_game, std::abs(diff));
        }
    }
    double elapsed = seconds_since(start);
    return {worst <= 1e-9 && worst_game <= 1e-9 && elapsed < 300.0,
            "max |WeShap - exact Shapley| " + fmt(worst) + ", max game deviation " + fmt(worst_game) + ", " +
                std::to_string(instances.size()) + " instances in " + fmt(elapsed) + " s"};
}

Outcome axioms(const std::vector<Instance>& instances) {
    double null_worst = 0.0, sym_worst = 0.0, eff_worst = 0.0, add_worst = 0.0;
    for (const auto& inst : instances) {
        const auto& b = inst.bundle;
        const std::size_t m = b.num_lfs();
        auto base = weshap_dataset(b, inst.config);

        auto silenced = b;
        for (std::size_t i = 0; i < b.num_train(); ++i) silenced.weak_labels(i, m - 1) = kAbstain;
        null_worst = std::max(null_worst, std::abs(weshap_dataset(silenced, inst.config).values[m - 1]));

        auto twin = b;
        for (std::size_t i = 0; i < b.num_train(); ++i) twin.weak_labels(i, 1) = twin.weak_labels(i, 0);
        auto tv = weshap_dataset(twin, inst.config).values;
        sym_worst = std::max(sym_worst, std::abs(tv[0] - tv[1]));

        double total = std::accumulate(base.values.begin(), base.values.end(), 0.0);
        const std::uint64_t full = (std::uint64_t{1} << m) - 1;
        eff_worst = std::max(eff_worst, std::abs(total - weshap::testing::ref_utility(b, full, inst.config)));

        // Split the holdout into its first half and the rest.
        const std::size_t n_val = b.valid.size();
        const std::size_t half = n_val / 2;
        std::vector<std::size_t> first(half), second(n_val - half);
        std::iota(first.begin(), first.end(), std::size_t{0});
        std::iota(second.begin(), second.end(), half);
        auto part = [&](const std::vector<std::size_t>& ids) {
            auto r = weshap_dataset(b.train_features, b.weak_labels, b.valid.select_rows(ids), b.num_classes(),
                                    inst.config);
            return r.values;
        };
        auto a = part(first), c = part(second);
        for (std::size_t j = 0; j < m; ++j) {
            double joined = (static_cast<double>(half) * a[j] + static_cast<double>(n_val - half) * c[j]) /
                            static_cast<double>(n_val);
            add_worst = std::max(add_worst, std::abs(joined - base.values[j]));
        }
    }
    bool pass = null_worst == 0.0 && sym_worst <= 1e-12 && eff_worst <= 1e-9 && add_worst <= 1e-12;
    return {pass, "null " + fmt(null_worst) + ", symmetry " + fmt(sym_worst) + ", efficiency " + fmt(eff_worst) +
                      ", holdout additivity " + fmt(add_worst)};
}

// ---------------------------------------------------------------------------------------

Outcome running_example_fixture() {
    auto b = running_example();
    ProxyConfig cfg{3, Metric::kEuclidean, Weighting::kUniform};
    auto tables = build_tables(3, 2);
    // x3 carries lambda1 (votes 0) and lambda2 (votes 1); candidate class 0.
    double phi31 = weshap_weight(b.weak_labels, 2, 0, 0, tables);
    double instance = weshap_instance(0, b.valid.features.row(0), 0, b, cfg, tables);
    auto r = weshap_dataset(b, cfg);
    double w32 = r.contributions.at(2, 1);
    double w41 = r.contributions.at(3, 0);
    auto revised = b;
    revised.weak_labels = apply_revision(b.weak_labels, r.contributions, 0.0);
    double hard = hard_accuracy(Coalition::all(3), revised, cfg, b.valid);
    bool pass = phi31 == 0.5 && tables.sv_plus(1, 1) == 0.5 && instance == 0.5 && w32 < 0.0 && w41 < 0.0 &&
                hard == 1.0;
    return {pass, "phi_31 " + fmt(phi31) + ", instance value " + fmt(instance) + ", w_32 " + fmt(w32) + ", w_41 " +
                      fmt(w41) + ", validation accuracy at theta=0 " + fmt(hard)};
}

Outcome motivating_property() {
    auto b = motivating_example({}, 0);
    ProxyConfig cfg;
    auto acc = lf_accuracy(*b.valid_weak_labels, b.valid.labels);
    auto r = weshap_dataset(b, cfg);
    NeighborIndex index(b.train_features, cfg.metric);
    auto with_all = downstream_accuracy(index, b.weak_labels, Coalition::all(3), 2, cfg, *b.test);
    auto without = Coalition::all(3);
    without.set(1, false);
    auto without_lf2 = downstream_accuracy(index, b.weak_labels, without, 2, cfg, *b.test);
    bool pass = acc[1] && *acc[1] >= 0.45 && *acc[1] <= 0.55 && r.values[1] > 0.0 && with_all - without_lf2 >= 0.05;
    return {pass, "LF2 accuracy " + fmt(acc[1].value_or(NAN)) + ", LF2 WeShap " + fmt(r.values[1]) +
                      ", test accuracy with/without LF2 " + fmt(with_all) + "/" + fmt(without_lf2)};
}

Outcome revision_no_regression() {
    std::size_t regressions = 0;
    double min_gain = 1.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        BlobParams p;
        p.num_classes = 2 + static_cast<int>(seed % 3);
        p.dims = 2 + seed % 4;
        p.separation = 1.0 + 4.0 * unit(rng);
        p.spread = 0.5 + unit(rng);
        p.clean_lfs = 3 + seed % 6;
        p.flipped_lfs = seed % 3;
        p.coverage = 0.2 + 0.5 * unit(rng);
        p.accuracy = 0.55 + 0.4 * unit(rng);
        auto b = blobs(p, seed);
        ProxyConfig cfg;
        auto r = weshap_dataset(b, cfg);
        auto fine = fine_revision(r, b, cfg);
        auto prune = prune_search(weshap_scores(r), b, cfg);
        for (const auto& o : {fine, prune}) {
            if (o.valid_accuracy_after < o.valid_accuracy_before) ++regressions;
            min_gain = std::min(min_gain, o.valid_accuracy_after - o.valid_accuracy_before);
        }
    }
    return {regressions == 0, std::to_string(regressions) + " regressions over 20 bundles, smallest gain " +
                                  fmt(min_gain)};
}

Outcome ranking_sanity() {
    BlobParams p;
    p.clean_lfs = 10;
    p.flipped_lfs = 5;
    auto b = blobs(p, 0);
    ProxyConfig cfg;
    auto r = weshap_dataset(b, cfg);
    double weshap_area = rank_curve(weshap_scores(r), b, cfg).area;
    double rnd = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        rnd += rank_curve(baseline_scores(ScoreMethod::kRandom, b, seed), b, cfg).area;
    }
    rnd /= 5.0;
    double worst_flipped = -INFINITY;
    for (std::size_t j = 10; j < 15; ++j) worst_flipped = std::max(worst_flipped, r.values[j]);
    return {weshap_area > rnd && worst_flipped < 0.0, "WeShap area " + fmt(weshap_area) + ", RND mean area " +
                                                          fmt(rnd) + ", largest flipped LF value " +
                                                          fmt(worst_flipped)};
}

// ---------------------------------------------------------------------------------------

struct Timing {
    double total = 0.0;
    double scoring = 0.0;
    double tables = 0.0;
    std::size_t table_size = 0;
};

// Best of three runs per stage; the table build is timed separately in repeated batches
// because a single build at these sizes takes microseconds.
Timing time_run(const BenchSize& size) {
    auto b = bench_bundle(size, 7);
    ProxyConfig cfg;
    cfg.k = size.k;
    Timing best{INFINITY, INFINITY, 0.0, 0};
    for (int rep = 0; rep < 3; ++rep) {
        auto start = Clock::now();
        auto r = weshap_dataset(b, cfg);
        best.total = std::min(best.total, seconds_since(start));
        best.scoring = std::min(best.scoring, r.timings.scoring_seconds);
        best.table_size = r.table_size;
    }
    best.tables = time_table_build(best.table_size, size.num_classes);
    return best;
}

Outcome runtime() {
    BenchSize base{30000, 32, 100, 1000, 10, 2, 0.2};
    BenchSize more_lfs = base;
    more_lfs.m = 200;
    BenchSize more_val = base;
    more_val.n_val = 2000;
    auto t0 = time_run(base);
    auto t1 = time_run(more_lfs);
    auto t2 = time_run(more_val);
    double table_ratio = t1.tables / t0.tables;
    double total_ratio = t1.total / t0.total;
    double scoring_ratio = t2.scoring / t0.scoring;
    bool pass = t0.total < 10.0 && table_ratio <= 4.5 && total_ratio <= 2.5 && scoring_ratio <= 2.5;
    return {pass, "base " + fmt(t0.total) + " s on " + std::to_string(worker_count()) +
                      " worker(s); 2x m: tables " + fmt(table_ratio) + "x (M " + std::to_string(t0.table_size) +
                      " -> " + std::to_string(t1.table_size) + "), total " + fmt(total_ratio) +
                      "x; 2x n_val: scoring " + fmt(scoring_ratio) + "x"};
}

// ---------------------------------------------------------------------------------------

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run(const std::string& command) {
    int status = std::system(command.c_str());
    return status;
}

Outcome determinism() {
    const std::string cli = WESHAP_CLI_PATH;
    auto dir = fs::temp_directory_path() / "weshap_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    if (run("\"" + cli + "\" synth --kind blobs --seed 3 --clean-lfs 8 --flipped-lfs 3 --out \"" +
            (dir / "bundle").string() + "\" > /dev/null") != 0) {
        return {false, "synth failed"};
    }
    std::vector<std::string> reports;
    std::vector<std::string> results;
    for (const char* threads : {"1", "4", "1", "4"}) {
        auto out = dir / ("report_" + std::to_string(reports.size()) + ".json");
        auto res = dir / ("result_" + std::to_string(reports.size()) + ".json");
        std::string cmd = std::string("WESHAP_THREADS=") + threads + " \"" + cli + "\" compute --manifest \"" +
                          (dir / "bundle" / "manifest.json").string() + "\" --seed 5 --out \"" + out.string() +
                          "\" --result-out \"" + res.string() + "\" > /dev/null";
        if (run(cmd) != 0) return {false, "compute failed: " + cmd};
        reports.push_back(slurp(out));
        results.push_back(slurp(res));
    }
    bool same = !reports[0].empty();
    for (std::size_t t = 1; t < reports.size(); ++t) same = same && reports[t] == reports[0] && results[t] == results[0];
    std::string detail = std::to_string(reports.size()) + " runs (WESHAP_THREADS 1,4,1,4), report " +
                         std::to_string(reports[0].size()) + " bytes, " + (same ? "identical" : "DIFFERENT");
    fs::remove_all(dir);
    return {same, detail};
}

}  // namespace

int main() {
    const auto instances = random_instances();
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> check;
    };
    const std::vector<Criterion> criteria{
        {1, "table correctness", table_correctness},
        {2, "efficiency identity", efficiency_identity},
        {3, "exact Shapley equivalence", [&] { return exact_equivalence(instances); }},
        {4, "axiom suite", [&] { return axioms(instances); }},
        {5, "running example", running_example_fixture},
        {6, "motivating example", motivating_property},
        {7, "revision no-regression", revision_no_regression},
        {8, "ranking sanity", ranking_sanity},
        {9, "runtime", runtime},
        {10, "determinism", determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail
                  << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
