#include "weshap/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "weshap/io.hpp"
#include "weshap/lf_summary.hpp"
#include "weshap/neighbors.hpp"
#include "weshap/parallel.hpp"
#include "weshap/proxy.hpp"

namespace weshap {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& ch : out) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return out;
}

const WeakLabelMatrix& validation_weak_labels(const SplitBundle& bundle, ScoreMethod method) {
    if (!bundle.valid_weak_labels) {
        throw ConfigError(std::string(to_string(method)) + " scores need validation weak labels");
    }
    return *bundle.valid_weak_labels;
}

const LabeledSet& require_test(const SplitBundle& bundle, std::string_view what) {
    if (!bundle.test) throw ConfigError(std::string(what) + " needs a test set");
    return *bundle.test;
}

Coalition top_prefix(std::span<const std::size_t> order, std::size_t p, std::size_t num_lfs) {
    return Coalition::from_indices(order.subspan(0, p), num_lfs);
}

}  // namespace

ScoreMethod parse_score_method(std::string_view name) {
    auto u = upper(name);
    if (u == "RND") return ScoreMethod::kRandom;
    if (u == "ACC") return ScoreMethod::kAccuracy;
    if (u == "COV") return ScoreMethod::kCoverage;
    if (u == "IWS") return ScoreMethod::kIws;
    if (u == "WESHAP") return ScoreMethod::kWeShap;
    throw ConfigError("unknown score method '" + std::string(name) + "' (expected RND, ACC, COV, IWS, WESHAP)");
}

std::string_view to_string(ScoreMethod method) {
    switch (method) {
        case ScoreMethod::kRandom: return "RND";
        case ScoreMethod::kAccuracy: return "ACC";
        case ScoreMethod::kCoverage: return "COV";
        case ScoreMethod::kIws: return "IWS";
        case ScoreMethod::kWeShap: return "WESHAP";
    }
    return "?";
}

std::string_view to_string(RevisionMode mode) { return mode == RevisionMode::kPrune ? "prune" : "fine"; }

double iws_score(double accuracy, double coverage) { return (2.0 * accuracy - 1.0) * coverage; }

MetricScores baseline_scores(ScoreMethod method, const SplitBundle& bundle, std::uint64_t seed) {
    MetricScores out;
    out.method = method;
    const std::size_t m = bundle.num_lfs();
    switch (method) {
        case ScoreMethod::kRandom: {
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            out.scores.resize(m);
            for (auto& s : out.scores) s = unit(rng);
            out.seed = seed;
            break;
        }
        case ScoreMethod::kAccuracy: {
            auto acc = lf_accuracy(validation_weak_labels(bundle, method), bundle.valid.labels);
            for (const auto& a : acc) out.scores.push_back(a.value_or(std::numeric_limits<double>::quiet_NaN()));
            break;
        }
        case ScoreMethod::kCoverage:
            out.scores = lf_coverage(bundle.valid_weak_labels ? *bundle.valid_weak_labels : bundle.weak_labels);
            break;
        case ScoreMethod::kIws: {
            const auto& valid_wl = validation_weak_labels(bundle, method);
            auto acc = lf_accuracy(valid_wl, bundle.valid.labels);
            auto cov = lf_coverage(valid_wl);
            for (std::size_t j = 0; j < m; ++j) out.scores.push_back(acc[j] ? iws_score(*acc[j], cov[j]) : 0.0);
            break;
        }
        case ScoreMethod::kWeShap:
            throw ConfigError("WESHAP scores come from weshap_dataset, not baseline_scores");
    }
    return out;
}

MetricScores weshap_scores(const WeShapResult& result) { return {ScoreMethod::kWeShap, result.values, std::nullopt}; }

std::vector<std::size_t> rank_order(std::span<const double> scores) {
    std::vector<std::size_t> order(scores.size());
    for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        bool na = std::isnan(scores[a]), nb = std::isnan(scores[b]);
        if (na || nb) return !na && nb;
        return scores[a] > scores[b];
    });
    return order;
}

std::vector<std::size_t> prefix_sizes(std::size_t num_lfs) {
    std::vector<std::size_t> sizes;
    for (std::size_t p = 10; p < num_lfs; p += 10) sizes.push_back(p);
    sizes.push_back(num_lfs);
    return sizes;
}

RankCurve rank_curve(const MetricScores& scores, const SplitBundle& bundle, const ProxyConfig& config) {
    const auto& test = require_test(bundle, "rank_curve");
    const std::size_t m = bundle.num_lfs();
    if (scores.scores.size() != m) throw ConfigError("score vector length does not match the LF count");
    check_k(config.k, bundle.num_train());
    NeighborIndex index(bundle.train_features, config.metric);
    auto order = rank_order(scores.scores);

    RankCurve curve;
    curve.prefix_sizes = prefix_sizes(m);
    curve.accuracies.resize(curve.prefix_sizes.size());
    parallel_for(curve.prefix_sizes.size(), [&](std::size_t t) {
        curve.accuracies[t] = downstream_accuracy(index, bundle.weak_labels, top_prefix(order, curve.prefix_sizes[t], m),
                                                  bundle.num_classes(), config, test);
    });
    double sum = 0.0;
    for (double a : curve.accuracies) sum += a;
    curve.area = sum / static_cast<double>(curve.accuracies.size());
    return curve;
}

double downstream_accuracy(const SplitBundle& bundle, const WeakLabelMatrix& weak_labels, const ProxyConfig& config,
                           const LabeledSet& eval) {
    check_k(config.k, bundle.num_train());
    NeighborIndex index(bundle.train_features, config.metric);
    return downstream_accuracy(index, weak_labels, Coalition::all(weak_labels.num_lfs()), bundle.num_classes(),
                               config, eval);
}

RevisionOutcome prune_search(const MetricScores& scores, const SplitBundle& bundle, const ProxyConfig& config) {
    const std::size_t m = bundle.num_lfs();
    if (scores.scores.size() != m) throw ConfigError("score vector length does not match the LF count");
    check_k(config.k, bundle.num_train());
    NeighborIndex index(bundle.train_features, config.metric);
    auto order = rank_order(scores.scores);

    std::vector<std::size_t> candidates;
    const std::size_t stride = m > kPruneScanLimit ? (m + kPruneScanLimit - 1) / kPruneScanLimit : 1;
    for (std::size_t p = 1; p < m; p += stride) candidates.push_back(p);
    candidates.push_back(m);

    const int c = bundle.num_classes();
    std::vector<double> valid_acc(candidates.size());
    parallel_for(candidates.size(), [&](std::size_t t) {
        valid_acc[t] =
            downstream_accuracy(index, bundle.weak_labels, top_prefix(order, candidates[t], m), c, config, bundle.valid);
    });
    std::size_t best = 0;
    for (std::size_t t = 1; t < candidates.size(); ++t) {
        if (valid_acc[t] >= valid_acc[best]) best = t;
    }
    const std::size_t p = candidates[best];

    RevisionOutcome out;
    out.mode = RevisionMode::kPrune;
    out.chosen_parameter = static_cast<double>(p);
    out.valid_accuracy_before = valid_acc.back();
    out.valid_accuracy_after = valid_acc[best];
    out.kept_lfs.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(p));
    auto keep = top_prefix(order, p, m);
    out.revised_weak_labels = bundle.weak_labels;
    for (std::size_t i = 0; i < bundle.num_train(); ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (!keep.contains(j)) out.revised_weak_labels(i, j) = kAbstain;
        }
    }
    if (bundle.test) {
        out.test_accuracy_before = downstream_accuracy(index, bundle.weak_labels, Coalition::all(m), c, config, *bundle.test);
        out.test_accuracy_after = downstream_accuracy(index, bundle.weak_labels, keep, c, config, *bundle.test);
    }
    return out;
}

WeakLabelMatrix apply_revision(const WeakLabelMatrix& weak_labels, const ContributionMatrix& contributions,
                               double theta) {
    if (contributions.rows() != weak_labels.rows() || contributions.num_lfs() != weak_labels.num_lfs()) {
        throw ConfigError("contribution matrix shape does not match the weak labels");
    }
    WeakLabelMatrix out = weak_labels;
    if (!(theta > kNegInf)) return out;
    // Walk rows in order alongside the sorted sparse entries.
    const auto& entries = contributions.entries();
    std::size_t e = 0;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        for (std::size_t j = 0; j < out.num_lfs(); ++j) {
            while (e < entries.size() && (entries[e].row < i || (entries[e].row == i && entries[e].lf < j))) ++e;
            if (out(i, j) == kAbstain) continue;
            bool stored = e < entries.size() && entries[e].row == i && entries[e].lf == j;
            double w = stored ? entries[e].weight : 0.0;
            if (w < theta) out(i, j) = kAbstain;
        }
    }
    return out;
}

std::vector<double> threshold_candidates(const ContributionMatrix& contributions) {
    std::vector<double> values;
    values.reserve(contributions.entries().size());
    for (const auto& e : contributions.entries()) values.push_back(e.weight);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());

    std::vector<double> out{kNegInf, 0.0};
    if (!values.empty()) {
        const double last = static_cast<double>(values.size() - 1);
        for (std::size_t q = 0; q < kThresholdQuantiles; ++q) {
            double pos = last * static_cast<double>(q) / static_cast<double>(kThresholdQuantiles - 1);
            auto lo = static_cast<std::size_t>(std::floor(pos));
            double frac = pos - static_cast<double>(lo);
            double v = values[lo];
            if (frac > 0.0 && lo + 1 < values.size()) v += frac * (values[lo + 1] - values[lo]);
            out.push_back(v);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

void check_result(const WeShapResult& result, const SplitBundle& bundle, const ProxyConfig& config) {
    if (!(result.config == config) || result.contributions.rows() != bundle.num_train() ||
        result.contributions.num_lfs() != bundle.num_lfs() || result.holdout_size != bundle.valid.size()) {
        throw ConfigError("WeShap result was computed for a different bundle or configuration");
    }
}

ThresholdEvaluation evaluate_with(const NeighborIndex& index, const WeShapResult& result, const SplitBundle& bundle,
                                  const ProxyConfig& config, double theta, bool with_test) {
    ThresholdEvaluation ev;
    ev.theta = theta;
    ev.revised_weak_labels = apply_revision(bundle.weak_labels, result.contributions, theta);
    auto all = Coalition::all(bundle.num_lfs());
    ev.valid_accuracy =
        downstream_accuracy(index, ev.revised_weak_labels, all, bundle.num_classes(), config, bundle.valid);
    if (with_test && bundle.test) {
        ev.test_accuracy =
            downstream_accuracy(index, ev.revised_weak_labels, all, bundle.num_classes(), config, *bundle.test);
    }
    return ev;
}

}  // namespace

ThresholdEvaluation evaluate_threshold(const WeShapResult& result, const SplitBundle& bundle,
                                       const ProxyConfig& config, double theta) {
    check_result(result, bundle, config);
    NeighborIndex index(bundle.train_features, config.metric);
    return evaluate_with(index, result, bundle, config, theta, true);
}

RevisionOutcome fine_revision(const WeShapResult& result, const SplitBundle& bundle, const ProxyConfig& config) {
    check_result(result, bundle, config);
    NeighborIndex index(bundle.train_features, config.metric);
    auto candidates = threshold_candidates(result.contributions);

    std::vector<double> valid_acc(candidates.size());
    parallel_for(candidates.size(), [&](std::size_t t) {
        valid_acc[t] = evaluate_with(index, result, bundle, config, candidates[t], false).valid_accuracy;
    });
    // Candidates ascend, so a strict comparison keeps the smallest threshold among ties.
    std::size_t best = 0;
    for (std::size_t t = 1; t < candidates.size(); ++t) {
        if (valid_acc[t] > valid_acc[best]) best = t;
    }

    auto before = evaluate_with(index, result, bundle, config, kNegInf, true);
    auto after = evaluate_with(index, result, bundle, config, candidates[best], true);
    RevisionOutcome out;
    out.mode = RevisionMode::kFine;
    out.chosen_parameter = candidates[best];
    out.valid_accuracy_before = before.valid_accuracy;
    out.valid_accuracy_after = after.valid_accuracy;
    out.test_accuracy_before = before.test_accuracy;
    out.test_accuracy_after = after.test_accuracy;
    out.revised_weak_labels = std::move(after.revised_weak_labels);
    return out;
}

WhatIfOutcome what_if(const WeShapResult& base, const SplitBundle& bundle, const ProxyConfig& config,
                      std::span<const std::size_t> disabled_lfs, std::optional<double> theta) {
    check_result(base, bundle, config);
    const std::size_t m = bundle.num_lfs();
    for (std::size_t j : disabled_lfs) {
        if (j >= m) throw ConfigError("LF index " + std::to_string(j) + " out of range (m=" + std::to_string(m) + ")");
    }
    auto revised = theta ? apply_revision(bundle.weak_labels, base.contributions, *theta) : bundle.weak_labels;
    for (std::size_t i = 0; i < revised.rows(); ++i) {
        for (std::size_t j : disabled_lfs) revised(i, j) = kAbstain;
    }

    WhatIfOutcome out;
    for (std::size_t t = 0; t < revised.entries().size(); ++t) {
        if (bundle.weak_labels.entries()[t] != kAbstain && revised.entries()[t] == kAbstain) ++out.muted_weak_labels;
    }
    NeighborIndex index(bundle.train_features, config.metric);
    auto all = Coalition::all(m);
    out.valid_accuracy = downstream_accuracy(index, revised, all, bundle.num_classes(), config, bundle.valid);
    if (bundle.test) {
        out.test_accuracy = downstream_accuracy(index, revised, all, bundle.num_classes(), config, *bundle.test);
    }
    out.lf_values = weshap_dataset(bundle.train_features, revised, bundle.valid, bundle.num_classes(), config).values;
    return out;
}

double silhouette(const FeatureMatrix& features, std::span<const int> labels) {
    const std::size_t n = features.rows();
    if (labels.size() != n) throw DataError("silhouette: label count does not match feature rows");
    std::set<int> classes(labels.begin(), labels.end());
    if (classes.size() < 2) throw ConfigError("silhouette needs at least two classes");
    if (*classes.begin() < 0) throw DataError("silhouette: negative class label");
    const std::size_t num_classes = static_cast<std::size_t>(*classes.rbegin()) + 1;

    std::vector<std::size_t> class_size(num_classes, 0);
    for (int y : labels) ++class_size[static_cast<std::size_t>(y)];

    std::vector<double> per_point(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        const auto own = static_cast<std::size_t>(labels[i]);
        if (class_size[own] < 2) return;
        std::vector<double> sums(num_classes, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == i) continue;
            sums[static_cast<std::size_t>(labels[r])] +=
                std::sqrt(distance_key(features.row(i), features.row(r), Metric::kEuclidean));
        }
        double a = sums[own] / static_cast<double>(class_size[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < num_classes; ++c) {
            if (c == own || class_size[c] == 0) continue;
            b = std::min(b, sums[c] / static_cast<double>(class_size[c]));
        }
        double denom = std::max(a, b);
        per_point[i] = denom > 0.0 ? (b - a) / denom : 0.0;
    });
    double sum = 0.0;
    for (double s : per_point) sum += s;
    return sum / static_cast<double>(n);
}

SplitBundle bench_bundle(const BenchSize& size, std::uint64_t seed) {
    if (size.n == 0 || size.d == 0 || size.m == 0 || size.n_val == 0) throw ConfigError("bench sizes must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> cls(0, size.num_classes - 1);

    auto features = [&](std::size_t rows) {
        FeatureMatrix f(rows, size.d);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t k = 0; k < size.d; ++k) f(i, k) = normal(rng);
        return f;
    };
    SplitBundle b;
    b.spec.num_classes = size.num_classes;
    b.train_features = features(size.n);
    std::vector<int> entries(size.n * size.m, kAbstain);
    for (std::size_t i = 0; i < size.n; ++i) {
        int truth = cls(rng);
        for (std::size_t j = 0; j < size.m; ++j) {
            if (unit(rng) >= size.coverage) continue;
            int out = truth;
            if (unit(rng) >= 0.7) out = (truth + 1 + cls(rng) % std::max(1, size.num_classes - 1)) % size.num_classes;
            entries[i * size.m + j] = out;
        }
    }
    b.weak_labels = WeakLabelMatrix(size.n, size.m, std::move(entries));
    b.valid.features = features(size.n_val);
    b.valid.labels.resize(size.n_val);
    for (auto& y : b.valid.labels) y = cls(rng);
    return b;
}

double time_table_build(std::size_t max_size, int num_classes) {
    using Clock = std::chrono::steady_clock;
    auto once = [&] {
        auto start = Clock::now();
        auto t = build_tables(max_size, num_classes);
        volatile double sink = t.sv_plus(std::min<std::size_t>(1, max_size), 0);
        (void)sink;
        return std::chrono::duration<double>(Clock::now() - start).count();
    };
    // Size batches to roughly 20 ms so clock resolution does not dominate.
    double single = std::max(once(), 1e-7);
    auto reps = static_cast<std::size_t>(std::clamp(0.02 / single, 1.0, 1e6));
    double best = std::numeric_limits<double>::infinity();
    for (int batch = 0; batch < 5; ++batch) {
        auto start = Clock::now();
        for (std::size_t r = 0; r < reps; ++r) once();
        best = std::min(best, std::chrono::duration<double>(Clock::now() - start).count() / static_cast<double>(reps));
    }
    return best;
}

std::vector<BenchRow> runtime_bench(std::span<const BenchSize> sizes, const ProxyConfig& config, std::uint64_t seed) {
    std::vector<BenchRow> rows;
    for (const auto& size : sizes) {
        auto bundle = bench_bundle(size, seed);
        ProxyConfig cfg = config;
        cfg.k = size.k;
        auto result = weshap_dataset(bundle, cfg);
        BenchRow row;
        row.size = size;
        row.table_size = result.table_size;
        row.table_seconds = time_table_build(std::max<std::size_t>(result.table_size, 1), size.num_classes);
        row.index_seconds = result.timings.index_seconds;
        row.neighbor_seconds = result.timings.neighbor_seconds;
        row.scoring_seconds = result.timings.scoring_seconds;
        row.total_seconds = result.timings.total_seconds;
        rows.push_back(row);
    }
    return rows;
}

std::string bench_csv(std::span<const BenchRow> rows) {
    std::ostringstream out;
    out << "n,d,m,n_val,k,num_classes,table_size,table_seconds,index_seconds,neighbor_seconds,scoring_seconds,"
           "total_seconds\n";
    for (const auto& r : rows) {
        out << r.size.n << ',' << r.size.d << ',' << r.size.m << ',' << r.size.n_val << ',' << r.size.k << ','
            << r.size.num_classes << ',' << r.table_size << ',' << format_double(r.table_seconds) << ','
            << format_double(r.index_seconds) << ',' << format_double(r.neighbor_seconds) << ','
            << format_double(r.scoring_seconds) << ',' << format_double(r.total_seconds) << '\n';
    }
    return out.str();
}

}  // namespace weshap
