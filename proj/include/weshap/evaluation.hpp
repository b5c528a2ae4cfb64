#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "weshap/engine.hpp"
#include "weshap/types.hpp"

namespace weshap {

enum class ScoreMethod { kRandom, kAccuracy, kCoverage, kIws, kWeShap };

/// Accepts RND, ACC, COV, IWS, WESHAP (case-insensitive).
ScoreMethod parse_score_method(std::string_view name);
std::string_view to_string(ScoreMethod method);

struct MetricScores {
    ScoreMethod method = ScoreMethod::kWeShap;
    std::vector<double> scores;  // NaN marks an undefined score, which ranks last
    std::optional<std::uint64_t> seed;
};

/// (2 * accuracy - 1) * coverage
double iws_score(double accuracy, double coverage);

/// RND, ACC, COV or IWS. Accuracy and coverage come from the validation weak labels; COV
/// falls back to training coverage when the bundle has none. ACC is NaN for an LF that
/// never fires on the validation set, IWS is 0 for it.
MetricScores baseline_scores(ScoreMethod method, const SplitBundle& bundle, std::uint64_t seed = 0);
MetricScores weshap_scores(const WeShapResult& result);

/// LF indices by descending score, NaN last, ties by ascending index.
std::vector<std::size_t> rank_order(std::span<const double> scores);

struct RankCurve {
    std::vector<std::size_t> prefix_sizes;  // 10, 20, ..., m
    std::vector<double> accuracies;         // downstream hard test accuracy per prefix
    double area = 0.0;                      // mean of accuracies
};

std::vector<std::size_t> prefix_sizes(std::size_t num_lfs);

/// Hard test accuracy of the downstream MV + KNN pipeline trained on each top-ranked prefix.
RankCurve rank_curve(const MetricScores& scores, const SplitBundle& bundle, const ProxyConfig& config);

enum class RevisionMode { kPrune, kFine };
std::string_view to_string(RevisionMode mode);

struct RevisionOutcome {
    RevisionMode mode = RevisionMode::kFine;
    /// LF count for prune, threshold for fine (-inf means nothing muted).
    double chosen_parameter = 0.0;
    double valid_accuracy_before = 0.0;
    double valid_accuracy_after = 0.0;
    std::optional<double> test_accuracy_before;
    std::optional<double> test_accuracy_after;
    WeakLabelMatrix revised_weak_labels;
    std::vector<std::size_t> kept_lfs;  // prune only, in rank order
};

/// Downstream hard accuracy of the training weak labels `weak_labels` (all LFs active) on
/// `eval`; training rows without an active LF leave the neighbor pool.
double downstream_accuracy(const SplitBundle& bundle, const WeakLabelMatrix& weak_labels, const ProxyConfig& config,
                           const LabeledSet& eval);

/// Keeps the top-p LFs for the p in 1..m (strided above 200 LFs, m always tried) with the
/// best validation accuracy, ties toward larger p. Dropped columns become abstains.
RevisionOutcome prune_search(const MetricScores& scores, const SplitBundle& bundle, const ProxyConfig& config);

inline constexpr std::size_t kPruneScanLimit = 200;
inline constexpr std::size_t kThresholdQuantiles = 64;

/// Mutes every active weak label whose contribution score is below theta. Active entries
/// that never received a score count as 0.
WeakLabelMatrix apply_revision(const WeakLabelMatrix& weak_labels, const ContributionMatrix& contributions,
                               double theta);

/// -inf, the quantiles of the distinct contribution scores at 64 evenly spaced levels, and 0;
/// sorted and deduplicated.
std::vector<double> threshold_candidates(const ContributionMatrix& contributions);

struct ThresholdEvaluation {
    double theta = 0.0;
    double valid_accuracy = 0.0;
    std::optional<double> test_accuracy;
    WeakLabelMatrix revised_weak_labels;
};

ThresholdEvaluation evaluate_threshold(const WeShapResult& result, const SplitBundle& bundle,
                                       const ProxyConfig& config, double theta);

/// Threshold search over threshold_candidates by validation accuracy, ties toward the
/// smaller threshold.
RevisionOutcome fine_revision(const WeShapResult& result, const SplitBundle& bundle, const ProxyConfig& config);

struct WhatIfOutcome {
    double valid_accuracy = 0.0;
    std::optional<double> test_accuracy;
    std::vector<double> lf_values;  // WeShap values recomputed on the revised weak labels
    std::size_t muted_weak_labels = 0;
};

/// Mutes contributions below theta (when given) using the base result, silences the
/// disabled LFs entirely, then reports downstream accuracies and fresh WeShap values.
WhatIfOutcome what_if(const WeShapResult& base, const SplitBundle& bundle, const ProxyConfig& config,
                      std::span<const std::size_t> disabled_lfs, std::optional<double> theta);

/// Mean silhouette coefficient under Euclidean distance. Points alone in their class score 0.
double silhouette(const FeatureMatrix& features, std::span<const int> labels);

struct BenchSize {
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t m = 0;
    std::size_t n_val = 0;
    std::size_t k = 10;
    int num_classes = 2;
    double coverage = 0.2;  // activation probability per (row, LF)
};

struct BenchRow {
    BenchSize size;
    std::size_t table_size = 0;  // largest coalition size seen
    double table_seconds = 0.0;  // per build, min over repeated batches
    double index_seconds = 0.0;
    double neighbor_seconds = 0.0;
    double scoring_seconds = 0.0;
    double total_seconds = 0.0;
};

/// Random bundle of the given size (Gaussian features, independent LF activations).
SplitBundle bench_bundle(const BenchSize& size, std::uint64_t seed);

/// Times weshap_dataset once per size on a bench_bundle.
std::vector<BenchRow> runtime_bench(std::span<const BenchSize> sizes, const ProxyConfig& config, std::uint64_t seed);

/// Seconds per build_tables(max_size, C) call, best of several timed batches.
double time_table_build(std::size_t max_size, int num_classes);

std::string bench_csv(std::span<const BenchRow> rows);

}  // namespace weshap
