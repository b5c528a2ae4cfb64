#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "weshap/neighbors.hpp"
#include "weshap/shapley_tables.hpp"
#include "weshap/types.hpp"

namespace weshap {

/// Active LFs on one training row split by agreement with a candidate class.
struct VoteCounts {
    std::size_t correct = 0;
    std::size_t wrong = 0;

    friend bool operator==(const VoteCounts&, const VoteCounts&) = default;
};

VoteCounts vote_counts(std::span<const int> row, int candidate_class);

/// Shapley value of LF j in the single-row majority-vote game for row i when its hidden
/// label is `candidate_class`: SV+ if the LF votes for it, SV- if it votes otherwise, 0 if
/// it abstains.
double weshap_weight(const WeakLabelMatrix& weak_labels, std::size_t row, std::size_t lf,
                     int candidate_class, const SVTables& tables);
double weshap_weight(int lf_output, int candidate_class, VoteCounts counts, const SVTables& tables);

struct Contribution {
    std::size_t row = 0;
    std::size_t lf = 0;
    double weight = 0.0;

    friend bool operator==(const Contribution&, const Contribution&) = default;
};

/// Sparse per-weak-label contribution scores. Entries exist only for active (row, lf) pairs
/// on rows that are a neighbor of at least one holdout point, sorted row-major.
class ContributionMatrix {
public:
    ContributionMatrix() = default;
    ContributionMatrix(std::size_t rows, std::size_t lfs, std::vector<Contribution> entries);

    std::size_t rows() const { return rows_; }
    std::size_t num_lfs() const { return lfs_; }
    const std::vector<Contribution>& entries() const { return entries_; }

    /// Stored weight, or 0 for pairs that never received any.
    double at(std::size_t row, std::size_t lf) const;
    /// Per-LF sums accumulated in row-major order.
    std::vector<double> column_sums() const;

    friend bool operator==(const ContributionMatrix&, const ContributionMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t lfs_ = 0;
    std::vector<Contribution> entries_;
};

struct WeShapTimings {
    double tables_seconds = 0.0;
    double index_seconds = 0.0;
    double neighbor_seconds = 0.0;
    double scoring_seconds = 0.0;
    double total_seconds = 0.0;
};

struct WeShapResult {
    std::vector<double> values;  // per LF, over the whole holdout
    ContributionMatrix contributions;
    ProxyConfig config;
    std::size_t holdout_size = 0;
    double soft_accuracy_full = 0.0;  // proxy soft accuracy with every LF
    std::size_t table_size = 0;       // largest coalition size on any training row
    WeShapTimings timings;            // not part of any serialized output
};

/// Value of LF `lf` on one holdout point whose neighbors are given: neighbor-weighted mean
/// of the per-row weights for the point's label.
double weshap_instance(std::size_t lf, const NeighborList& neighbors, int label,
                       const WeakLabelMatrix& weak_labels, Weighting weighting, const SVTables& tables);
/// Same, locating the neighbors with a fresh index over the bundle's training rows.
double weshap_instance(std::size_t lf, std::span<const double> features, int label, const SplitBundle& bundle,
                       const ProxyConfig& config, const SVTables& tables);

/// Builds the tables, finds the K neighbors of every holdout point, and accumulates each
/// neighbor's weights scaled by omega / (n_val * sum omega) into the contribution matrix.
WeShapResult weshap_dataset(const FeatureMatrix& train_features, const WeakLabelMatrix& weak_labels,
                            const LabeledSet& holdout, int num_classes, const ProxyConfig& config);
WeShapResult weshap_dataset(const SplitBundle& bundle, const ProxyConfig& config);

struct LfAttribution {
    std::size_t lf = 0;
    double value = 0.0;
};

struct RowAttribution {
    std::size_t row = 0;
    double distance = 0.0;
    double mass = 0.0;  // sum over LFs of this row's share in the point's values
};

struct WeakLabelAttribution {
    std::size_t row = 0;
    std::size_t lf = 0;
    int output = kAbstain;
    double weight = 0.0;
};

struct Explanation {
    std::size_t val_index = 0;
    int label = 0;
    std::vector<double> lf_values;             // per LF, this point only
    std::vector<LfAttribution> most_negative;  // ascending by value
    std::vector<LfAttribution> most_positive;  // descending by value
    std::vector<RowAttribution> lowest_rows;   // ascending by mass
    std::vector<WeakLabelAttribution> lowest_weak_labels;  // ascending by weight
};

/// Attribution for one holdout point. Lists are truncated to top_k (clamped to their full
/// length); ties keep ascending index order.
Explanation explain(std::size_t val_index, const WeShapResult& result, const SplitBundle& bundle,
                    const ProxyConfig& config, std::size_t top_k);

}  // namespace weshap
