#pragma once

#include <span>
#include <vector>

#include "weshap/neighbors.hpp"
#include "weshap/types.hpp"

namespace weshap {

/// Majority-vote class probabilities for one training row: votes per class over active LFs,
/// or 1/C everywhere when no LF in the coalition fires.
std::vector<double> mv_predict(std::span<const int> row, int num_classes);
std::vector<double> mv_predict(std::span<const int> row, int num_classes, const Coalition& coalition);

/// KNN vote weight of a neighbor at `distance`: 1, or 1/(distance + 1e-12).
double neighbor_weight(double distance, Weighting weighting);
inline constexpr double kInverseDistanceEpsilon = 1e-12;

/// Weighted mean of neighbor MV probabilities.
std::vector<double> knn_class_scores(const NeighborList& neighbors, const WeakLabelMatrix& weak_labels,
                                     const Coalition& coalition, int num_classes, Weighting weighting);

/// Argmax with ties (within 1e-12) resolved to the smallest class id.
int predict_class(std::span<const double> scores);

/// Mean true-class score over eval points whose neighbor lists are given.
double soft_accuracy(const Coalition& coalition, const WeakLabelMatrix& weak_labels, int num_classes,
                     Weighting weighting, std::span<const int> eval_labels,
                     std::span<const NeighborList> neighbors);
double hard_accuracy(const Coalition& coalition, const WeakLabelMatrix& weak_labels, int num_classes,
                     Weighting weighting, std::span<const int> eval_labels,
                     std::span<const NeighborList> neighbors);

/// Throws ConfigError unless 1 <= k <= pool.
void check_k(std::size_t k, std::size_t pool);

// Convenience forms that build a neighbor index over the bundle's training rows.
double soft_accuracy(const Coalition& coalition, const SplitBundle& bundle, const ProxyConfig& config,
                     const LabeledSet& eval);
double hard_accuracy(const Coalition& coalition, const SplitBundle& bundle, const ProxyConfig& config,
                     const LabeledSet& eval);
/// Proxy-game utility: validation soft accuracy minus 1/C.
double coalition_utility(const Coalition& coalition, const SplitBundle& bundle, const ProxyConfig& config);

/// Hard accuracy of the MV + KNN pipeline as a trained downstream model: training rows with
/// no active LF in the coalition are removed from the neighbor pool first. With an empty
/// pool every prediction is uniform (class 0).
double downstream_accuracy(const NeighborIndex& index, const WeakLabelMatrix& weak_labels,
                           const Coalition& coalition, int num_classes, const ProxyConfig& config,
                           const LabeledSet& eval);

}  // namespace weshap
