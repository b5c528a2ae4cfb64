#include "weshap/proxy.hpp"

#include <algorithm>
#include <string>

#include "weshap/parallel.hpp"

namespace weshap {
namespace {

constexpr double kTieTolerance = 1e-12;

template <typename Active>
std::vector<double> vote_shares(std::span<const int> row, int num_classes, Active active) {
    std::vector<double> probs(static_cast<std::size_t>(num_classes), 0.0);
    std::size_t voters = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (row[j] == kAbstain || !active(j)) continue;
        probs[static_cast<std::size_t>(row[j])] += 1.0;
        ++voters;
    }
    if (voters == 0) {
        probs.assign(probs.size(), 1.0 / num_classes);
    } else {
        for (auto& p : probs) p /= static_cast<double>(voters);
    }
    return probs;
}

double mean_in_order(const std::vector<double>& values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return values.empty() ? 0.0 : sum / static_cast<double>(values.size());
}

}  // namespace

std::vector<double> mv_predict(std::span<const int> row, int num_classes) {
    return vote_shares(row, num_classes, [](std::size_t) { return true; });
}

std::vector<double> mv_predict(std::span<const int> row, int num_classes, const Coalition& coalition) {
    return vote_shares(row, num_classes, [&](std::size_t j) { return coalition.contains(j); });
}

double neighbor_weight(double distance, Weighting weighting) {
    return weighting == Weighting::kUniform ? 1.0 : 1.0 / (distance + kInverseDistanceEpsilon);
}

std::vector<double> knn_class_scores(const NeighborList& neighbors, const WeakLabelMatrix& weak_labels,
                                     const Coalition& coalition, int num_classes, Weighting weighting) {
    std::vector<double> scores(static_cast<std::size_t>(num_classes), 0.0);
    if (neighbors.size() == 0) {
        scores.assign(scores.size(), 1.0 / num_classes);
        return scores;
    }
    double total_weight = 0.0;
    for (std::size_t r = 0; r < neighbors.size(); ++r) {
        double w = neighbor_weight(neighbors.distances[r], weighting);
        auto theta = mv_predict(weak_labels.row(neighbors.ids[r]), num_classes, coalition);
        for (std::size_t c = 0; c < scores.size(); ++c) scores[c] += w * theta[c];
        total_weight += w;
    }
    for (auto& s : scores) s /= total_weight;
    return scores;
}

int predict_class(std::span<const double> scores) {
    int best = 0;
    for (std::size_t c = 1; c < scores.size(); ++c) {
        if (scores[c] > scores[static_cast<std::size_t>(best)] + kTieTolerance) best = static_cast<int>(c);
    }
    return best;
}

double soft_accuracy(const Coalition& coalition, const WeakLabelMatrix& weak_labels, int num_classes,
                     Weighting weighting, std::span<const int> eval_labels,
                     std::span<const NeighborList> neighbors) {
    // Every MV prediction is uniform; skip the arithmetic so the result is exactly 1/C.
    if (coalition.size() == 0) return 1.0 / num_classes;
    std::vector<double> per_point(eval_labels.size());
    parallel_for(eval_labels.size(), [&](std::size_t v) {
        auto scores = knn_class_scores(neighbors[v], weak_labels, coalition, num_classes, weighting);
        per_point[v] = scores[static_cast<std::size_t>(eval_labels[v])];
    });
    return mean_in_order(per_point);
}

double hard_accuracy(const Coalition& coalition, const WeakLabelMatrix& weak_labels, int num_classes,
                     Weighting weighting, std::span<const int> eval_labels,
                     std::span<const NeighborList> neighbors) {
    std::vector<double> per_point(eval_labels.size());
    parallel_for(eval_labels.size(), [&](std::size_t v) {
        auto scores = knn_class_scores(neighbors[v], weak_labels, coalition, num_classes, weighting);
        per_point[v] = predict_class(scores) == eval_labels[v] ? 1.0 : 0.0;
    });
    return mean_in_order(per_point);
}

void check_k(std::size_t k, std::size_t pool) {
    if (k == 0) throw ConfigError("K must be >= 1");
    if (k > pool) {
        throw ConfigError("K=" + std::to_string(k) + " exceeds the " + std::to_string(pool) +
                          " available training rows");
    }
}

double soft_accuracy(const Coalition& coalition, const SplitBundle& bundle, const ProxyConfig& config,
                     const LabeledSet& eval) {
    check_k(config.k, bundle.num_train());
    NeighborIndex index(bundle.train_features, config.metric);
    auto neighbors = index.query_all(eval.features, config.k);
    return soft_accuracy(coalition, bundle.weak_labels, bundle.num_classes(), config.weighting, eval.labels,
                         neighbors);
}

double hard_accuracy(const Coalition& coalition, const SplitBundle& bundle, const ProxyConfig& config,
                     const LabeledSet& eval) {
    check_k(config.k, bundle.num_train());
    NeighborIndex index(bundle.train_features, config.metric);
    auto neighbors = index.query_all(eval.features, config.k);
    return hard_accuracy(coalition, bundle.weak_labels, bundle.num_classes(), config.weighting, eval.labels,
                         neighbors);
}

double coalition_utility(const Coalition& coalition, const SplitBundle& bundle, const ProxyConfig& config) {
    if (coalition.size() == 0) return 0.0;
    return soft_accuracy(coalition, bundle, config, bundle.valid) - 1.0 / bundle.num_classes();
}

double downstream_accuracy(const NeighborIndex& index, const WeakLabelMatrix& weak_labels,
                           const Coalition& coalition, int num_classes, const ProxyConfig& config,
                           const LabeledSet& eval) {
    std::vector<std::uint8_t> covered(weak_labels.rows(), 0);
    std::size_t pool = 0;
    for (std::size_t i = 0; i < weak_labels.rows(); ++i) {
        auto row = weak_labels.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (row[j] != kAbstain && coalition.contains(j)) {
                covered[i] = 1;
                ++pool;
                break;
            }
        }
    }
    if (config.k == 0) throw ConfigError("K must be >= 1");
    std::vector<NeighborList> neighbors(eval.size());
    if (pool > 0) neighbors = index.query_all(eval.features, std::min(config.k, pool), covered);
    return hard_accuracy(coalition, weak_labels, num_classes, config.weighting, eval.labels, neighbors);
}

}  // namespace weshap
