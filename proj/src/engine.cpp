#include "weshap/engine.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <numeric>
#include <optional>

#include "weshap/parallel.hpp"
#include "weshap/proxy.hpp"

namespace weshap {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::size_t max_active(const WeakLabelMatrix& weak_labels) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < weak_labels.rows(); ++i) best = std::max(best, weak_labels.active_count(i));
    return best;
}

// Active counts per row, plus per-class vote counts built only for classes that a holdout
// point actually asks about.
class VoteCache {
public:
    VoteCache(const WeakLabelMatrix& weak_labels, int num_classes)
        : weak_labels_(weak_labels), active_(weak_labels.rows()), by_class_(static_cast<std::size_t>(num_classes)) {
        for (std::size_t i = 0; i < weak_labels.rows(); ++i) {
            active_[i] = static_cast<std::uint32_t>(weak_labels.active_count(i));
        }
    }

    void prepare(int c) {
        auto& slot = by_class_[static_cast<std::size_t>(c)];
        if (slot) return;
        slot.emplace(weak_labels_.rows());
        for (std::size_t i = 0; i < weak_labels_.rows(); ++i) {
            auto row = weak_labels_.row(i);
            (*slot)[i] = static_cast<std::uint32_t>(std::count(row.begin(), row.end(), c));
        }
    }

    VoteCounts counts(std::size_t row, int c) const {
        std::size_t correct = (*by_class_[static_cast<std::size_t>(c)])[row];
        return {correct, active_[row] - correct};
    }

private:
    const WeakLabelMatrix& weak_labels_;
    std::vector<std::uint32_t> active_;
    std::vector<std::optional<std::vector<std::uint32_t>>> by_class_;
};

struct PendingContribution {
    std::uint32_t row;
    std::uint32_t lf;
    double weight;
};

}  // namespace

VoteCounts vote_counts(std::span<const int> row, int candidate_class) {
    VoteCounts counts;
    for (int v : row) {
        if (v == kAbstain) continue;
        (v == candidate_class ? counts.correct : counts.wrong) += 1;
    }
    return counts;
}

double weshap_weight(int lf_output, int candidate_class, VoteCounts counts, const SVTables& tables) {
    if (lf_output == kAbstain) return 0.0;
    if (lf_output == candidate_class) return tables.sv_plus(counts.correct, counts.wrong);
    return tables.sv_minus(counts.correct, counts.wrong);
}

double weshap_weight(const WeakLabelMatrix& weak_labels, std::size_t row, std::size_t lf, int candidate_class,
                     const SVTables& tables) {
    return weshap_weight(weak_labels(row, lf), candidate_class, vote_counts(weak_labels.row(row), candidate_class),
                         tables);
}

ContributionMatrix::ContributionMatrix(std::size_t rows, std::size_t lfs, std::vector<Contribution> entries)
    : rows_(rows), lfs_(lfs), entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(), [](const Contribution& a, const Contribution& b) {
        return a.row != b.row ? a.row < b.row : a.lf < b.lf;
    });
}

double ContributionMatrix::at(std::size_t row, std::size_t lf) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair{row, lf},
                               [](const Contribution& e, const std::pair<std::size_t, std::size_t>& key) {
                                   return e.row != key.first ? e.row < key.first : e.lf < key.second;
                               });
    if (it != entries_.end() && it->row == row && it->lf == lf) return it->weight;
    return 0.0;
}

std::vector<double> ContributionMatrix::column_sums() const {
    std::vector<double> sums(lfs_, 0.0);
    for (const auto& e : entries_) sums[e.lf] += e.weight;
    return sums;
}

double weshap_instance(std::size_t lf, const NeighborList& neighbors, int label, const WeakLabelMatrix& weak_labels,
                       Weighting weighting, const SVTables& tables) {
    double weighted = 0.0, total = 0.0;
    for (std::size_t r = 0; r < neighbors.size(); ++r) {
        double omega = neighbor_weight(neighbors.distances[r], weighting);
        weighted += omega * weshap_weight(weak_labels, neighbors.ids[r], lf, label, tables);
        total += omega;
    }
    return total > 0.0 ? weighted / total : 0.0;
}

double weshap_instance(std::size_t lf, std::span<const double> features, int label, const SplitBundle& bundle,
                       const ProxyConfig& config, const SVTables& tables) {
    check_k(config.k, bundle.num_train());
    NeighborIndex index(bundle.train_features, config.metric);
    return weshap_instance(lf, index.query(features, config.k), label, bundle.weak_labels, config.weighting, tables);
}

WeShapResult weshap_dataset(const FeatureMatrix& train_features, const WeakLabelMatrix& weak_labels,
                            const LabeledSet& holdout, int num_classes, const ProxyConfig& config) {
    auto start = Clock::now();
    if (holdout.size() == 0) throw ConfigError("holdout set is empty");
    check_k(config.k, train_features.rows());
    if (weak_labels.rows() != train_features.rows()) {
        throw DataError("weak labels and training features disagree on row count");
    }
    const std::size_t n_val = holdout.size();
    const std::size_t m = weak_labels.num_lfs();

    WeShapResult result;
    result.config = config;
    result.holdout_size = n_val;

    auto t = Clock::now();
    result.table_size = max_active(weak_labels);
    auto tables = build_tables(std::max<std::size_t>(result.table_size, 1), num_classes);
    result.timings.tables_seconds = seconds_since(t);

    t = Clock::now();
    NeighborIndex index(train_features, config.metric);
    result.timings.index_seconds = seconds_since(t);

    t = Clock::now();
    auto neighbors = index.query_all(holdout.features, config.k);
    result.timings.neighbor_seconds = seconds_since(t);

    t = Clock::now();
    VoteCache votes(weak_labels, num_classes);
    for (int y : holdout.labels) votes.prepare(y);

    std::vector<std::vector<PendingContribution>> pending(n_val);
    parallel_for(n_val, [&](std::size_t v) {
        const auto& nb = neighbors[v];
        const int y = holdout.labels[v];
        double weight_sum = 0.0;
        for (double d : nb.distances) weight_sum += neighbor_weight(d, config.weighting);
        const double normalizer = static_cast<double>(n_val) * weight_sum;
        auto& out = pending[v];
        for (std::size_t r = 0; r < nb.size(); ++r) {
            const std::size_t i = nb.ids[r];
            const double share = neighbor_weight(nb.distances[r], config.weighting) / normalizer;
            const VoteCounts counts = votes.counts(i, y);
            auto row = weak_labels.row(i);
            for (std::size_t j = 0; j < m; ++j) {
                if (row[j] == kAbstain) continue;
                out.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                               weshap_weight(row[j], y, counts, tables) * share});
            }
        }
    });

    // Merge in holdout order so every (row, lf) sum is accumulated in the same sequence
    // regardless of how the work was split.
    std::vector<std::int64_t> slot_of_row(weak_labels.rows(), -1);
    std::vector<std::size_t> slot_rows;
    std::vector<double> dense;
    for (const auto& list : pending) {
        for (const auto& p : list) {
            auto& slot = slot_of_row[p.row];
            if (slot < 0) {
                slot = static_cast<std::int64_t>(slot_rows.size());
                slot_rows.push_back(p.row);
                dense.resize(dense.size() + m, 0.0);
            }
            dense[static_cast<std::size_t>(slot) * m + p.lf] += p.weight;
        }
    }
    std::vector<Contribution> entries;
    std::vector<std::size_t> sorted_rows = slot_rows;
    std::sort(sorted_rows.begin(), sorted_rows.end());
    for (std::size_t row : sorted_rows) {
        auto slot = static_cast<std::size_t>(slot_of_row[row]);
        for (std::size_t j = 0; j < m; ++j) {
            if (weak_labels(row, j) != kAbstain) entries.push_back({row, j, dense[slot * m + j]});
        }
    }
    result.contributions = ContributionMatrix(weak_labels.rows(), m, std::move(entries));
    result.values = result.contributions.column_sums();
    result.timings.scoring_seconds = seconds_since(t);

    result.soft_accuracy_full = soft_accuracy(Coalition::all(m), weak_labels, num_classes, config.weighting,
                                              holdout.labels, neighbors);
    result.timings.total_seconds = seconds_since(start);
    return result;
}

WeShapResult weshap_dataset(const SplitBundle& bundle, const ProxyConfig& config) {
    return weshap_dataset(bundle.train_features, bundle.weak_labels, bundle.valid, bundle.num_classes(), config);
}

namespace {

template <typename T, typename Key>
void stable_sort_by(std::vector<T>& items, Key key, bool descending) {
    std::stable_sort(items.begin(), items.end(), [&](const T& a, const T& b) {
        return descending ? key(a) > key(b) : key(a) < key(b);
    });
}

}  // namespace

Explanation explain(std::size_t val_index, const WeShapResult& result, const SplitBundle& bundle,
                    const ProxyConfig& config, std::size_t top_k) {
    if (val_index >= bundle.valid.size()) {
        throw ConfigError("validation index " + std::to_string(val_index) + " out of range (n_val=" +
                          std::to_string(bundle.valid.size()) + ")");
    }
    if (!(result.config == config) || result.holdout_size != bundle.valid.size() ||
        result.values.size() != bundle.num_lfs()) {
        throw ConfigError("explain: result was computed for a different bundle or configuration");
    }
    check_k(config.k, bundle.num_train());
    const std::size_t m = bundle.num_lfs();
    auto tables = build_tables(std::max<std::size_t>(result.table_size, 1), bundle.num_classes());
    NeighborIndex index(bundle.train_features, config.metric);
    auto nb = index.query(bundle.valid.features.row(val_index), config.k);

    Explanation ex;
    ex.val_index = val_index;
    ex.label = bundle.valid.labels[val_index];
    ex.lf_values.assign(m, 0.0);

    double weight_sum = 0.0;
    for (double d : nb.distances) weight_sum += neighbor_weight(d, config.weighting);
    for (std::size_t r = 0; r < nb.size(); ++r) {
        const std::size_t i = nb.ids[r];
        const double share = neighbor_weight(nb.distances[r], config.weighting) / weight_sum;
        const auto counts = vote_counts(bundle.weak_labels.row(i), ex.label);
        RowAttribution row_attr{i, nb.distances[r], 0.0};
        for (std::size_t j = 0; j < m; ++j) {
            int out = bundle.weak_labels(i, j);
            if (out == kAbstain) continue;
            double w = weshap_weight(out, ex.label, counts, tables) * share;
            ex.lf_values[j] += w;
            row_attr.mass += w;
            ex.lowest_weak_labels.push_back({i, j, out, w});
        }
        ex.lowest_rows.push_back(row_attr);
    }

    std::vector<LfAttribution> lfs;
    for (std::size_t j = 0; j < m; ++j) lfs.push_back({j, ex.lf_values[j]});
    ex.most_negative = lfs;
    stable_sort_by(ex.most_negative, [](const LfAttribution& a) { return a.value; }, false);
    ex.most_positive = lfs;
    stable_sort_by(ex.most_positive, [](const LfAttribution& a) { return a.value; }, true);

    std::sort(ex.lowest_rows.begin(), ex.lowest_rows.end(),
              [](const RowAttribution& a, const RowAttribution& b) { return a.row < b.row; });
    stable_sort_by(ex.lowest_rows, [](const RowAttribution& a) { return a.mass; }, false);
    std::sort(ex.lowest_weak_labels.begin(), ex.lowest_weak_labels.end(),
              [](const WeakLabelAttribution& a, const WeakLabelAttribution& b) {
                  return a.row != b.row ? a.row < b.row : a.lf < b.lf;
              });
    stable_sort_by(ex.lowest_weak_labels, [](const WeakLabelAttribution& a) { return a.weight; }, false);

    auto clamp = [top_k](auto& v) {
        if (v.size() > top_k) v.resize(top_k);
    };
    clamp(ex.most_negative);
    clamp(ex.most_positive);
    clamp(ex.lowest_rows);
    clamp(ex.lowest_weak_labels);
    return ex;
}

}  // namespace weshap
