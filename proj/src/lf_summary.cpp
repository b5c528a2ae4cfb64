#include "weshap/lf_summary.hpp"

#include <algorithm>

namespace weshap {

std::vector<std::optional<double>> lf_accuracy(const WeakLabelMatrix& weak_labels,
                                               std::span<const int> labels) {
    if (labels.size() != weak_labels.rows()) {
        throw DataError("accuracy needs one label per weak-label row");
    }
    std::size_t m = weak_labels.num_lfs();
    std::vector<std::size_t> active(m, 0), correct(m, 0);
    for (std::size_t i = 0; i < weak_labels.rows(); ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            int v = weak_labels(i, j);
            if (v == kAbstain) continue;
            ++active[j];
            if (v == labels[i]) ++correct[j];
        }
    }
    std::vector<std::optional<double>> acc(m);
    for (std::size_t j = 0; j < m; ++j) {
        if (active[j] > 0) acc[j] = static_cast<double>(correct[j]) / static_cast<double>(active[j]);
    }
    return acc;
}

std::vector<double> lf_coverage(const WeakLabelMatrix& weak_labels) {
    std::size_t m = weak_labels.num_lfs(), n = weak_labels.rows();
    std::vector<double> cov(m, 0.0);
    if (n == 0) return cov;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) cov[j] += weak_labels(i, j) != kAbstain ? 1.0 : 0.0;
    }
    for (auto& c : cov) c /= static_cast<double>(n);
    return cov;
}

namespace {

void fill_interaction_stats(const WeakLabelMatrix& wl, LFSummary& out) {
    std::size_t m = wl.num_lfs(), n = wl.rows();
    std::vector<std::size_t> active(m, 0), overlap(m, 0), conflict(m, 0);
    std::vector<int> counts;
    for (std::size_t i = 0; i < n; ++i) {
        auto row = wl.row(i);
        // Per-row class histogram lets each LF check "someone else active" and
        // "someone else disagrees" in O(1).
        std::size_t total = 0;
        int max_label = -1;
        for (int v : row) max_label = std::max(max_label, v);
        counts.assign(static_cast<std::size_t>(max_label + 1), 0);
        for (int v : row) {
            if (v == kAbstain) continue;
            ++counts[static_cast<std::size_t>(v)];
            ++total;
        }
        for (std::size_t j = 0; j < m; ++j) {
            int v = row[j];
            if (v == kAbstain) continue;
            ++active[j];
            if (total > 1) ++overlap[j];
            if (total > static_cast<std::size_t>(counts[static_cast<std::size_t>(v)])) ++conflict[j];
        }
    }
    double denom = n == 0 ? 1.0 : static_cast<double>(n);
    for (std::size_t j = 0; j < m; ++j) {
        out[j].activation_count = active[j];
        out[j].coverage = static_cast<double>(active[j]) / denom;
        out[j].overlap = static_cast<double>(overlap[j]) / denom;
        out[j].conflict = static_cast<double>(conflict[j]) / denom;
    }
}

}  // namespace

LFSummary lf_summary(const WeakLabelMatrix& weak_labels) {
    LFSummary out(weak_labels.num_lfs());
    fill_interaction_stats(weak_labels, out);
    return out;
}

LFSummary lf_summary(const WeakLabelMatrix& weak_labels, std::span<const int> labels) {
    return lf_summary(weak_labels, weak_labels, labels);
}

LFSummary lf_summary(const WeakLabelMatrix& train_weak_labels,
                     const WeakLabelMatrix& valid_weak_labels, std::span<const int> valid_labels) {
    if (train_weak_labels.num_lfs() != valid_weak_labels.num_lfs()) {
        throw DataError("train and validation weak labels have different LF counts");
    }
    LFSummary out(train_weak_labels.num_lfs());
    fill_interaction_stats(train_weak_labels, out);
    auto acc = lf_accuracy(valid_weak_labels, valid_labels);
    for (std::size_t j = 0; j < out.size(); ++j) out[j].accuracy = acc[j];
    return out;
}

}  // namespace weshap
