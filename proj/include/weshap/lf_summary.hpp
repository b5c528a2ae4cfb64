#pragma once

#include <optional>
#include <span>
#include <vector>

#include "weshap/types.hpp"

namespace weshap {

/// Standard LF statistics. Coverage/overlap/conflict are fractions of all rows of the
/// matrix they were measured on; accuracy is correct/active on labeled rows.
struct LFStats {
    std::optional<double> accuracy;  // empty when the LF never fires on a labeled row
    double coverage = 0.0;
    double overlap = 0.0;
    double conflict = 0.0;
    std::size_t activation_count = 0;
};

using LFSummary = std::vector<LFStats>;

/// Coverage, overlap and conflict only; accuracy stays empty.
LFSummary lf_summary(const WeakLabelMatrix& weak_labels);

/// Every statistic measured on a single labeled matrix.
LFSummary lf_summary(const WeakLabelMatrix& weak_labels, std::span<const int> labels);

/// Coverage/overlap/conflict from the training matrix, accuracy from the validation matrix.
LFSummary lf_summary(const WeakLabelMatrix& train_weak_labels,
                     const WeakLabelMatrix& valid_weak_labels, std::span<const int> valid_labels);

/// Per-LF accuracy on labeled rows; empty optional for LFs that never fire there.
std::vector<std::optional<double>> lf_accuracy(const WeakLabelMatrix& weak_labels,
                                               std::span<const int> labels);
std::vector<double> lf_coverage(const WeakLabelMatrix& weak_labels);

}  // namespace weshap
