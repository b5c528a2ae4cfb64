#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace weshap {

/// Sentinel for "labeling function abstained", both on disk and in memory.
inline constexpr int kAbstain = -1;

/// Input data failed validation. The message names the offending file/row/column.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or argument (K larger than the pool, unknown metric, ...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct TaskSpec {
    int num_classes = 2;
    int abstain_token = kAbstain;

    void validate() const;
    bool is_class(int label) const { return label >= 0 && label < num_classes; }

    friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

/// Dense row-major matrix of 64-bit reals.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t rows, std::size_t dims);
    FeatureMatrix(std::size_t rows, std::size_t dims, std::vector<double> values);

    std::size_t rows() const { return rows_; }
    std::size_t dims() const { return dims_; }
    bool empty() const { return rows_ == 0; }

    std::span<const double> row(std::size_t i) const { return {values_.data() + i * dims_, dims_}; }
    std::span<double> row(std::size_t i) { return {values_.data() + i * dims_, dims_}; }
    double operator()(std::size_t i, std::size_t k) const { return values_[i * dims_ + k]; }
    double& operator()(std::size_t i, std::size_t k) { return values_[i * dims_ + k]; }

    const std::vector<double>& values() const { return values_; }

    /// Throws DataError on NaN/inf or an empty shape; `what` prefixes the message.
    void validate(std::string_view what = "features") const;

    FeatureMatrix select_rows(std::span<const std::size_t> ids) const;

    friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t dims_ = 0;
    std::vector<double> values_;
};

struct LabeledSet {
    FeatureMatrix features;
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
    void validate(const TaskSpec& spec, std::string_view what = "labeled set") const;
    LabeledSet select_rows(std::span<const std::size_t> ids) const;

    friend bool operator==(const LabeledSet&, const LabeledSet&) = default;
};

/// n x m matrix of LF outputs; each entry is kAbstain or a class in 0..C-1.
class WeakLabelMatrix {
public:
    WeakLabelMatrix() = default;
    WeakLabelMatrix(std::size_t rows, std::size_t lfs, std::vector<int> entries,
                    std::vector<std::string> names = {});

    std::size_t rows() const { return rows_; }
    std::size_t num_lfs() const { return lfs_; }

    int operator()(std::size_t i, std::size_t j) const { return entries_[i * lfs_ + j]; }
    int& operator()(std::size_t i, std::size_t j) { return entries_[i * lfs_ + j]; }
    std::span<const int> row(std::size_t i) const { return {entries_.data() + i * lfs_, lfs_}; }

    const std::vector<int>& entries() const { return entries_; }
    const std::vector<std::string>& names() const { return names_; }

    void validate(const TaskSpec& spec, std::string_view what = "weak labels") const;

    /// Number of non-abstaining LFs on row i.
    std::size_t active_count(std::size_t i) const;

    WeakLabelMatrix select_rows(std::span<const std::size_t> ids) const;

    friend bool operator==(const WeakLabelMatrix&, const WeakLabelMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t lfs_ = 0;
    std::vector<int> entries_;
    std::vector<std::string> names_;
};

enum class Metric { kEuclidean, kManhattan, kCosine };
enum class Weighting { kUniform, kInverseDistance };

Metric parse_metric(std::string_view name);
Weighting parse_weighting(std::string_view name);
std::string_view to_string(Metric metric);
std::string_view to_string(Weighting weighting);

struct ProxyConfig {
    std::size_t k = 10;
    Metric metric = Metric::kEuclidean;
    Weighting weighting = Weighting::kUniform;

    friend bool operator==(const ProxyConfig&, const ProxyConfig&) = default;
};

struct SplitBundle {
    FeatureMatrix train_features;
    WeakLabelMatrix weak_labels;
    LabeledSet valid;
    /// LF outputs on the validation rows; needed for accuracy-based statistics.
    std::optional<WeakLabelMatrix> valid_weak_labels;
    std::optional<LabeledSet> test;
    TaskSpec spec;

    std::size_t num_train() const { return train_features.rows(); }
    std::size_t num_lfs() const { return weak_labels.num_lfs(); }
    int num_classes() const { return spec.num_classes; }

    /// Checks every cross-component invariant; throws DataError.
    void validate() const;

    friend bool operator==(const SplitBundle&, const SplitBundle&) = default;
};

/// Subset of LFs taking part in a proxy pipeline run.
class Coalition {
public:
    Coalition() = default;
    explicit Coalition(std::size_t num_lfs, bool all = false) : members_(num_lfs, all) {}

    static Coalition all(std::size_t num_lfs) { return Coalition(num_lfs, true); }
    static Coalition none(std::size_t num_lfs) { return Coalition(num_lfs, false); }
    static Coalition from_mask(std::uint64_t mask, std::size_t num_lfs);
    static Coalition from_indices(std::span<const std::size_t> lfs, std::size_t num_lfs);

    std::size_t num_lfs() const { return members_.size(); }
    bool contains(std::size_t j) const { return members_[j]; }
    void set(std::size_t j, bool in = true) { members_[j] = in; }
    std::size_t size() const;

private:
    std::vector<bool> members_;
};

}  // namespace weshap
