#include "weshap/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace weshap {

void TaskSpec::validate() const {
    if (num_classes < 2) {
        throw DataError("num_classes must be >= 2, got " + std::to_string(num_classes));
    }
    if (abstain_token >= 0 && abstain_token < num_classes) {
        throw DataError("abstain token collides with a class label");
    }
}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t dims)
    : rows_(rows), dims_(dims), values_(rows * dims, 0.0) {}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t dims, std::vector<double> values)
    : rows_(rows), dims_(dims), values_(std::move(values)) {
    if (values_.size() != rows_ * dims_) {
        throw DataError("feature buffer holds " + std::to_string(values_.size()) +
                        " values, expected " + std::to_string(rows_ * dims_));
    }
}

void FeatureMatrix::validate(std::string_view what) const {
    if (rows_ == 0 || dims_ == 0) {
        throw DataError(std::string(what) + ": empty feature matrix");
    }
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t k = 0; k < dims_; ++k) {
            if (!std::isfinite((*this)(i, k))) {
                std::ostringstream msg;
                msg << what << ": non-finite value at (" << i << "," << k << ")";
                throw DataError(msg.str());
            }
        }
    }
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> ids) const {
    FeatureMatrix out(ids.size(), dims_);
    for (std::size_t r = 0; r < ids.size(); ++r) {
        std::copy_n(row(ids[r]).begin(), dims_, out.row(r).begin());
    }
    return out;
}

void LabeledSet::validate(const TaskSpec& spec, std::string_view what) const {
    features.validate(what);
    if (labels.size() != features.rows()) {
        throw DataError(std::string(what) + ": " + std::to_string(labels.size()) +
                        " labels for " + std::to_string(features.rows()) + " feature rows");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!spec.is_class(labels[i])) {
            std::ostringstream msg;
            msg << what << ": class out of range at (" << i << ",0): " << labels[i];
            throw DataError(msg.str());
        }
    }
}

LabeledSet LabeledSet::select_rows(std::span<const std::size_t> ids) const {
    LabeledSet out{features.select_rows(ids), {}};
    out.labels.reserve(ids.size());
    for (auto id : ids) out.labels.push_back(labels[id]);
    return out;
}

WeakLabelMatrix::WeakLabelMatrix(std::size_t rows, std::size_t lfs, std::vector<int> entries,
                                 std::vector<std::string> names)
    : rows_(rows), lfs_(lfs), entries_(std::move(entries)), names_(std::move(names)) {
    if (entries_.size() != rows_ * lfs_) {
        throw DataError("weak-label buffer holds " + std::to_string(entries_.size()) +
                        " entries, expected " + std::to_string(rows_ * lfs_));
    }
    if (names_.empty()) {
        names_.reserve(lfs_);
        for (std::size_t j = 0; j < lfs_; ++j) names_.push_back("lf_" + std::to_string(j));
    } else if (names_.size() != lfs_) {
        throw DataError("got " + std::to_string(names_.size()) + " LF names for " +
                        std::to_string(lfs_) + " columns");
    }
}

void WeakLabelMatrix::validate(const TaskSpec& spec, std::string_view what) const {
    if (lfs_ == 0) throw DataError(std::string(what) + ": no labeling-function columns");
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < lfs_; ++j) {
            int v = (*this)(i, j);
            if (v != spec.abstain_token && !spec.is_class(v)) {
                std::ostringstream msg;
                msg << what << ": class out of range at (" << i << "," << j << "): " << v;
                throw DataError(msg.str());
            }
        }
    }
}

std::size_t WeakLabelMatrix::active_count(std::size_t i) const {
    auto r = row(i);
    return static_cast<std::size_t>(std::count_if(r.begin(), r.end(), [](int v) { return v != kAbstain; }));
}

WeakLabelMatrix WeakLabelMatrix::select_rows(std::span<const std::size_t> ids) const {
    std::vector<int> out;
    out.reserve(ids.size() * lfs_);
    for (auto id : ids) {
        auto r = row(id);
        out.insert(out.end(), r.begin(), r.end());
    }
    return WeakLabelMatrix(ids.size(), lfs_, std::move(out), names_);
}

Metric parse_metric(std::string_view name) {
    if (name == "euclidean") return Metric::kEuclidean;
    if (name == "manhattan") return Metric::kManhattan;
    if (name == "cosine") return Metric::kCosine;
    throw ConfigError("unknown metric '" + std::string(name) + "' (euclidean|manhattan|cosine)");
}

Weighting parse_weighting(std::string_view name) {
    if (name == "uniform") return Weighting::kUniform;
    if (name == "inverse-distance" || name == "distance") return Weighting::kInverseDistance;
    throw ConfigError("unknown weighting '" + std::string(name) + "' (uniform|inverse-distance)");
}

std::string_view to_string(Metric metric) {
    switch (metric) {
        case Metric::kEuclidean: return "euclidean";
        case Metric::kManhattan: return "manhattan";
        case Metric::kCosine: return "cosine";
    }
    return "?";
}

std::string_view to_string(Weighting weighting) {
    return weighting == Weighting::kUniform ? "uniform" : "inverse-distance";
}

void SplitBundle::validate() const {
    spec.validate();
    train_features.validate("train features");
    weak_labels.validate(spec, "weak labels");
    if (weak_labels.rows() != train_features.rows()) {
        throw DataError("weak labels have " + std::to_string(weak_labels.rows()) +
                        " rows but train features have " + std::to_string(train_features.rows()));
    }
    valid.validate(spec, "validation set");
    if (valid.features.dims() != train_features.dims()) {
        throw DataError("dimension mismatch: validation features have d=" +
                        std::to_string(valid.features.dims()) + ", train features d=" +
                        std::to_string(train_features.dims()));
    }
    if (valid_weak_labels) {
        valid_weak_labels->validate(spec, "validation weak labels");
        if (valid_weak_labels->rows() != valid.size() ||
            valid_weak_labels->num_lfs() != weak_labels.num_lfs()) {
            throw DataError("validation weak labels must be " + std::to_string(valid.size()) + "x" +
                            std::to_string(weak_labels.num_lfs()));
        }
    }
    if (test) {
        test->validate(spec, "test set");
        if (test->features.dims() != train_features.dims()) {
            throw DataError("dimension mismatch: test features have d=" +
                            std::to_string(test->features.dims()) + ", train features d=" +
                            std::to_string(train_features.dims()));
        }
    }
}

Coalition Coalition::from_mask(std::uint64_t mask, std::size_t num_lfs) {
    Coalition c(num_lfs);
    for (std::size_t j = 0; j < num_lfs && j < 64; ++j) c.members_[j] = (mask >> j) & 1U;
    return c;
}

Coalition Coalition::from_indices(std::span<const std::size_t> lfs, std::size_t num_lfs) {
    Coalition c(num_lfs);
    for (auto j : lfs) c.members_.at(j) = true;
    return c;
}

std::size_t Coalition::size() const {
    return static_cast<std::size_t>(std::count(members_.begin(), members_.end(), true));
}

}  // namespace weshap
