#include "weshap/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "weshap/parallel.hpp"

namespace weshap {
namespace {

constexpr std::uint32_t kLeafSize = 16;

using Candidate = std::pair<double, std::size_t>;  // (key, row); lexicographic order is the tie rule

bool allowed_row(RowFilter allowed, std::size_t row) { return allowed.empty() || allowed[row] != 0; }

NeighborList to_list(std::vector<Candidate> best, Metric metric) {
    std::sort(best.begin(), best.end());
    NeighborList out;
    out.ids.reserve(best.size());
    out.distances.reserve(best.size());
    for (const auto& [key, row] : best) {
        out.ids.push_back(row);
        out.distances.push_back(key_to_distance(key, metric));
    }
    return out;
}

}  // namespace

double l2_norm(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

double cosine_distance(std::span<const double> a, std::span<const double> b, double norm_a,
                       double norm_b) {
    if (norm_a == 0.0 || norm_b == 0.0) return 1.0;
    double dot = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
    return 1.0 - dot / (norm_a * norm_b);
}

double distance_key(std::span<const double> a, std::span<const double> b, Metric metric) {
    switch (metric) {
        case Metric::kEuclidean: {
            double s = 0.0;
            for (std::size_t k = 0; k < a.size(); ++k) {
                double d = a[k] - b[k];
                s += d * d;
            }
            return s;
        }
        case Metric::kManhattan: {
            double s = 0.0;
            for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
            return s;
        }
        case Metric::kCosine:
            return cosine_distance(a, b, l2_norm(a), l2_norm(b));
    }
    return 0.0;
}

double key_to_distance(double key, Metric metric) {
    return metric == Metric::kEuclidean ? std::sqrt(key) : key;
}

class NeighborIndex::Heap {
public:
    explicit Heap(std::size_t k) : k_(k) { items_.reserve(k); }

    bool full() const { return items_.size() >= k_; }
    double worst_key() const { return items_.front().first; }

    void offer(double key, std::size_t row) {
        Candidate c{key, row};
        if (!full()) {
            items_.push_back(c);
            std::push_heap(items_.begin(), items_.end());
        } else if (c < items_.front()) {
            std::pop_heap(items_.begin(), items_.end());
            items_.back() = c;
            std::push_heap(items_.begin(), items_.end());
        }
    }

    std::vector<Candidate> take() { return std::move(items_); }

private:
    std::size_t k_;
    std::vector<Candidate> items_;
};

NeighborIndex::NeighborIndex(const FeatureMatrix& points, Metric metric) : points_(points), metric_(metric) {
    points_.validate("neighbor index points");
    if (metric_ == Metric::kCosine) {
        norms_.resize(points_.rows());
        for (std::size_t i = 0; i < points_.rows(); ++i) norms_[i] = l2_norm(points_.row(i));
        return;
    }
    order_.resize(points_.rows());
    for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
    nodes_.reserve(2 * (points_.rows() / kLeafSize + 1));
    build(0, static_cast<std::uint32_t>(order_.size()));
}

std::int32_t NeighborIndex::build(std::uint32_t begin, std::uint32_t end) {
    auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= kLeafSize) return id;

    std::size_t dims = points_.dims();
    std::uint32_t best_dim = 0;
    double best_spread = -1.0;
    for (std::size_t k = 0; k < dims; ++k) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (auto it = begin; it < end; ++it) {
            double v = points_(order_[it], k);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > best_spread) {
            best_spread = hi - lo;
            best_dim = static_cast<std::uint32_t>(k);
        }
    }
    if (best_spread <= 0.0) return id;  // all points identical: keep as a leaf

    std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) { return points_(a, best_dim) < points_(b, best_dim); });
    double split = points_(order_[mid], best_dim);
    nodes_[id].split_dim = best_dim;
    nodes_[id].split_value = split;
    auto left = build(begin, mid);
    auto right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

void NeighborIndex::search(std::int32_t node_id, std::span<const double> q, Heap& heap,
                           RowFilter allowed) const {
    const Node& node = nodes_[static_cast<std::size_t>(node_id)];
    if (node.left < 0) {
        for (auto it = node.begin; it < node.end; ++it) {
            std::size_t row = order_[it];
            if (!allowed_row(allowed, row)) continue;
            heap.offer(distance_key(q, points_.row(row), metric_), row);
        }
        return;
    }
    // Left holds coordinates <= split, right >= split. The single-axis gap is a lower bound
    // on the full key under floating-point rounding too, since every term is non-negative.
    double diff = q[node.split_dim] - node.split_value;
    auto near = diff < 0.0 ? node.left : node.right;
    auto far = diff < 0.0 ? node.right : node.left;
    search(near, q, heap, allowed);
    double bound = metric_ == Metric::kEuclidean ? diff * diff : std::abs(diff);
    // Equal bounds must still be explored: a tied key with a lower row id can win.
    if (!heap.full() || bound <= heap.worst_key()) search(far, q, heap, allowed);
}

void NeighborIndex::scan(std::span<const double> q, Heap& heap, RowFilter allowed) const {
    double qn = l2_norm(q);
    for (std::size_t row = 0; row < points_.rows(); ++row) {
        if (!allowed_row(allowed, row)) continue;
        heap.offer(cosine_distance(q, points_.row(row), qn, norms_[row]), row);
    }
}

NeighborList NeighborIndex::query(std::span<const double> q, std::size_t k, RowFilter allowed) const {
    if (q.size() != points_.dims()) {
        throw DataError("query has d=" + std::to_string(q.size()) + ", index has d=" +
                        std::to_string(points_.dims()));
    }
    if (!allowed.empty() && allowed.size() != points_.rows()) {
        throw ConfigError("row filter length does not match the index size");
    }
    if (k == 0) return {};
    Heap heap(k);
    if (metric_ == Metric::kCosine) {
        scan(q, heap, allowed);
    } else if (!nodes_.empty()) {
        search(0, q, heap, allowed);
    }
    return to_list(heap.take(), metric_);
}

std::vector<NeighborList> NeighborIndex::query_all(const FeatureMatrix& queries, std::size_t k,
                                                   RowFilter allowed) const {
    std::vector<NeighborList> out(queries.rows());
    parallel_for(queries.rows(), [&](std::size_t i) { out[i] = query(queries.row(i), k, allowed); });
    return out;
}

NeighborList brute_force_knn(const FeatureMatrix& points, std::span<const double> q, std::size_t k,
                             Metric metric, RowFilter allowed) {
    std::vector<Candidate> all;
    double qn = l2_norm(q);
    for (std::size_t row = 0; row < points.rows(); ++row) {
        if (!allowed_row(allowed, row)) continue;
        double key = metric == Metric::kCosine
                         ? cosine_distance(q, points.row(row), qn, l2_norm(points.row(row)))
                         : distance_key(q, points.row(row), metric);
        all.emplace_back(key, row);
    }
    std::sort(all.begin(), all.end());
    if (all.size() > k) all.resize(k);
    return to_list(std::move(all), metric);
}

}  // namespace weshap
