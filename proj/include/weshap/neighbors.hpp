#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "weshap/types.hpp"

namespace weshap {

/// K nearest training rows of one query, closest first; equal distances ordered by row id.
struct NeighborList {
    std::vector<std::size_t> ids;
    std::vector<double> distances;

    std::size_t size() const { return ids.size(); }
    friend bool operator==(const NeighborList&, const NeighborList&) = default;
};

/// Rows a query may return; empty span means every row.
using RowFilter = std::span<const std::uint8_t>;

/// Exact K-NN over a fixed training matrix. Euclidean and Manhattan queries walk a KD-tree;
/// cosine queries scan all rows against precomputed norms. Every path ranks candidates with
/// the same distance kernel as brute_force_knn, so results match it bit for bit.
class NeighborIndex {
public:
    NeighborIndex(const FeatureMatrix& points, Metric metric);

    Metric metric() const { return metric_; }
    std::size_t size() const { return points_.rows(); }
    std::size_t dims() const { return points_.dims(); }

    /// Returns min(k, #allowed rows) neighbors.
    NeighborList query(std::span<const double> q, std::size_t k, RowFilter allowed = {}) const;

    /// One query per row of `queries`, run in parallel; output order follows `queries`.
    std::vector<NeighborList> query_all(const FeatureMatrix& queries, std::size_t k,
                                        RowFilter allowed = {}) const;

private:
    struct Node {
        std::uint32_t begin = 0;
        std::uint32_t end = 0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::uint32_t split_dim = 0;
        double split_value = 0.0;
    };

    class Heap;

    std::int32_t build(std::uint32_t begin, std::uint32_t end);
    void search(std::int32_t node, std::span<const double> q, Heap& heap, RowFilter allowed) const;
    void scan(std::span<const double> q, Heap& heap, RowFilter allowed) const;

    FeatureMatrix points_;
    Metric metric_;
    std::vector<double> norms_;  // cosine only
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
};

/// Ordering key used for ranking: squared L2, L1 sum, or cosine distance.
double distance_key(std::span<const double> a, std::span<const double> b, Metric metric);
/// Reported distance for a ranking key (sqrt for Euclidean, identity otherwise).
double key_to_distance(double key, Metric metric);
/// 1 - cos(a, b); 1 when either vector is zero.
double cosine_distance(std::span<const double> a, std::span<const double> b, double norm_a,
                       double norm_b);
double l2_norm(std::span<const double> a);

/// Reference O(n) scan with the same tie rule as the index.
NeighborList brute_force_knn(const FeatureMatrix& points, std::span<const double> q, std::size_t k,
                             Metric metric, RowFilter allowed = {});

}  // namespace weshap
