#pragma once

// Shared fixtures for the unit and acceptance tests: random bundles and reference
// implementations that share no code with the library beyond the plain data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "weshap/types.hpp"

namespace weshap::testing {

struct InstanceShape {
    std::size_t n = 40;
    std::size_t d = 3;
    std::size_t m = 5;
    std::size_t n_val = 10;
    int num_classes = 2;
    double activation = 0.4;
    // Coordinates are rounded to this grid so distance ties actually happen.
    double grid = 0.5;
};

inline SplitBundle random_bundle(const InstanceShape& s, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> cls(0, s.num_classes - 1);
    auto coord = [&] { return std::round(unit(rng) * 4.0 / s.grid) * s.grid - 2.0; };
    auto features = [&](std::size_t rows) {
        FeatureMatrix f(rows, s.d);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t k = 0; k < s.d; ++k) f(i, k) = coord();
        return f;
    };
    SplitBundle b;
    b.spec.num_classes = s.num_classes;
    b.train_features = features(s.n);
    std::vector<int> entries(s.n * s.m, kAbstain);
    for (auto& e : entries) {
        if (unit(rng) < s.activation) e = cls(rng);
    }
    b.weak_labels = WeakLabelMatrix(s.n, s.m, std::move(entries));
    b.valid.features = features(s.n_val);
    b.valid.labels.resize(s.n_val);
    for (auto& y : b.valid.labels) y = cls(rng);
    return b;
}

inline double ref_distance(std::span<const double> a, std::span<const double> b, Metric metric) {
    double s = 0.0;
    switch (metric) {
        case Metric::kEuclidean:
            for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
            return std::sqrt(s);
        case Metric::kManhattan:
            for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
            return s;
        case Metric::kCosine: {
            double na = 0.0, nb = 0.0;
            for (std::size_t k = 0; k < a.size(); ++k) {
                s += a[k] * b[k];
                na += a[k] * a[k];
                nb += b[k] * b[k];
            }
            if (na == 0.0 || nb == 0.0) return 1.0;
            return 1.0 - s / (std::sqrt(na) * std::sqrt(nb));
        }
    }
    return 0.0;
}

/// Sort every candidate by (distance, index) and keep the first k.
inline std::vector<std::size_t> ref_neighbors(const FeatureMatrix& pts, std::span<const double> q, std::size_t k,
                                              Metric metric, const std::vector<bool>* allowed = nullptr) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < pts.rows(); ++i) {
        if (allowed && !(*allowed)[i]) continue;
        all.emplace_back(ref_distance(q, pts.row(i), metric), i);
    }
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> ids;
    for (std::size_t r = 0; r < std::min(k, all.size()); ++r) ids.push_back(all[r].second);
    return ids;
}

/// MV + KNN soft accuracy of the LFs in `mask`, written from the definitions: uniform
/// class probabilities for rows where no coalition member votes, neighbor average of the
/// vote shares otherwise.
inline double ref_soft_accuracy(const SplitBundle& b, std::uint64_t mask, const ProxyConfig& cfg) {
    const int c = b.num_classes();
    double total = 0.0;
    for (std::size_t v = 0; v < b.valid.size(); ++v) {
        auto q = b.valid.features.row(v);
        auto ids = ref_neighbors(b.train_features, q, cfg.k, cfg.metric);
        double num = 0.0, den = 0.0;
        for (std::size_t i : ids) {
            double omega = 1.0;
            if (cfg.weighting == Weighting::kInverseDistance) {
                omega = 1.0 / (ref_distance(q, b.train_features.row(i), cfg.metric) + 1e-12);
            }
            int votes = 0, hits = 0;
            for (std::size_t j = 0; j < b.num_lfs(); ++j) {
                if (!((mask >> j) & 1U)) continue;
                int out = b.weak_labels(i, j);
                if (out == kAbstain) continue;
                ++votes;
                hits += out == b.valid.labels[v] ? 1 : 0;
            }
            double theta = votes == 0 ? 1.0 / c : static_cast<double>(hits) / votes;
            num += omega * theta;
            den += omega;
        }
        total += num / den;
    }
    return total / static_cast<double>(b.valid.size());
}

inline double ref_utility(const SplitBundle& b, std::uint64_t mask, const ProxyConfig& cfg) {
    if (mask == 0) return 0.0;
    return ref_soft_accuracy(b, mask, cfg) - 1.0 / b.num_classes();
}

/// Shapley values by averaging marginal gains over every ordering, on reference utilities.
inline std::vector<double> ref_shapley(const SplitBundle& b, const ProxyConfig& cfg) {
    const std::size_t m = b.num_lfs();
    std::vector<double> v(std::size_t{1} << m);
    for (std::uint64_t mask = 0; mask < v.size(); ++mask) v[mask] = ref_utility(b, mask, cfg);
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> phi(m, 0.0);
    double count = 0.0;
    do {
        std::uint64_t mask = 0;
        for (std::size_t p : order) {
            phi[p] += v[mask | (std::uint64_t{1} << p)] - v[mask];
            mask |= std::uint64_t{1} << p;
        }
        count += 1.0;
    } while (std::next_permutation(order.begin(), order.end()));
    for (auto& x : phi) x /= count;
    return phi;
}

}  // namespace weshap::testing
