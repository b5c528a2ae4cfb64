#include "weshap/synth.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace weshap {

SynthKind parse_synth_kind(std::string_view name) {
    if (name == "running-example") return SynthKind::kRunningExample;
    if (name == "motivating") return SynthKind::kMotivating;
    if (name == "blobs") return SynthKind::kBlobs;
    throw ConfigError("unknown synth kind '" + std::string(name) +
                      "' (expected running-example, motivating, or blobs)");
}

SplitBundle running_example() {
    SplitBundle b;
    b.spec.num_classes = 2;
    b.train_features = FeatureMatrix(6, 2, {0.0, 0.0, 0.5, 0.0, 0.0, 0.5, 5.0, 5.0, 5.5, 5.0, 5.0, 5.5});
    std::vector<std::string> names{"lambda1", "lambda2", "lambda3"};
    // clang-format off
    b.weak_labels = WeakLabelMatrix(6, 3, {
         0, -1, -1,
         0, -1, -1,
         0,  1, -1,
         0, -1,  1,
        -1, -1,  1,
        -1,  1, -1,
    }, names);
    // clang-format on
    b.valid.features = FeatureMatrix(2, 2, {0.3, 0.3, 5.3, 5.3});
    b.valid.labels = {0, 1};
    // What the LFs say about the validation points themselves: x7 falls in lambda1's
    // region, x8 in lambda3's.
    b.valid_weak_labels = WeakLabelMatrix(2, 3, {0, -1, -1, -1, -1, 1}, names);
    return b;
}

namespace {

struct Segment {
    double lo, hi;
    int label;
    int lf;     // index of the single active LF, -1 for none
    int vote;   // its output
};

// Class 0 on the left, class 1 on the right, boundary at -0.41. Nothing lives in (-0.2, 0).
const std::vector<Segment> kMotivatingSegments{
    {-1.6, -0.6, 0, 0, 0},
    {-0.6, -0.41, 0, 1, 1},
    {-0.41, -0.2, 1, 1, 1},
    {0.0, 1.2, 1, -1, 0},
    {1.2, 2.2, 1, 2, 1},
};

struct Sample {
    LabeledSet set;
    WeakLabelMatrix weak_labels;
};

Sample sample_motivating(std::size_t n, double flip_rate, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double total = 0.0;
    for (const auto& s : kMotivatingSegments) total += s.hi - s.lo;

    std::vector<double> xs;
    std::vector<int> ys, entries;
    // Rounding the cumulative length keeps the segment counts summing to exactly n.
    double covered = 0.0;
    std::size_t placed = 0;
    for (const auto& s : kMotivatingSegments) {
        covered += s.hi - s.lo;
        auto upto = static_cast<std::size_t>(std::llround(static_cast<double>(n) * covered / total));
        const std::size_t count = upto - placed;
        placed = upto;
        const double cell = (s.hi - s.lo) / static_cast<double>(count == 0 ? 1 : count);
        for (std::size_t t = 0; t < count; ++t) {
            xs.push_back(s.lo + (static_cast<double>(t) + unit(rng)) * cell);
            ys.push_back(s.label);
            int row[3] = {kAbstain, kAbstain, kAbstain};
            if (s.lf >= 0) {
                int vote = s.vote;
                // LF2 is the boundary LF and stays noise-free; the other two flip occasionally.
                if (s.lf != 1 && unit(rng) < flip_rate) vote = 1 - vote;
                row[s.lf] = vote;
            }
            entries.insert(entries.end(), row, row + 3);
        }
    }
    Sample out;
    out.set.features = FeatureMatrix(xs.size(), 1, xs);
    out.set.labels = ys;
    out.weak_labels = WeakLabelMatrix(xs.size(), 3, std::move(entries), {"lf1_left", "lf2_boundary", "lf3_right"});
    return out;
}

}  // namespace

SplitBundle motivating_example(const MotivatingParams& params, std::uint64_t seed) {
    if (params.n_train < 10 || params.n_valid < 10 || params.n_test < 10) {
        throw ConfigError("motivating example needs at least 10 rows per split");
    }
    if (params.flip_rate < 0.0 || params.flip_rate > 0.5) throw ConfigError("flip rate must lie in [0, 0.5]");
    std::mt19937_64 rng(seed);
    auto train = sample_motivating(params.n_train, params.flip_rate, rng);
    auto valid = sample_motivating(params.n_valid, params.flip_rate, rng);
    auto test = sample_motivating(params.n_test, params.flip_rate, rng);

    SplitBundle b;
    b.spec.num_classes = 2;
    b.train_features = std::move(train.set.features);
    b.weak_labels = std::move(train.weak_labels);
    b.valid = std::move(valid.set);
    b.valid_weak_labels = std::move(valid.weak_labels);
    b.test = std::move(test.set);
    return b;
}

SplitBundle blobs(const BlobParams& params, std::uint64_t seed) {
    const int c = params.num_classes;
    if (c < 2) throw ConfigError("blobs need at least two classes");
    if (params.dims == 0) throw ConfigError("blobs need at least one dimension");
    if (params.n_train == 0 || params.n_valid == 0) throw ConfigError("blobs need training and validation rows");
    if (params.clean_lfs + params.flipped_lfs == 0) throw ConfigError("blobs need at least one LF");
    if (!(params.coverage > 0.0 && params.coverage <= 1.0)) throw ConfigError("coverage must lie in (0, 1]");
    if (!(params.accuracy > 0.0 && params.accuracy <= 1.0)) throw ConfigError("accuracy must lie in (0, 1]");
    if (!(params.spread >= 0.0) || !(params.separation >= 0.0)) throw ConfigError("spread and separation must be >= 0");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<double> centers(static_cast<std::size_t>(c) * params.dims);
    for (auto& v : centers) v = params.separation * (2.0 * unit(rng) - 1.0);

    const std::size_t m = params.clean_lfs + params.flipped_lfs;
    // Off-class firing rate that makes a clean LF's expected accuracy equal params.accuracy
    // when classes are balanced, capped at always firing.
    const double off_rate =
        std::min(1.0, params.coverage * (1.0 - params.accuracy) / (params.accuracy * static_cast<double>(c - 1)));

    std::vector<std::string> names;
    for (std::size_t j = 0; j < m; ++j) {
        int target = static_cast<int>(j % static_cast<std::size_t>(c));
        names.push_back((j < params.clean_lfs ? "clean_" : "flipped_") + std::to_string(j) + "_c" +
                        std::to_string(target));
    }

    auto sample = [&](std::size_t n, Sample& out) {
        FeatureMatrix f(n, params.dims);
        std::vector<int> labels(n), entries(n * m, kAbstain);
        for (std::size_t i = 0; i < n; ++i) {
            int y = static_cast<int>(i % static_cast<std::size_t>(c));
            labels[i] = y;
            for (std::size_t k = 0; k < params.dims; ++k) {
                f(i, k) = centers[static_cast<std::size_t>(y) * params.dims + k] + params.spread * normal(rng);
            }
            for (std::size_t j = 0; j < m; ++j) {
                int target = static_cast<int>(j % static_cast<std::size_t>(c));
                double draw = unit(rng);
                if (j < params.clean_lfs) {
                    if (draw < (y == target ? params.coverage : off_rate)) entries[i * m + j] = target;
                } else if (y == target && draw < params.coverage) {
                    int shift = 1 + static_cast<int>(unit(rng) * (c - 1));
                    entries[i * m + j] = (target + std::min(shift, c - 1)) % c;
                }
            }
        }
        out.set.features = std::move(f);
        out.set.labels = std::move(labels);
        out.weak_labels = WeakLabelMatrix(n, m, std::move(entries), names);
    };

    Sample train, valid, test;
    sample(params.n_train, train);
    sample(params.n_valid, valid);
    SplitBundle b;
    b.spec.num_classes = c;
    b.train_features = std::move(train.set.features);
    b.weak_labels = std::move(train.weak_labels);
    b.valid = std::move(valid.set);
    b.valid_weak_labels = std::move(valid.weak_labels);
    if (params.n_test > 0) {
        sample(params.n_test, test);
        b.test = std::move(test.set);
    }
    return b;
}

}  // namespace weshap
