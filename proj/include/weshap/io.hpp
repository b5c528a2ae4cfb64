#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "weshap/types.hpp"

namespace weshap {

// File formats
//   features     CSV of d numeric columns (optional header), or binary: "WSFM", u32 n, u32 d,
//                u32 reserved, then n*d little-endian f64 values, row-major.
//   weak labels  CSV of integers, -1 = abstain; optional header row of LF names.
//   labels       CSV, one integer column, optional header.
//   manifest     JSON {train, weak_labels, valid_features, valid_labels, valid_weak_labels,
//                test_features?, test_labels?, num_classes, k?, metric?, weights?};
//                relative paths resolve against the manifest's directory.

FeatureMatrix read_features(const std::filesystem::path& path);
void write_features_csv(const std::filesystem::path& path, const FeatureMatrix& features);
void write_features_binary(const std::filesystem::path& path, const FeatureMatrix& features);

WeakLabelMatrix read_weak_labels(const std::filesystem::path& path);
void write_weak_labels(const std::filesystem::path& path, const WeakLabelMatrix& weak_labels);

std::vector<int> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, std::span<const int> labels);

struct BundlePaths {
    std::filesystem::path train;
    std::filesystem::path weak_labels;
    std::filesystem::path valid_features;
    std::filesystem::path valid_labels;
    std::optional<std::filesystem::path> valid_weak_labels;
    std::optional<std::filesystem::path> test_features;
    std::optional<std::filesystem::path> test_labels;
};

/// Proxy settings a manifest may carry; flags override them.
struct ManifestConfig {
    std::optional<std::size_t> k;
    std::optional<Metric> metric;
    std::optional<Weighting> weighting;
};

struct Manifest {
    BundlePaths paths;
    int num_classes = 2;
    ManifestConfig config;
};

Manifest read_manifest(const std::filesystem::path& path);

SplitBundle load_bundle(const BundlePaths& paths, const TaskSpec& spec);
SplitBundle load_bundle(const Manifest& manifest);

/// Writes every component as CSV plus `manifest.json` into `dir`; proxy settings that are
/// set in `config` go into the manifest too.
std::filesystem::path save_bundle(const SplitBundle& bundle, const std::filesystem::path& dir,
                                  const ManifestConfig& config = {});

/// FNV-1a 64-bit digest over the bytes of every file the manifest references, in manifest order.
std::string fingerprint(const Manifest& manifest);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

}  // namespace weshap
