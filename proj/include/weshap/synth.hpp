#pragma once

#include <cstdint>
#include <string_view>

#include "weshap/types.hpp"

namespace weshap {

enum class SynthKind { kRunningExample, kMotivating, kBlobs };

SynthKind parse_synth_kind(std::string_view name);

/// The eight-point two-class example: six training rows, three LFs, and two validation
/// points whose three nearest neighbors are x1..x3 and x4..x6.
SplitBundle running_example();

struct MotivatingParams {
    std::size_t n_train = 1000;
    std::size_t n_valid = 400;
    std::size_t n_test = 1000;
    double flip_rate = 0.05;  // output noise of LF1 and LF3
};

/// One-dimensional two-class data with three threshold LFs. LF1 labels the far left as 0
/// and LF3 the far right as 1. LF2 votes 1 on a band straddling the class boundary, so it is
/// barely better than chance, yet without it the uncovered region right of the boundary
/// is assigned to class 0.
SplitBundle motivating_example(const MotivatingParams& params, std::uint64_t seed);

struct BlobParams {
    int num_classes = 2;
    std::size_t n_train = 400;
    std::size_t n_valid = 100;
    std::size_t n_test = 200;
    std::size_t dims = 2;
    double separation = 4.0;  // cluster centers uniform in [-separation, separation]^d
    double spread = 1.0;      // per-axis standard deviation
    std::size_t clean_lfs = 4;
    std::size_t flipped_lfs = 0;
    double coverage = 0.3;  // firing rate of an LF on its target class
    double accuracy = 0.8;  // expected accuracy of clean LFs
};

/// Gaussian clusters, one per class. LF j targets class j mod C. A clean LF fires on its
/// class with rate `coverage` and on other classes often enough to land at `accuracy`; a
/// flipped LF fires on its class with the same rate but outputs a wrong class.
SplitBundle blobs(const BlobParams& params, std::uint64_t seed);

}  // namespace weshap
