#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "weshap/engine.hpp"
#include "weshap/evaluation.hpp"
#include "weshap/lf_summary.hpp"
#include "weshap/types.hpp"

namespace weshap {

using Json = nlohmann::ordered_json;

struct ReportOptions {
    std::uint64_t seed = 0;  // RND baseline
    bool rank_curves = true;
    bool revisions = true;
};

/// Everything `compute` knows about a bundle. Serializes without timings so the bytes only
/// depend on the inputs, flags and seed.
struct ValuationReport {
    std::string tool_version;
    std::string fingerprint;
    ProxyConfig config;
    int num_classes = 2;
    std::size_t num_train = 0;
    std::size_t num_valid = 0;
    std::optional<std::size_t> num_test;
    std::vector<std::string> lf_names;
    LFSummary summary;
    WeShapResult weshap;
    std::vector<MetricScores> scores;  // WESHAP first, then the baselines the bundle supports
    std::vector<RankCurve> curves;     // parallel to scores; empty without a test set
    double valid_accuracy = 0.0;       // downstream pipeline with every LF
    std::optional<double> test_accuracy;
    std::vector<RevisionOutcome> revisions;
};

ValuationReport build_report(const SplitBundle& bundle, const ProxyConfig& config, std::string fingerprint,
                             const ReportOptions& options = {});
/// Same, reusing an existing WeShap result.
ValuationReport build_report(const SplitBundle& bundle, WeShapResult result, std::string fingerprint,
                             const ReportOptions& options = {});

Json to_json(const ProxyConfig& config);
Json to_json(const WeShapResult& result);
Json to_json(const RankCurve& curve);
Json to_json(const RevisionOutcome& outcome);
Json to_json(const Explanation& explanation, const std::vector<std::string>& lf_names);
Json to_json(const WhatIfOutcome& outcome);
Json to_json(const ValuationReport& report);
/// LF table rows: summary statistics, WeShap value and every baseline, nulls where undefined.
Json lf_table_json(const ValuationReport& report);
Json curves_json(const ValuationReport& report);

/// Finite doubles as numbers, NaN and infinities as null.
Json number_or_null(double value);
Json number_or_null(std::optional<double> value);

/// Two-space indented JSON with a trailing newline.
std::string dump(const Json& json);

}  // namespace weshap
