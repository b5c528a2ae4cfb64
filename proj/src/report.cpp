#include "weshap/report.hpp"

#include <cmath>

#include "weshap/io.hpp"
#include "weshap/proxy.hpp"

namespace weshap {

Json number_or_null(double value) {
    if (!std::isfinite(value)) return nullptr;
    return value;
}

Json number_or_null(std::optional<double> value) { return value ? number_or_null(*value) : Json(nullptr); }

std::string dump(const Json& json) { return json.dump(2) + "\n"; }

ValuationReport build_report(const SplitBundle& bundle, const ProxyConfig& config, std::string fingerprint,
                             const ReportOptions& options) {
    return build_report(bundle, weshap_dataset(bundle, config), std::move(fingerprint), options);
}

ValuationReport build_report(const SplitBundle& bundle, WeShapResult result, std::string fingerprint,
                             const ReportOptions& options) {
    ValuationReport r;
    r.tool_version = WESHAP_VERSION;
    r.fingerprint = std::move(fingerprint);
    r.config = result.config;
    r.num_classes = bundle.num_classes();
    r.num_train = bundle.num_train();
    r.num_valid = bundle.valid.size();
    if (bundle.test) r.num_test = bundle.test->size();
    r.lf_names = bundle.weak_labels.names();
    r.summary = bundle.valid_weak_labels
                    ? lf_summary(bundle.weak_labels, *bundle.valid_weak_labels, bundle.valid.labels)
                    : lf_summary(bundle.weak_labels);
    r.weshap = std::move(result);

    r.scores.push_back(weshap_scores(r.weshap));
    r.scores.push_back(baseline_scores(ScoreMethod::kRandom, bundle, options.seed));
    if (bundle.valid_weak_labels) r.scores.push_back(baseline_scores(ScoreMethod::kAccuracy, bundle));
    r.scores.push_back(baseline_scores(ScoreMethod::kCoverage, bundle));
    if (bundle.valid_weak_labels) r.scores.push_back(baseline_scores(ScoreMethod::kIws, bundle));

    NeighborIndex index(bundle.train_features, r.config.metric);
    auto all = Coalition::all(bundle.num_lfs());
    r.valid_accuracy = downstream_accuracy(index, bundle.weak_labels, all, r.num_classes, r.config, bundle.valid);
    if (bundle.test) {
        r.test_accuracy = downstream_accuracy(index, bundle.weak_labels, all, r.num_classes, r.config, *bundle.test);
        if (options.rank_curves) {
            for (const auto& s : r.scores) r.curves.push_back(rank_curve(s, bundle, r.config));
        }
    }
    if (options.revisions) {
        r.revisions.push_back(fine_revision(r.weshap, bundle, r.config));
        r.revisions.push_back(prune_search(r.scores.front(), bundle, r.config));
    }
    return r;
}

Json to_json(const ProxyConfig& config) {
    return Json{{"k", config.k},
                {"metric", std::string(to_string(config.metric))},
                {"weights", std::string(to_string(config.weighting))}};
}

Json to_json(const WeShapResult& result) {
    Json contributions = Json::array();
    for (const auto& e : result.contributions.entries()) {
        contributions.push_back(Json{{"i", e.row}, {"j", e.lf}, {"w", e.weight}});
    }
    return Json{{"config", to_json(result.config)},
                {"lf_values", result.values},
                {"contributions", std::move(contributions)},
                {"holdout_size", result.holdout_size},
                {"soft_accuracy_full", result.soft_accuracy_full}};
}

Json to_json(const RankCurve& curve) {
    return Json{{"prefix_sizes", curve.prefix_sizes}, {"accuracies", curve.accuracies}, {"area", curve.area}};
}

Json to_json(const RevisionOutcome& outcome) {
    std::size_t muted = 0;
    for (int v : outcome.revised_weak_labels.entries()) muted += v == kAbstain ? 1 : 0;
    Json j{{"mode", std::string(to_string(outcome.mode))}};
    if (outcome.mode == RevisionMode::kPrune) {
        j["chosen_parameter"] = static_cast<std::size_t>(outcome.chosen_parameter);
        j["kept_lfs"] = outcome.kept_lfs;
    } else {
        j["chosen_parameter"] = number_or_null(outcome.chosen_parameter);
    }
    j["valid_accuracy_before"] = outcome.valid_accuracy_before;
    j["valid_accuracy_after"] = outcome.valid_accuracy_after;
    j["test_accuracy_before"] = number_or_null(outcome.test_accuracy_before);
    j["test_accuracy_after"] = number_or_null(outcome.test_accuracy_after);
    j["abstains_after"] = muted;
    return j;
}

Json to_json(const Explanation& ex, const std::vector<std::string>& lf_names) {
    auto lf_list = [&](const std::vector<LfAttribution>& items) {
        Json out = Json::array();
        for (const auto& a : items) out.push_back(Json{{"lf", a.lf}, {"name", lf_names.at(a.lf)}, {"value", a.value}});
        return out;
    };
    Json rows = Json::array();
    for (const auto& r : ex.lowest_rows) {
        rows.push_back(Json{{"row", r.row}, {"distance", r.distance}, {"mass", r.mass}});
    }
    Json weak = Json::array();
    for (const auto& w : ex.lowest_weak_labels) {
        weak.push_back(Json{{"row", w.row}, {"lf", w.lf}, {"output", w.output}, {"weight", w.weight}});
    }
    return Json{{"val_idx", ex.val_index},
                {"label", ex.label},
                {"lf_values", ex.lf_values},
                {"most_negative", lf_list(ex.most_negative)},
                {"most_positive", lf_list(ex.most_positive)},
                {"lowest_rows", std::move(rows)},
                {"lowest_weak_labels", std::move(weak)}};
}

Json to_json(const WhatIfOutcome& outcome) {
    return Json{{"valid_acc", outcome.valid_accuracy},
                {"test_acc", number_or_null(outcome.test_accuracy)},
                {"lf_values", outcome.lf_values},
                {"muted_weak_labels", outcome.muted_weak_labels}};
}

Json lf_table_json(const ValuationReport& report) {
    Json rows = Json::array();
    for (std::size_t j = 0; j < report.lf_names.size(); ++j) {
        const auto& s = report.summary[j];
        Json baselines = Json::object();
        for (auto method : {ScoreMethod::kRandom, ScoreMethod::kAccuracy, ScoreMethod::kCoverage, ScoreMethod::kIws}) {
            Json value = nullptr;
            for (const auto& sc : report.scores) {
                if (sc.method == method) value = number_or_null(sc.scores[j]);
            }
            baselines[std::string(to_string(method))] = value;
        }
        rows.push_back(Json{{"index", j},
                            {"name", report.lf_names[j]},
                            {"accuracy", number_or_null(s.accuracy)},
                            {"coverage", s.coverage},
                            {"overlap", s.overlap},
                            {"conflict", s.conflict},
                            {"activation_count", s.activation_count},
                            {"weshap", report.weshap.values[j]},
                            {"baselines", std::move(baselines)}});
    }
    return rows;
}

Json curves_json(const ValuationReport& report) {
    Json out = Json::object();
    for (std::size_t t = 0; t < report.curves.size(); ++t) {
        Json c = to_json(report.curves[t]);
        if (report.scores[t].seed) c["seed"] = *report.scores[t].seed;
        out[std::string(to_string(report.scores[t].method))] = std::move(c);
    }
    return out;
}

Json to_json(const ValuationReport& report) {
    Json revisions = Json::object();
    for (const auto& r : report.revisions) revisions[std::string(to_string(r.mode))] = to_json(r);
    Json test_size = report.num_test ? Json(*report.num_test) : Json(nullptr);
    return Json{{"tool", "weshap"},
                {"tool_version", report.tool_version},
                {"fingerprint", report.fingerprint},
                {"task",
                 {{"num_classes", report.num_classes},
                  {"num_train", report.num_train},
                  {"num_valid", report.num_valid},
                  {"num_test", test_size},
                  {"num_lfs", report.lf_names.size()},
                  {"max_active_lfs", report.weshap.table_size}}},
                {"config", to_json(report.config)},
                {"base",
                 {{"valid_accuracy", report.valid_accuracy},
                  {"test_accuracy", number_or_null(report.test_accuracy)},
                  {"soft_accuracy_full", report.weshap.soft_accuracy_full}}},
                {"lfs", lf_table_json(report)},
                {"curves", curves_json(report)},
                {"revisions", std::move(revisions)}};
}

}  // namespace weshap
