#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "weshap/engine.hpp"
#include "weshap/evaluation.hpp"
#include "weshap/io.hpp"
#include "weshap/oracle.hpp"
#include "weshap/report.hpp"
#include "weshap/shapley_tables.hpp"
#include "weshap/synth.hpp"

namespace py = pybind11;
using namespace weshap;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IntArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

FeatureMatrix to_features(const DoubleArray& a, const char* what) {
    if (a.ndim() != 2) throw DataError(std::string(what) + " must be a 2-D array");
    auto rows = static_cast<std::size_t>(a.shape(0));
    auto dims = static_cast<std::size_t>(a.shape(1));
    return FeatureMatrix(rows, dims, std::vector<double>(a.data(), a.data() + a.size()));
}

WeakLabelMatrix to_weak_labels(const IntArray& a, std::vector<std::string> names, const char* what) {
    if (a.ndim() != 2) throw DataError(std::string(what) + " must be a 2-D array");
    return WeakLabelMatrix(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                           std::vector<int>(a.data(), a.data() + a.size()), std::move(names));
}

std::vector<int> to_labels(const IntArray& a, const char* what) {
    if (a.ndim() != 1) throw DataError(std::string(what) + " must be a 1-D array");
    return std::vector<int>(a.data(), a.data() + a.size());
}

py::array_t<double> as_array(const FeatureMatrix& f) {
    py::array_t<double> out({f.rows(), f.dims()});
    std::copy(f.values().begin(), f.values().end(), out.mutable_data());
    return out;
}

py::array_t<int> as_array(const WeakLabelMatrix& wl) {
    py::array_t<int> out({wl.rows(), wl.num_lfs()});
    std::copy(wl.entries().begin(), wl.entries().end(), out.mutable_data());
    return out;
}

SplitBundle from_arrays(const DoubleArray& train, const IntArray& weak_labels, const DoubleArray& valid_features,
                        const IntArray& valid_labels, int num_classes, std::optional<IntArray> valid_weak_labels,
                        std::optional<DoubleArray> test_features, std::optional<IntArray> test_labels,
                        std::vector<std::string> lf_names) {
    SplitBundle b;
    b.spec.num_classes = num_classes;
    b.train_features = to_features(train, "train");
    b.weak_labels = to_weak_labels(weak_labels, lf_names, "weak_labels");
    b.valid = {to_features(valid_features, "valid_features"), to_labels(valid_labels, "valid_labels")};
    if (valid_weak_labels) b.valid_weak_labels = to_weak_labels(*valid_weak_labels, lf_names, "valid_weak_labels");
    if (test_features.has_value() != test_labels.has_value()) {
        throw DataError("test_features and test_labels must be given together");
    }
    if (test_features) b.test = LabeledSet{to_features(*test_features, "test_features"), to_labels(*test_labels, "test_labels")};
    b.validate();
    return b;
}

ProxyConfig make_config(std::size_t k, const std::string& metric, const std::string& weights) {
    return {k, parse_metric(metric), parse_weighting(weights)};
}

py::dict outcome_dict(const RevisionOutcome& o) {
    py::dict d;
    d["mode"] = std::string(to_string(o.mode));
    d["chosen_parameter"] = o.chosen_parameter;
    d["valid_accuracy_before"] = o.valid_accuracy_before;
    d["valid_accuracy_after"] = o.valid_accuracy_after;
    d["test_accuracy_before"] = o.test_accuracy_before;
    d["test_accuracy_after"] = o.test_accuracy_after;
    d["revised_weak_labels"] = as_array(o.revised_weak_labels);
    d["kept_lfs"] = o.kept_lfs;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Shapley-value scoring of labeling functions under a majority-vote + KNN proxy.";
    m.attr("__version__") = WESHAP_VERSION;

    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<ProxyConfig>(m, "ProxyConfig")
        .def(py::init(&make_config), py::arg("k") = 10, py::arg("metric") = "euclidean",
             py::arg("weights") = "uniform")
        .def_readwrite("k", &ProxyConfig::k)
        .def_property_readonly("metric", [](const ProxyConfig& c) { return std::string(to_string(c.metric)); })
        .def_property_readonly("weights", [](const ProxyConfig& c) { return std::string(to_string(c.weighting)); })
        .def("__eq__", [](const ProxyConfig& a, const ProxyConfig& b) { return a == b; })
        .def("__repr__", [](const ProxyConfig& c) {
            return "ProxyConfig(k=" + std::to_string(c.k) + ", metric='" + std::string(to_string(c.metric)) +
                   "', weights='" + std::string(to_string(c.weighting)) + "')";
        });

    py::class_<SplitBundle>(m, "Bundle")
        .def_static("from_arrays", &from_arrays, py::arg("train"), py::arg("weak_labels"),
                    py::arg("valid_features"), py::arg("valid_labels"), py::arg("num_classes"),
                    py::arg("valid_weak_labels") = py::none(), py::arg("test_features") = py::none(),
                    py::arg("test_labels") = py::none(), py::arg("lf_names") = std::vector<std::string>{})
        .def_property_readonly("num_train", &SplitBundle::num_train)
        .def_property_readonly("num_lfs", &SplitBundle::num_lfs)
        .def_property_readonly("num_classes", &SplitBundle::num_classes)
        .def_property_readonly("num_valid", [](const SplitBundle& b) { return b.valid.size(); })
        .def_property_readonly("has_test", [](const SplitBundle& b) { return b.test.has_value(); })
        .def_property_readonly("lf_names", [](const SplitBundle& b) { return b.weak_labels.names(); })
        .def_property_readonly("train_features", [](const SplitBundle& b) { return as_array(b.train_features); })
        .def_property_readonly("weak_labels", [](const SplitBundle& b) { return as_array(b.weak_labels); })
        .def_property_readonly("valid_labels", [](const SplitBundle& b) { return b.valid.labels; })
        .def("save", [](const SplitBundle& b, const std::filesystem::path& dir) { return save_bundle(b, dir); },
             py::arg("dir"))
        .def("__eq__", [](const SplitBundle& a, const SplitBundle& b) { return a == b; });

    m.def("load_bundle", [](const std::filesystem::path& manifest) { return load_bundle(read_manifest(manifest)); },
          py::arg("manifest"));
    m.def("fingerprint", [](const std::filesystem::path& manifest) { return fingerprint(read_manifest(manifest)); },
          py::arg("manifest"));
    m.def("running_example", &running_example);
    m.def(
        "motivating_example",
        [](std::uint64_t seed, std::size_t n_train, std::size_t n_valid, std::size_t n_test, double flip_rate) {
            return motivating_example({n_train, n_valid, n_test, flip_rate}, seed);
        },
        py::arg("seed") = 0, py::arg("n_train") = 1000, py::arg("n_valid") = 400, py::arg("n_test") = 1000,
        py::arg("flip_rate") = 0.05);
    m.def(
        "blobs",
        [](std::uint64_t seed, int num_classes, std::size_t clean_lfs, std::size_t flipped_lfs, double coverage,
           double accuracy, double separation, double spread, std::size_t dims) {
            BlobParams p;
            p.num_classes = num_classes;
            p.clean_lfs = clean_lfs;
            p.flipped_lfs = flipped_lfs;
            p.coverage = coverage;
            p.accuracy = accuracy;
            p.separation = separation;
            p.spread = spread;
            p.dims = dims;
            return blobs(p, seed);
        },
        py::arg("seed") = 0, py::arg("num_classes") = 2, py::arg("clean_lfs") = 4, py::arg("flipped_lfs") = 0,
        py::arg("coverage") = 0.3, py::arg("accuracy") = 0.8, py::arg("separation") = 4.0, py::arg("spread") = 1.0,
        py::arg("dims") = 2);

    m.def(
        "sv_tables",
        [](std::size_t max_size, int num_classes) {
            auto t = build_tables(max_size, num_classes);
            const std::size_t side = max_size + 1;
            py::array_t<double> plus({side, side}), minus({side, side});
            auto p = plus.mutable_unchecked<2>();
            auto q = minus.mutable_unchecked<2>();
            for (std::size_t a = 0; a < side; ++a) {
                for (std::size_t b = 0; b < side; ++b) {
                    bool defined = a + b <= max_size;
                    p(a, b) = defined ? t.sv_plus(a, b) : NAN;
                    q(a, b) = defined && b > 0 ? t.sv_minus(a, b) : NAN;
                }
            }
            return py::make_tuple(plus, minus);
        },
        py::arg("max_size"), py::arg("num_classes"),
        "(SV+, SV-) as square arrays indexed [p, w]; cells outside p + w <= max_size are NaN.");

    py::class_<WeShapResult>(m, "WeShapResult")
        .def_property_readonly("values", [](const WeShapResult& r) { return r.values; })
        .def_readonly("config", &WeShapResult::config)
        .def_readonly("holdout_size", &WeShapResult::holdout_size)
        .def_readonly("soft_accuracy_full", &WeShapResult::soft_accuracy_full)
        .def_readonly("table_size", &WeShapResult::table_size)
        .def(
            "contributions",
            [](const WeShapResult& r) {
                const auto& e = r.contributions.entries();
                py::array_t<std::int64_t> rows(static_cast<py::ssize_t>(e.size()));
                py::array_t<std::int64_t> lfs(static_cast<py::ssize_t>(e.size()));
                py::array_t<double> weights(static_cast<py::ssize_t>(e.size()));
                for (std::size_t t = 0; t < e.size(); ++t) {
                    rows.mutable_at(t) = static_cast<std::int64_t>(e[t].row);
                    lfs.mutable_at(t) = static_cast<std::int64_t>(e[t].lf);
                    weights.mutable_at(t) = e[t].weight;
                }
                return py::make_tuple(rows, lfs, weights);
            },
            "Sparse contribution scores as (rows, lfs, weights), row-major.")
        .def("to_json", [](const WeShapResult& r) { return dump(to_json(r)); });

    m.def("compute", py::overload_cast<const SplitBundle&, const ProxyConfig&>(&weshap_dataset), py::arg("bundle"),
          py::arg("config") = ProxyConfig{}, py::call_guard<py::gil_scoped_release>());
    m.def(
        "exact_shapley",
        [](const SplitBundle& b, const ProxyConfig& c) { return exact_shapley_subsets(make_proxy_game(b, c)); },
        py::arg("bundle"), py::arg("config") = ProxyConfig{}, py::call_guard<py::gil_scoped_release>(),
        "Brute-force Shapley values of the proxy game (at most 12 LFs).");

    m.def(
        "scores",
        [](const std::string& method, const SplitBundle& b, std::uint64_t seed) {
            return baseline_scores(parse_score_method(method), b, seed).scores;
        },
        py::arg("method"), py::arg("bundle"), py::arg("seed") = 0, "RND, ACC, COV or IWS scores per LF.");
    m.def(
        "rank_curve",
        [](const std::vector<double>& scores, const SplitBundle& b, const ProxyConfig& c) {
            auto curve = rank_curve({ScoreMethod::kWeShap, scores, std::nullopt}, b, c);
            py::dict d;
            d["prefix_sizes"] = curve.prefix_sizes;
            d["accuracies"] = curve.accuracies;
            d["area"] = curve.area;
            return d;
        },
        py::arg("scores"), py::arg("bundle"), py::arg("config") = ProxyConfig{});
    m.def(
        "fine_revision",
        [](const WeShapResult& r, const SplitBundle& b, const ProxyConfig& c) {
            return outcome_dict(fine_revision(r, b, c));
        },
        py::arg("result"), py::arg("bundle"), py::arg("config") = ProxyConfig{});
    m.def(
        "prune",
        [](const std::vector<double>& scores, const SplitBundle& b, const ProxyConfig& c) {
            return outcome_dict(prune_search({ScoreMethod::kWeShap, scores, std::nullopt}, b, c));
        },
        py::arg("scores"), py::arg("bundle"), py::arg("config") = ProxyConfig{});
    m.def(
        "report_json",
        [](const SplitBundle& b, const ProxyConfig& c, const std::string& fp, std::uint64_t seed) {
            return dump(to_json(build_report(b, c, fp, ReportOptions{seed, true, true})));
        },
        py::arg("bundle"), py::arg("config") = ProxyConfig{}, py::arg("fingerprint") = "", py::arg("seed") = 0,
        py::call_guard<py::gil_scoped_release>());
}
