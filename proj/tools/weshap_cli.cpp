#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "weshap/engine.hpp"
#include "weshap/evaluation.hpp"
#include "weshap/io.hpp"
#include "weshap/oracle.hpp"
#include "weshap/report.hpp"
#include "weshap/server.hpp"
#include "weshap/synth.hpp"

namespace fs = std::filesystem;
using namespace weshap;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitOracle = 4;
constexpr double kOracleTolerance = 1e-6;

// Options shared by every subcommand that reads a bundle. Unset proxy flags fall back to the
// manifest, then to the defaults.
struct BundleOptions {
    std::string manifest;
    std::optional<std::size_t> k;
    std::optional<std::string> metric;
    std::optional<std::string> weights;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--manifest", manifest, "Bundle manifest JSON")->required()->check(CLI::ExistingFile);
        cmd->add_option("--k", k, "Number of neighbors K (default 10)");
        cmd->add_option("--metric", metric, "euclidean | manhattan | cosine (default euclidean)");
        cmd->add_option("--weights", weights, "uniform | inverse-distance (default uniform)");
    }
};

struct Loaded {
    Manifest manifest;
    SplitBundle bundle;
    ProxyConfig config;
    std::string fingerprint;
};

Loaded load(const BundleOptions& opts) {
    Loaded out;
    out.manifest = read_manifest(opts.manifest);
    out.bundle = load_bundle(out.manifest);
    out.fingerprint = fingerprint(out.manifest);
    const auto& mc = out.manifest.config;
    if (mc.k) out.config.k = *mc.k;
    if (mc.metric) out.config.metric = *mc.metric;
    if (mc.weighting) out.config.weighting = *mc.weighting;
    if (opts.k) out.config.k = *opts.k;
    if (opts.metric) out.config.metric = parse_metric(*opts.metric);
    if (opts.weights) out.config.weighting = parse_weighting(*opts.weights);
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path + ": cannot open for writing");
    out << text;
}

void dump_tables(const std::string& path, std::size_t max_size, int num_classes) {
    auto tables = build_tables(std::max<std::size_t>(max_size, 1), num_classes);
    std::string csv = "p,w,sv_plus,sv_minus\n";
    for (std::size_t p = 0; p <= tables.max_size(); ++p) {
        for (std::size_t w = 0; p + w <= tables.max_size(); ++w) {
            if (p + w == 0) continue;
            csv += std::to_string(p) + ',' + std::to_string(w) + ',' + format_double(tables.sv_plus(p, w)) + ',' +
                   (w > 0 ? format_double(tables.sv_minus(p, w)) : std::string()) + '\n';
        }
    }
    write_text(path, csv);
}

std::string curve_csv(const std::vector<std::pair<std::string, RankCurve>>& curves) {
    std::string csv = "metric,prefix_size,accuracy\n";
    for (const auto& [name, curve] : curves) {
        for (std::size_t t = 0; t < curve.prefix_sizes.size(); ++t) {
            csv += name + ',' + std::to_string(curve.prefix_sizes[t]) + ',' + format_double(curve.accuracies[t]) + '\n';
        }
        csv += name + ",area," + format_double(curve.area) + '\n';
    }
    return csv;
}

MetricScores scores_for(ScoreMethod method, const Loaded& in, std::uint64_t seed) {
    if (method == ScoreMethod::kWeShap) return weshap_scores(weshap_dataset(in.bundle, in.config));
    return baseline_scores(method, in.bundle, seed);
}

void emit_revision(const RevisionOutcome& outcome, const Loaded& in, const std::string& out,
                   const std::string& weak_labels_out) {
    Json doc = to_json(outcome);
    doc["fingerprint"] = in.fingerprint;
    doc["config"] = to_json(in.config);
    write_text(out, dump(doc));
    if (!weak_labels_out.empty()) {
        WeakLabelMatrix named(outcome.revised_weak_labels.rows(), outcome.revised_weak_labels.num_lfs(),
                              outcome.revised_weak_labels.entries(), in.bundle.weak_labels.names());
        write_weak_labels(weak_labels_out, named);
    }
}

HttpServer* g_server = nullptr;

void handle_signal(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shapley valuation of labeling functions under a majority-vote + KNN proxy"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(WESHAP_VERSION));

    // compute
    BundleOptions compute_opts;
    std::string compute_out, compute_result_out, compute_tables;
    std::uint64_t compute_seed = 0;
    bool compute_no_curves = false, compute_no_revisions = false;
    auto* compute = app.add_subcommand("compute", "WeShap values, baselines, rank curves and revisions as JSON");
    compute_opts.add_to(compute);
    compute->add_option("--out", compute_out, "Report path (default stdout)");
    compute->add_option("--result-out", compute_result_out, "Also write values and contribution scores here");
    compute->add_option("--dump-tables", compute_tables, "Write the SV+/SV- tables as CSV");
    compute->add_option("--seed", compute_seed, "Seed of the RND baseline");
    compute->add_flag("--no-curves", compute_no_curves, "Skip rank curves");
    compute->add_flag("--no-revisions", compute_no_revisions, "Skip pruning and fine-grained revision");

    // rank
    BundleOptions rank_opts;
    std::vector<std::string> rank_methods{"WESHAP", "RND", "ACC", "COV", "IWS"};
    std::string rank_out, rank_format = "csv";
    std::uint64_t rank_seed = 0;
    auto* rank = app.add_subcommand("rank", "Rank curves of the downstream pipeline per scoring method");
    rank_opts.add_to(rank);
    rank->add_option("--scores", rank_methods, "Scoring methods")->delimiter(',');
    rank->add_option("--format", rank_format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    rank->add_option("--out", rank_out, "Output path (default stdout)");
    rank->add_option("--seed", rank_seed, "Seed of the RND baseline");

    // prune
    BundleOptions prune_opts;
    std::string prune_method = "WESHAP", prune_out, prune_wl_out;
    std::uint64_t prune_seed = 0;
    auto* prune = app.add_subcommand("prune", "Keep the top-p LFs under a scoring method, p tuned on validation");
    prune_opts.add_to(prune);
    prune->add_option("--scores", prune_method, "Scoring method used for ranking");
    prune->add_option("--seed", prune_seed, "Seed of the RND baseline");
    prune->add_option("--out", prune_out, "Outcome JSON (default stdout)");
    prune->add_option("--weak-labels-out", prune_wl_out, "Revised weak-label CSV");

    // revise
    BundleOptions revise_opts;
    std::string revise_mode = "fine", revise_out, revise_wl_out;
    auto* revise = app.add_subcommand("revise", "Mute weak labels (fine) or LFs (prune) tuned on validation");
    revise_opts.add_to(revise);
    revise->add_option("--mode", revise_mode, "fine | prune")->check(CLI::IsMember({"fine", "prune"}));
    revise->add_option("--out", revise_out, "Outcome JSON (default stdout)");
    revise->add_option("--weak-labels-out", revise_wl_out, "Revised weak-label CSV");

    // explain
    BundleOptions explain_opts;
    std::size_t explain_idx = 0, explain_top_k = 10;
    std::string explain_out;
    auto* explain_cmd = app.add_subcommand("explain", "Per-LF and per-row attribution for one validation point");
    explain_opts.add_to(explain_cmd);
    explain_cmd->add_option("--val-idx", explain_idx, "Validation row")->required();
    explain_cmd->add_option("--top-k", explain_top_k, "Length of each ranked list")->check(CLI::PositiveNumber);
    explain_cmd->add_option("--out", explain_out, "Output path (default stdout)");

    // oracle-check
    BundleOptions oracle_opts;
    auto* oracle = app.add_subcommand("oracle-check", "Compare WeShap with brute-force Shapley values (m <= 12)");
    oracle_opts.add_to(oracle);

    // synth
    std::string synth_kind, synth_out;
    std::uint64_t synth_seed = 0;
    BlobParams blob;
    MotivatingParams motivating;
    std::optional<std::size_t> synth_n_train, synth_n_valid, synth_n_test;
    auto* synth = app.add_subcommand("synth", "Write a synthetic bundle with manifest");
    synth->add_option("--kind", synth_kind, "running-example | motivating | blobs")
        ->required()
        ->check(CLI::IsMember({"running-example", "motivating", "blobs"}));
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--seed", synth_seed, "Generator seed");
    synth->add_option("--n-train", synth_n_train, "Training rows");
    synth->add_option("--n-valid", synth_n_valid, "Validation rows");
    synth->add_option("--n-test", synth_n_test, "Test rows");
    synth->add_option("--classes", blob.num_classes, "blobs: class count");
    synth->add_option("--dims", blob.dims, "blobs: feature dimension");
    synth->add_option("--separation", blob.separation, "blobs: center range");
    synth->add_option("--spread", blob.spread, "blobs: cluster standard deviation");
    synth->add_option("--clean-lfs", blob.clean_lfs, "blobs: clean LF count");
    synth->add_option("--flipped-lfs", blob.flipped_lfs, "blobs: label-flipping LF count");
    synth->add_option("--coverage", blob.coverage, "blobs: LF firing rate on its class");
    synth->add_option("--accuracy", blob.accuracy, "blobs: clean LF accuracy");
    synth->add_option("--flip-rate", motivating.flip_rate, "motivating: output noise of LF1 and LF3");

    // bench
    BenchSize bench_size{30000, 32, 100, 1000, 10, 2, 0.2};
    bool bench_scaling = false;
    std::string bench_out;
    std::uint64_t bench_seed = 0;
    auto* bench = app.add_subcommand("bench", "Time weshap_dataset on random data");
    bench->add_option("--n", bench_size.n, "Training rows");
    bench->add_option("--d", bench_size.d, "Feature dimension");
    bench->add_option("--m", bench_size.m, "LF count");
    bench->add_option("--n-val", bench_size.n_val, "Validation rows");
    bench->add_option("--k", bench_size.k, "Neighbors");
    bench->add_option("--coverage", bench_size.coverage, "Activation probability per weak label");
    bench->add_flag("--scaling", bench_scaling, "Add rows with doubled m and doubled n_val");
    bench->add_option("--seed", bench_seed, "Data seed");
    bench->add_option("--out", bench_out, "CSV path (default stdout)");

    // serve
    BundleOptions serve_opts;
    std::string serve_host = "127.0.0.1";
    int serve_port = 8080;
    std::uint64_t serve_seed = 0;
    std::string serve_static;
    auto* serve = app.add_subcommand("serve", "HTTP JSON API under /api/v1 for the triage dashboard");
    serve_opts.add_to(serve);
    serve->add_option("--host", serve_host, "Bind address");
    serve->add_option("--port", serve_port, "Port (0 picks a free one)");
    serve->add_option("--seed", serve_seed, "Seed of the RND baseline");
    serve->add_option("--static", serve_static, "Directory of dashboard assets served at /")
        ->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*compute) {
            auto in = load(compute_opts);
            ReportOptions options{compute_seed, !compute_no_curves, !compute_no_revisions};
            auto report = build_report(in.bundle, in.config, in.fingerprint, options);
            if (!compute_tables.empty()) dump_tables(compute_tables, report.weshap.table_size, in.bundle.num_classes());
            if (!compute_result_out.empty()) write_text(compute_result_out, dump(to_json(report.weshap)));
            write_text(compute_out, dump(to_json(report)));
        } else if (*rank) {
            auto in = load(rank_opts);
            std::vector<std::pair<std::string, RankCurve>> curves;
            for (const auto& name : rank_methods) {
                auto method = parse_score_method(name);
                auto scores = scores_for(method, in, rank_seed);
                curves.emplace_back(std::string(to_string(method)), rank_curve(scores, in.bundle, in.config));
            }
            if (rank_format == "csv") {
                write_text(rank_out, curve_csv(curves));
            } else {
                Json doc{{"fingerprint", in.fingerprint}, {"config", to_json(in.config)}};
                Json c = Json::object();
                for (const auto& [name, curve] : curves) c[name] = to_json(curve);
                doc["curves"] = std::move(c);
                write_text(rank_out, dump(doc));
            }
        } else if (*prune) {
            auto in = load(prune_opts);
            auto scores = scores_for(parse_score_method(prune_method), in, prune_seed);
            emit_revision(prune_search(scores, in.bundle, in.config), in, prune_out, prune_wl_out);
        } else if (*revise) {
            auto in = load(revise_opts);
            auto result = weshap_dataset(in.bundle, in.config);
            auto outcome = revise_mode == "fine" ? fine_revision(result, in.bundle, in.config)
                                                 : prune_search(weshap_scores(result), in.bundle, in.config);
            emit_revision(outcome, in, revise_out, revise_wl_out);
        } else if (*explain_cmd) {
            auto in = load(explain_opts);
            auto result = weshap_dataset(in.bundle, in.config);
            auto ex = explain(explain_idx, result, in.bundle, in.config, explain_top_k);
            Json doc = to_json(ex, in.bundle.weak_labels.names());
            doc["fingerprint"] = in.fingerprint;
            write_text(explain_out, dump(doc));
        } else if (*oracle) {
            auto in = load(oracle_opts);
            const std::size_t m = in.bundle.num_lfs();
            if (m > kSubsetOracleMaxPlayers) {
                throw ConfigError("oracle-check supports at most " + std::to_string(kSubsetOracleMaxPlayers) +
                                  " LFs, bundle has " + std::to_string(m));
            }
            auto engine = weshap_dataset(in.bundle, in.config).values;
            auto exact = exact_shapley_subsets(make_proxy_game(in.bundle, in.config));
            double worst = 0.0;
            std::size_t worst_lf = 0;
            for (std::size_t j = 0; j < m; ++j) {
                double dev = std::abs(engine[j] - exact[j]);
                if (dev > worst) {
                    worst = dev;
                    worst_lf = j;
                }
            }
            std::printf("lf,weshap,oracle,abs_deviation\n");
            for (std::size_t j = 0; j < m; ++j) {
                std::printf("%s,%.17g,%.17g,%.3g\n", in.bundle.weak_labels.names()[j].c_str(), engine[j], exact[j],
                            std::abs(engine[j] - exact[j]));
            }
            std::printf("max deviation %.3g (lf %zu, %zu coalitions)\n", worst, worst_lf, std::size_t{1} << m);
            if (!(worst <= kOracleTolerance)) {
                std::fprintf(stderr, "oracle-check failed: deviation exceeds %g\n", kOracleTolerance);
                return kExitOracle;
            }
        } else if (*synth) {
            auto kind = parse_synth_kind(synth_kind);
            SplitBundle bundle;
            ManifestConfig manifest_config;
            if (kind == SynthKind::kRunningExample) {
                bundle = running_example();
                manifest_config.k = 3;
            } else if (kind == SynthKind::kMotivating) {
                if (synth_n_train) motivating.n_train = *synth_n_train;
                if (synth_n_valid) motivating.n_valid = *synth_n_valid;
                if (synth_n_test) motivating.n_test = *synth_n_test;
                bundle = motivating_example(motivating, synth_seed);
            } else {
                if (synth_n_train) blob.n_train = *synth_n_train;
                if (synth_n_valid) blob.n_valid = *synth_n_valid;
                if (synth_n_test) blob.n_test = *synth_n_test;
                bundle = blobs(blob, synth_seed);
            }
            auto path = save_bundle(bundle, synth_out, manifest_config);
            std::cout << path.string() << '\n';
        } else if (*bench) {
            std::vector<BenchSize> sizes{bench_size};
            if (bench_scaling) {
                auto wide = bench_size;
                wide.m *= 2;
                auto tall = bench_size;
                tall.n_val *= 2;
                sizes.push_back(wide);
                sizes.push_back(tall);
            }
            write_text(bench_out, bench_csv(runtime_bench(sizes, ProxyConfig{}, bench_seed)));
        } else if (*serve) {
            auto in = load(serve_opts);
            auto report = build_report(in.bundle, in.config, in.fingerprint, ReportOptions{serve_seed, true, true});
            ReportService service(std::move(in.bundle), std::move(report));
            std::optional<fs::path> assets;
            if (!serve_static.empty()) assets = serve_static;
            HttpServer server(service, assets);
            int port = server.bind(serve_host, serve_port);
            std::cout << "serving http://" << serve_host << ':' << port << "/api/v1 (fingerprint "
                      << service.fingerprint() << ")" << std::endl;
            g_server = &server;
            std::signal(SIGINT, handle_signal);
            std::signal(SIGTERM, handle_signal);
            server.listen();
            g_server = nullptr;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
