#include "weshap/server.hpp"

#include <charconv>

#include <httplib.h>

#include "weshap/engine.hpp"

namespace weshap {
namespace {

std::optional<std::size_t> parse_index(const std::string& text) {
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

}  // namespace

ReportService::ReportService(SplitBundle bundle, ValuationReport report)
    : bundle_(std::move(bundle)), report_(std::move(report)) {}

ApiResponse ReportService::ok(Json body) const {
    Json out{{"fingerprint", report_.fingerprint}};
    for (auto& [key, value] : body.items()) out[key] = std::move(value);
    return {200, std::move(out)};
}

ApiResponse ReportService::error(int status, const std::string& message) const {
    return {status, Json{{"fingerprint", report_.fingerprint}, {"error", message}}};
}

ApiResponse ReportService::get_report() const { return ok(Json{{"report", to_json(report_)}}); }

ApiResponse ReportService::get_lfs() const { return ok(Json{{"lfs", lf_table_json(report_)}}); }

ApiResponse ReportService::get_explain(const std::optional<std::string>& val_idx,
                                       const std::optional<std::string>& top_k) const {
    if (!val_idx) return error(400, "missing query parameter val_idx");
    auto index = parse_index(*val_idx);
    if (!index) return error(400, "val_idx must be a non-negative integer");
    std::size_t k = report_.lf_names.size();
    if (top_k) {
        auto parsed = parse_index(*top_k);
        if (!parsed || *parsed == 0) return error(400, "top_k must be a positive integer");
        k = *parsed;
    }
    try {
        auto ex = explain(*index, report_.weshap, bundle_, report_.config, k);
        return ok(Json{{"explanation", to_json(ex, report_.lf_names)}});
    } catch (const ConfigError& e) {
        return error(400, e.what());
    }
}

ApiResponse ReportService::get_curve(const std::optional<std::string>& metric) const {
    if (!metric) return error(400, "missing query parameter metric");
    ScoreMethod method;
    try {
        method = parse_score_method(*metric);
    } catch (const ConfigError& e) {
        return error(400, e.what());
    }
    for (std::size_t t = 0; t < report_.curves.size(); ++t) {
        if (report_.scores[t].method == method) {
            return ok(Json{{"metric", std::string(to_string(method))}, {"curve", to_json(report_.curves[t])}});
        }
    }
    return error(404, "no rank curve for " + std::string(to_string(method)) + " in this report");
}

ApiResponse ReportService::post_whatif(const std::string& body) {
    std::vector<std::size_t> disabled;
    std::optional<double> theta;
    try {
        auto doc = body.empty() ? Json::object() : Json::parse(body);
        if (!doc.is_object()) return error(400, "request body must be a JSON object");
        if (doc.contains("disabled_lfs") && !doc["disabled_lfs"].is_null()) {
            disabled = doc["disabled_lfs"].get<std::vector<std::size_t>>();
        }
        if (doc.contains("theta") && !doc["theta"].is_null()) theta = doc["theta"].get<double>();
    } catch (const Json::exception& e) {
        return error(400, std::string("bad what-if request: ") + e.what());
    }
    std::lock_guard lock(whatif_mutex_);
    try {
        auto outcome = what_if(report_.weshap, bundle_, report_.config, disabled, theta);
        Json result = to_json(outcome);
        result["disabled_lfs"] = disabled;
        result["theta"] = theta ? number_or_null(*theta) : Json(nullptr);
        return ok(std::move(result));
    } catch (const ConfigError& e) {
        return error(400, e.what());
    }
}

struct HttpServer::Impl {
    ReportService& service;
    httplib::Server server;
    std::string host;
    int port = 0;

    explicit Impl(ReportService& s) : service(s) {}
};

namespace {

std::optional<std::string> param(const httplib::Request& req, const char* name) {
    if (!req.has_param(name)) return std::nullopt;
    return req.get_param_value(name);
}

void reply(httplib::Response& res, const ApiResponse& api, const std::string& fingerprint) {
    res.status = api.status;
    res.set_header("X-WeShap-Fingerprint", fingerprint);
    res.set_content(api.body.dump(), "application/json");
}

}  // namespace

HttpServer::HttpServer(ReportService& service, std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(service)) {
    auto& srv = impl_->server;
    auto& svc = impl_->service;
    const std::string fp = svc.fingerprint();
    srv.Get("/api/v1/report", [&svc, fp](const httplib::Request&, httplib::Response& res) {
        reply(res, svc.get_report(), fp);
    });
    srv.Get("/api/v1/lfs", [&svc, fp](const httplib::Request&, httplib::Response& res) {
        reply(res, svc.get_lfs(), fp);
    });
    srv.Get("/api/v1/explain", [&svc, fp](const httplib::Request& req, httplib::Response& res) {
        reply(res, svc.get_explain(param(req, "val_idx"), param(req, "top_k")), fp);
    });
    srv.Get("/api/v1/curve", [&svc, fp](const httplib::Request& req, httplib::Response& res) {
        reply(res, svc.get_curve(param(req, "metric")), fp);
    });
    srv.Post("/api/v1/whatif", [&svc, fp](const httplib::Request& req, httplib::Response& res) {
        reply(res, svc.post_whatif(req.body), fp);
    });
    if (static_dir) srv.set_mount_point("/", static_dir->string());
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    impl_->host = host;
    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port(host);
    } else {
        impl_->port = impl_->server.bind_to_port(host, port) ? port : -1;
    }
    if (impl_->port < 0) throw ConfigError("cannot bind " + host + ":" + std::to_string(port));
    return impl_->port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
}

}  // namespace weshap
