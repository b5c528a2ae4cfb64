#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "weshap/report.hpp"
#include "weshap/types.hpp"

namespace weshap {

struct ApiResponse {
    int status = 200;
    Json body;
};

/// The /api/v1 endpoints as plain functions over an immutable report. Every body carries
/// the bundle fingerprint. What-if requests run one at a time; reads never block.
class ReportService {
public:
    ReportService(SplitBundle bundle, ValuationReport report);

    const std::string& fingerprint() const { return report_.fingerprint; }
    const ValuationReport& report() const { return report_; }

    ApiResponse get_report() const;
    ApiResponse get_lfs() const;
    ApiResponse get_explain(const std::optional<std::string>& val_idx, const std::optional<std::string>& top_k) const;
    ApiResponse get_curve(const std::optional<std::string>& metric) const;
    /// Body: {"disabled_lfs": [j, ...], "theta": number | null}; both fields optional.
    ApiResponse post_whatif(const std::string& body);

private:
    ApiResponse ok(Json body) const;
    ApiResponse error(int status, const std::string& message) const;

    SplitBundle bundle_;
    ValuationReport report_;
    std::mutex whatif_mutex_;
};

/// HTTP front end for a ReportService, optionally serving static files at "/".
class HttpServer {
public:
    explicit HttpServer(ReportService& service, std::optional<std::filesystem::path> static_dir = std::nullopt);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds to host:port (port 0 picks a free one) and returns the bound port.
    int bind(const std::string& host, int port);
    /// Serves until stop() is called.
    void listen();
    /// Blocks until listen() is accepting connections (or has failed).
    void wait_until_ready() const;
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace weshap
