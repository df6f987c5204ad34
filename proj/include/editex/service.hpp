#pragma once

// HTTP prediction service: POST /api/v1/predict and GET /api/v1/health.
// Request handling is transport independent so tests can call it directly.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

#include "editex/json_io.hpp"
#include "editex/pipeline.hpp"

namespace httplib {
class Server;
}

namespace editex {

/// Human-readable explanation per reason wire name, e.g. "gratitude_add_remove".
class MessageCatalog {
public:
    static MessageCatalog defaults();
    /// Defaults overlaid with the entries of a JSON object file.
    static MessageCatalog from_file(const std::filesystem::path& path);

    std::string message_for(const RejectionReason& reason) const;
    void set(std::string key, std::string message) { messages_[std::move(key)] = std::move(message); }

private:
    std::map<std::string, std::string> messages_;
};

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::optional<std::filesystem::path> model_path;
    bool enable_link_checks = false;
    double link_budget_seconds = 2.0;
    std::string cors_origin = "*";
    std::optional<std::filesystem::path> messages_path;
    std::size_t max_field_bytes = 256 * 1024;
};

using EnvLookup = std::function<std::optional<std::string>(const char*)>;
EnvLookup process_env();

/// Config file (JSON object) first, then EDITEX_* environment overrides.
/// Command-line flags are applied by the caller on top of the result.
ServiceConfig load_service_config(const std::optional<std::filesystem::path>& config_file,
                                  const EnvLookup& env = process_env());

struct ServiceResponse {
    int status = 200;
    Json body;
};

class PredictionService {
public:
    explicit PredictionService(ServiceConfig config, MessageCatalog catalog = MessageCatalog::defaults());
    ~PredictionService();

    PredictionService(const PredictionService&) = delete;
    PredictionService& operator=(const PredictionService&) = delete;

    /// In-flight requests keep the bundle they started with.
    void set_model(std::shared_ptr<const ModelBundle> bundle);
    void reload_model();  // from config().model_path
    std::shared_ptr<const ModelBundle> model() const;

    const ServiceConfig& config() const noexcept { return config_; }
    LinkCheckPolicy link_policy() const;

    ServiceResponse handle_predict(std::string_view body) const;
    ServiceResponse handle_health() const;

    /// Binds and serves on a background thread; returns the bound port.
    /// Port 0 picks an ephemeral port.
    int start();
    void stop();
    /// Blocks until stop() is called from elsewhere.
    void wait();

private:
    ServiceConfig config_;
    MessageCatalog catalog_;
    mutable std::mutex model_mutex_;
    std::shared_ptr<const ModelBundle> model_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
};

}  // namespace editex
