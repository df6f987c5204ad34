#include "editex/service.hpp"

#include <cstdlib>
#include <fstream>

#include <httplib.h>

#include "editex/error.hpp"
#include "editex/text.hpp"

namespace editex {
namespace {

ServiceResponse error_response(int status, std::string code, std::string message,
                               std::optional<std::string> field = std::nullopt) {
    Json err;
    err["code"] = std::move(code);
    err["message"] = std::move(message);
    if (field) err["field"] = *field;
    return {status, Json{{"error", std::move(err)}}};
}

bool parse_bool(std::string_view s) {
    const std::string v = ascii_lower(s);
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off" || v.empty()) return false;
    throw Error(ErrorCode::InvalidArgument, "expected a boolean, got '" + std::string(s) + "'");
}

}  // namespace

// Messages --------------------------------------------------------------------

MessageCatalog MessageCatalog::defaults() {
    MessageCatalog c;
    c.messages_ = {
        {"undesired_text_add_remove", "A large share of the text was added or removed. Keep edits focused on the original content."},
        {"undesired_code_add_remove", "A large share of the code was added or removed. Avoid rewriting the author's code."},
        {"text_format", "The edit only changes text formatting. Make sure the change adds value beyond styling."},
        {"code_format", "The edit only changes code formatting. Reformatting code alone is often rejected."},
        {"text_modification", "The text changes alter the meaning of the post. Edits should preserve the author's intent."},
        {"code_modification", "The code changes alter its behaviour. Suggest code changes in a comment or answer instead."},
        {"status_update", "Status notes such as EDIT or UPDATE belong in comments, not in the post body."},
        {"gratitude_add_remove", "Greetings of thanks are noise in posts. Do not add them, and avoid edits whose only purpose is removing them."},
        {"greetings_add_remove", "Salutations are noise in posts. Do not add them, and avoid edits whose only purpose is removing them."},
        {"signature_add_remove", "Signatures do not belong in the post body."},
        {"deprecation_add_remove", "Notes about deprecated content are better left as comments."},
        {"duplication_add_remove", "Duplicate notices are handled by closing the question, not by editing it."},
        {"undesired_reference_modification", "Links were added, removed or point to inactive pages. Check that every reference is needed and reachable."},
        {"community_trust", "Edits from editors with lower reputation receive more scrutiny. Explain the change clearly in the edit summary."},
        {"other_deface_post", "The edit removes most of the post. Vandalism is always rejected."},
        {"other_complete_change", "The edit replaces the post with different content. Post a new answer instead."},
        {"other_spam", "The edit looks like spam."},
    };
    return c;
}

MessageCatalog MessageCatalog::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::FileNotFound, "cannot open message catalog '" + path.string() + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, "message catalog '" + path.string() + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "message catalog must be a JSON object");
    MessageCatalog c = defaults();
    for (const auto& [key, value] : j.items()) c.set(key, value.get<std::string>());
    return c;
}

std::string MessageCatalog::message_for(const RejectionReason& reason) const {
    const std::string key{reason_name(reason)};
    if (auto it = messages_.find(key); it != messages_.end()) return it->second;
    return key;
}

// Configuration -----------------------------------------------------------------

EnvLookup process_env() {
    return [](const char* name) -> std::optional<std::string> {
        if (const char* v = std::getenv(name)) return std::string(v);
        return std::nullopt;
    };
}

ServiceConfig load_service_config(const std::optional<std::filesystem::path>& config_file, const EnvLookup& env) {
    ServiceConfig cfg;
    if (config_file) {
        std::ifstream in(*config_file);
        if (!in) throw Error(ErrorCode::FileNotFound, "cannot open config file '" + config_file->string() + "'");
        Json j;
        try {
            j = Json::parse(in);
        } catch (const Json::exception& e) {
            throw Error(ErrorCode::InvalidArgument, "config file is not valid JSON: " + std::string(e.what()));
        }
        const Json s = j.contains("service") ? j["service"] : j;
        try {
            if (s.contains("host")) cfg.host = s["host"].get<std::string>();
            if (s.contains("port")) cfg.port = s["port"].get<int>();
            if (s.contains("model")) cfg.model_path = s["model"].get<std::string>();
            if (s.contains("enable_link_checks")) cfg.enable_link_checks = s["enable_link_checks"].get<bool>();
            if (s.contains("link_budget_seconds")) cfg.link_budget_seconds = s["link_budget_seconds"].get<double>();
            if (s.contains("cors_origin")) cfg.cors_origin = s["cors_origin"].get<std::string>();
            if (s.contains("messages")) cfg.messages_path = s["messages"].get<std::string>();
            if (s.contains("max_field_bytes")) cfg.max_field_bytes = s["max_field_bytes"].get<std::size_t>();
        } catch (const Json::exception& e) {
            throw Error(ErrorCode::InvalidArgument, "bad value in config file: " + std::string(e.what()));
        }
    }
    if (auto v = env("EDITEX_HOST")) cfg.host = *v;
    if (auto v = env("EDITEX_PORT")) {
        try {
            cfg.port = std::stoi(*v);
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidArgument, "EDITEX_PORT is not a number: '" + *v + "'");
        }
    }
    if (auto v = env("EDITEX_MODEL")) cfg.model_path = *v;
    if (auto v = env("EDITEX_ENABLE_LINK_CHECKS")) cfg.enable_link_checks = parse_bool(*v);
    if (auto v = env("EDITEX_CORS_ORIGIN")) cfg.cors_origin = *v;
    if (auto v = env("EDITEX_MESSAGES")) cfg.messages_path = *v;
    return cfg;
}

// Service -----------------------------------------------------------------------

PredictionService::PredictionService(ServiceConfig config, MessageCatalog catalog)
    : config_(std::move(config)), catalog_(std::move(catalog)) {}

PredictionService::~PredictionService() { stop(); }

void PredictionService::set_model(std::shared_ptr<const ModelBundle> bundle) {
    std::lock_guard lock(model_mutex_);
    model_ = std::move(bundle);
}

void PredictionService::reload_model() {
    if (!config_.model_path) throw Error(ErrorCode::InvalidArgument, "no model path configured");
    set_model(std::make_shared<const ModelBundle>(load_model(*config_.model_path)));
}

std::shared_ptr<const ModelBundle> PredictionService::model() const {
    std::lock_guard lock(model_mutex_);
    return model_;
}

LinkCheckPolicy PredictionService::link_policy() const {
    if (!config_.enable_link_checks) return LinkCheckDisabled{};
    LinkCheckNetwork net;
    net.budget_seconds = config_.link_budget_seconds;
    return net;
}

ServiceResponse PredictionService::handle_predict(std::string_view body) const {
    Json req;
    try {
        req = Json::parse(body);
    } catch (const Json::exception&) {
        return error_response(400, "invalid_json", "request body is not valid JSON");
    }
    if (!req.is_object()) return error_response(400, "invalid_json", "request body must be a JSON object");

    for (const char* field : {"text_before", "text_after", "reputation", "user_name"}) {
        if (!req.contains(field) || req[field].is_null()) {
            return error_response(400, "missing_field", std::string("missing required field '") + field + "'", field);
        }
    }
    for (const char* field : {"text_before", "text_after", "user_name"}) {
        if (!req[field].is_string()) {
            return error_response(400, "invalid_field", std::string("field '") + field + "' must be a string", field);
        }
        if (req[field].get_ref<const std::string&>().size() > config_.max_field_bytes) {
            return error_response(413, "field_too_large",
                                  std::string("field '") + field + "' exceeds " +
                                      std::to_string(config_.max_field_bytes) + " bytes",
                                  field);
        }
    }
    const Json& rep = req["reputation"];
    if (!rep.is_number_integer() || rep.get<std::int64_t>() < 0) {
        return error_response(400, "invalid_field", "field 'reputation' must be a non-negative integer", "reputation");
    }

    const auto bundle = model();
    if (!bundle) return error_response(503, "model_not_loaded", "no model is loaded");

    EditPair pair;
    pair.id = "request";
    pair.body_before_html = req["text_before"].get<std::string>();
    pair.body_after_html = req["text_after"].get<std::string>();
    pair.editor_name = req["user_name"].get<std::string>();
    pair.editor_reputation = rep.get<std::int64_t>();

    EditDecision decision;
    try {
        decision = predict_edit(*bundle, pair, link_policy());
    } catch (const Error& e) {
        return error_response(500, std::string(to_string(e.code())), e.what());
    }
    Json out;
    out["decision"] = verdict_name(decision.decision);
    out["score"] = decision.score;
    out["reasons"] = Json::array();
    for (const auto& r : decision.reasons) {
        out["reasons"].push_back({{"tag", reason_name(r)}, {"message", catalog_.message_for(r)}});
    }
    out["features"] = to_json(decision.feature_vector);
    return {200, std::move(out)};
}

ServiceResponse PredictionService::handle_health() const {
    Json out;
    out["status"] = "ok";
    out["model_loaded"] = model() != nullptr;
    out["schema_version"] = kModelSchemaVersion;
    return {200, std::move(out)};
}

int PredictionService::start() {
    if (server_) throw Error(ErrorCode::InvalidArgument, "service already started");
    server_ = std::make_unique<httplib::Server>();
    // Whole-request cap; individual fields are checked against max_field_bytes.
    server_->set_payload_max_length(config_.max_field_bytes * 4 + 64 * 1024);

    const std::string origin = config_.cors_origin;
    server_->set_default_headers({{"Access-Control-Allow-Origin", origin},
                                  {"Access-Control-Allow-Headers", "Content-Type"},
                                  {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    auto send = [](httplib::Response& res, const ServiceResponse& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    server_->Post("/api/v1/predict", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, handle_predict(req.body));
    });
    server_->Get("/api/v1/health",
                 [this, send](const httplib::Request&, httplib::Response& res) { send(res, handle_health()); });
    server_->Options(R"(/api/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server_->set_error_handler([send](const httplib::Request&, httplib::Response& res) {
        if (!res.body.empty()) return;
        if (res.status == 413) {
            send(res, error_response(413, "payload_too_large", "request body exceeds the size limit"));
        } else if (res.status == 404) {
            send(res, error_response(404, "not_found", "no such endpoint"));
        }
    });

    int port = config_.port;
    if (port == 0) {
        port = server_->bind_to_any_port(config_.host);
    } else if (!server_->bind_to_port(config_.host, port)) {
        port = -1;
    }
    if (port < 0) {
        server_.reset();
        throw Error(ErrorCode::Io, "cannot bind " + config_.host + ":" + std::to_string(config_.port));
    }
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port;
}

void PredictionService::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
    server_.reset();
}

void PredictionService::wait() {
    if (thread_.joinable()) thread_.join();
}

}  // namespace editex
