#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <thread>

#include <httplib.h>

#include "editex/error.hpp"
#include "editex/service.hpp"
#include "test_support.hpp"

namespace {

using namespace editex;
namespace fs = std::filesystem;

std::shared_ptr<const ModelBundle> golden() {
    static const auto bundle =
        std::make_shared<const ModelBundle>(load_model(testkit::data_dir() / "golden_model.json"));
    return bundle;
}

Json request(std::int64_t reputation = 5000) {
    return {{"text_before", "<p>Same body</p>"},
            {"text_after", "<p>Same body</p>"},
            {"reputation", reputation},
            {"user_name", "ann"}};
}

EnvLookup fake_env(std::map<std::string, std::string> vars) {
    return [vars = std::move(vars)](const char* name) -> std::optional<std::string> {
        auto it = vars.find(name);
        if (it == vars.end()) return std::nullopt;
        return it->second;
    };
}

fs::path write_temp(const std::string& name, const std::string& content) {
    const fs::path p = fs::temp_directory_path() / name;
    std::ofstream(p) << content;
    return p;
}

TEST(Predict, NoModelIs503) {
    PredictionService svc(ServiceConfig{});
    const auto r = svc.handle_predict(request().dump());
    EXPECT_EQ(r.status, 503);
    EXPECT_EQ(r.body["error"]["code"], "model_not_loaded");
    const auto h = svc.handle_health();
    EXPECT_EQ(h.status, 200);
    EXPECT_EQ(h.body["status"], "ok");
    EXPECT_EQ(h.body["model_loaded"], false);
}

TEST(Predict, ValidationErrors) {
    PredictionService svc(ServiceConfig{});
    svc.set_model(golden());

    auto r = svc.handle_predict("{oops");
    EXPECT_EQ(r.status, 400);
    EXPECT_EQ(r.body["error"]["code"], "invalid_json");
    EXPECT_EQ(svc.handle_predict("[1,2]").body["error"]["code"], "invalid_json");

    Json missing = request();
    missing.erase("user_name");
    r = svc.handle_predict(missing.dump());
    EXPECT_EQ(r.status, 400);
    EXPECT_EQ(r.body["error"]["code"], "missing_field");
    EXPECT_EQ(r.body["error"]["field"], "user_name");

    Json negative = request(-3);
    r = svc.handle_predict(negative.dump());
    EXPECT_EQ(r.status, 400);
    EXPECT_EQ(r.body["error"]["code"], "invalid_field");
    EXPECT_EQ(r.body["error"]["field"], "reputation");

    Json wrong_type = request();
    wrong_type["text_after"] = 5;
    EXPECT_EQ(svc.handle_predict(wrong_type.dump()).body["error"]["field"], "text_after");
}

TEST(Predict, OversizedFieldIs413) {
    ServiceConfig cfg;
    cfg.max_field_bytes = 100;
    PredictionService svc(cfg);
    svc.set_model(golden());
    Json big = request();
    big["text_before"] = std::string(101, 'x');
    const auto r = svc.handle_predict(big.dump());
    EXPECT_EQ(r.status, 413);
    EXPECT_EQ(r.body["error"]["code"], "field_too_large");
    EXPECT_EQ(r.body["error"]["field"], "text_before");
    big["text_before"] = std::string(100, 'x');
    EXPECT_EQ(svc.handle_predict(big.dump()).status, 200);
}

TEST(Predict, MatchesLibraryPrediction) {
    PredictionService svc(ServiceConfig{});
    svc.set_model(golden());
    for (std::int64_t rep : {1, 500, 5000}) {
        Json req = request(rep);
        req["text_after"] = "<p>Same body. Thanks a lot!</p>";
        const auto r = svc.handle_predict(req.dump());
        ASSERT_EQ(r.status, 200);

        EditPair p;
        p.id = "request";
        p.body_before_html = req["text_before"];
        p.body_after_html = req["text_after"];
        p.editor_name = "ann";
        p.editor_reputation = rep;
        const EditDecision d = predict_edit(*golden(), p, LinkCheckDisabled{});
        EXPECT_EQ(r.body["decision"], verdict_name(d.decision));
        EXPECT_EQ(r.body["score"].get<double>(), d.score);
        EXPECT_EQ(r.body["features"], to_json(d.feature_vector));
        ASSERT_EQ(r.body["reasons"].size(), d.reasons.size());
        for (std::size_t i = 0; i < d.reasons.size(); ++i) {
            EXPECT_EQ(r.body["reasons"][i]["tag"], reason_name(d.reasons[i]));
            EXPECT_FALSE(r.body["reasons"][i]["message"].get<std::string>().empty());
        }
    }
}

TEST(Messages, CatalogOverlay) {
    const auto defaults = MessageCatalog::defaults();
    for (ReasonTag t : all_reason_tags()) EXPECT_FALSE(defaults.message_for(t).empty()) << reason_name(t);
    const fs::path p = write_temp("editex_messages.json", R"({"community_trust": "Ask a trusted editor."})");
    const auto cat = MessageCatalog::from_file(p);
    EXPECT_EQ(cat.message_for(ReasonTag::CommunityTrust), "Ask a trusted editor.");
    EXPECT_EQ(cat.message_for(ReasonTag::StatusUpdate), defaults.message_for(ReasonTag::StatusUpdate));
    fs::remove(p);
    EXPECT_THROW(MessageCatalog::from_file("/nonexistent/messages.json"), editex::Error);
}

TEST(Config, PrecedenceFileThenEnv) {
    const fs::path file =
        write_temp("editex_service.json", R"({"service": {"host": "0.0.0.0", "port": 9000, "cors_origin": "https://a.example"}})");
    const auto from_file = load_service_config(file, fake_env({}));
    EXPECT_EQ(from_file.host, "0.0.0.0");
    EXPECT_EQ(from_file.port, 9000);
    EXPECT_EQ(from_file.cors_origin, "https://a.example");
    EXPECT_FALSE(from_file.enable_link_checks);

    const auto with_env = load_service_config(
        file, fake_env({{"EDITEX_PORT", "9100"}, {"EDITEX_ENABLE_LINK_CHECKS", "true"}, {"EDITEX_MODEL", "/m.json"}}));
    EXPECT_EQ(with_env.host, "0.0.0.0");
    EXPECT_EQ(with_env.port, 9100);
    EXPECT_TRUE(with_env.enable_link_checks);
    EXPECT_EQ(with_env.model_path, fs::path("/m.json"));

    const auto defaults = load_service_config(std::nullopt, fake_env({}));
    EXPECT_EQ(defaults.host, "127.0.0.1");
    EXPECT_EQ(defaults.port, 8080);
    EXPECT_EQ(defaults.cors_origin, "*");

    EXPECT_THROW(load_service_config(std::nullopt, fake_env({{"EDITEX_PORT", "eighty"}})), editex::Error);
    EXPECT_THROW(load_service_config(fs::path("/nonexistent/cfg.json"), fake_env({})), editex::Error);
    fs::remove(file);
}

TEST(Config, ReloadWithoutPathFails) {
    PredictionService svc(ServiceConfig{});
    EXPECT_THROW(svc.reload_model(), editex::Error);
    ServiceConfig cfg;
    cfg.model_path = testkit::data_dir() / "golden_model.json";
    PredictionService loaded(cfg);
    loaded.reload_model();
    EXPECT_EQ(*loaded.model(), *golden());
}

TEST(Http, EndpointsAndCors) {
    ServiceConfig cfg;
    cfg.port = 0;
    cfg.cors_origin = "https://editor.example";
    PredictionService svc(cfg);
    const int port = svc.start();
    ASSERT_GT(port, 0);
    httplib::Client client("127.0.0.1", port);

    auto health = client.Get("/api/v1/health");
    ASSERT_TRUE(health);
    EXPECT_EQ(health->status, 200);
    EXPECT_EQ(health->get_header_value("Access-Control-Allow-Origin"), "https://editor.example");
    EXPECT_EQ(Json::parse(health->body)["model_loaded"], false);

    auto not_loaded = client.Post("/api/v1/predict", request().dump(), "application/json");
    ASSERT_TRUE(not_loaded);
    EXPECT_EQ(not_loaded->status, 503);

    svc.set_model(golden());
    auto ok = client.Post("/api/v1/predict", request().dump(), "application/json");
    ASSERT_TRUE(ok);
    EXPECT_EQ(ok->status, 200);
    EXPECT_EQ(Json::parse(ok->body)["decision"], "accepted");
    EXPECT_EQ(Json::parse(ok->body), svc.handle_predict(request().dump()).body);

    auto bad = client.Post("/api/v1/predict", "nope", "application/json");
    ASSERT_TRUE(bad);
    EXPECT_EQ(bad->status, 400);
    EXPECT_EQ(bad->get_header_value("Access-Control-Allow-Origin"), "https://editor.example");

    auto preflight = client.Options("/api/v1/predict");
    ASSERT_TRUE(preflight);
    EXPECT_LT(preflight->status, 300);
    EXPECT_FALSE(preflight->get_header_value("Access-Control-Allow-Methods").empty());

    auto unknown = client.Get("/api/v2/nothing");
    ASSERT_TRUE(unknown);
    EXPECT_EQ(unknown->status, 404);
    svc.stop();
}

TEST(Http, ConcurrentIdenticalRequestsAgree) {
    ServiceConfig cfg;
    cfg.port = 0;
    PredictionService svc(cfg);
    svc.set_model(golden());
    const int port = svc.start();
    Json req = request(300);
    req["text_after"] = "<p>Same body</p><p>Hope this helps, thanks!</p>";
    const std::string expected = svc.handle_predict(req.dump()).body.dump();

    std::vector<std::string> bodies(16);
    std::vector<int> statuses(16, 0);
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < bodies.size(); ++t) {
        threads.emplace_back([&, t] {
            httplib::Client client("127.0.0.1", port);
            if (auto res = client.Post("/api/v1/predict", req.dump(), "application/json")) {
                statuses[t] = res->status;
                bodies[t] = Json::parse(res->body).dump();
            }
        });
    }
    for (auto& th : threads) th.join();
    for (std::size_t t = 0; t < bodies.size(); ++t) {
        EXPECT_EQ(statuses[t], 200);
        EXPECT_EQ(bodies[t], expected);
    }
    svc.stop();
}

}  // namespace
