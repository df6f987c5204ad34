// Acceptance suite: one PASS/FAIL line per criterion. Exit status is
// non-zero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <httplib.h>

#include "editex/error.hpp"
#include "editex/evaluation.hpp"
#include "editex/pipeline.hpp"
#include "editex/service.hpp"
#include "editex/text.hpp"
#include "test_support.hpp"

namespace {

using namespace editex;
using namespace editex::testkit;
using Clock = std::chrono::steady_clock;

int failures = 0;

void report(const char* id, bool ok, const std::string& detail) {
    std::printf("%s  %-28s %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

void skip(const char* id, const std::string& detail) {
    std::printf("SKIP  %-28s %s\n", id, detail.c_str());
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

template <typename F>
void guarded(const char* id, F&& body) {
    try {
        body();
    } catch (const std::exception& e) {
        report(id, false, std::string("exception: ") + e.what());
    }
}

void levenshtein_oracle_check() {
    const auto t0 = Clock::now();
    Gaussian g(20240501);
    const std::string alphabet = "abcd";
    std::size_t mismatches = 0;
    for (int i = 0; i < 500; ++i) {
        std::string a;
        std::string b;
        const auto la = g.bits() % 13;
        const auto lb = g.bits() % 13;
        for (std::size_t k = 0; k < la; ++k) a.push_back(alphabet[g.bits() % alphabet.size()]);
        for (std::size_t k = 0; k < lb; ++k) b.push_back(alphabet[g.bits() % alphabet.size()]);
        if (levenshtein(a, b) != levenshtein_oracle(a, b)) ++mismatches;
    }
    const double secs = seconds_since(t0);
    report("levenshtein_oracle", mismatches == 0 && secs < 5.0,
           fmt("500 pairs, %.0f mismatches, %.3f s (limit 5 s)", static_cast<double>(mismatches), secs));
}

void feature_fixture_check() {
    StubServer stub;
    clear_link_cache();
    const auto fixtures = load_feature_fixtures(stub.base());
    std::size_t ok = 0;
    bool csharp_ok = false;
    std::string first_bad;
    for (const auto& f : fixtures) {
        LinkCheckPolicy policy = LinkCheckDisabled{};
        if (f.link_checks) policy = LinkCheckNetwork{2.0, 4, 0.0};
        const FeatureVector got = extract_features(f.pair, policy);
        if (got == f.expected) {
            ++ok;
        } else if (first_bad.empty()) {
            first_bad = "; first mismatch " + f.name + ": got " + to_json(got).dump();
        }
        if (f.name == "csharp_bold_removed") {
            FeatureVector want;
            want.text_format = true;
            want.reputation = f.pair.editor_reputation;
            csharp_ok = got == want;
        }
    }
    report("feature_fixtures", fixtures.size() >= 20 && ok == fixtures.size() && csharp_ok,
           std::to_string(ok) + "/" + std::to_string(fixtures.size()) + " exact, C# bold example " +
               (csharp_ok ? "ok" : "wrong") + first_bad);
}

void metrics_check() {
    const Metrics m = metrics(ConfusionMatrix{129, 78, 153, 63});
    const bool ok = std::abs(m.precision - 0.623) <= 0.001 && std::abs(m.recall - 0.672) <= 0.001 &&
                    std::abs(m.f1 - 0.647) <= 0.001 && std::abs(m.accuracy - 0.667) <= 0.001;
    report("metrics_table_values", ok,
           fmt("precision %.4f recall %.4f f1 %.4f accuracy %.4f (+-0.001)", m.precision, m.recall, m.f1,
               m.accuracy));
}

void ensemble_check() {
    const auto t0 = Clock::now();
    const ml::Dataset data = separable_blobs(400, 7);
    const auto sep = split_70_30(data, 11);
    const auto shuf = split_70_30(shuffled_labels(data, 13), 11);
    std::ostringstream detail;
    bool ok = true;
    for (ml::Algo algo : {ml::Algo::RandomForest, ml::Algo::GradBoost}) {
        const ml::ModelParams params = ml::ModelParams::defaults(algo);
        const double a_sep = accuracy(ml::train(sep.train, params), sep.test);
        const double a_shuf = accuracy(ml::train(shuf.train, params), shuf.test);
        ok = ok && a_sep >= 0.95 && std::abs(a_shuf - 0.5) <= 0.07;
        detail << ml::algo_name(algo) << " separable " << fmt("%.3f", a_sep) << " shuffled " << fmt("%.3f", a_shuf)
               << "; ";
    }
    const double secs = seconds_since(t0);
    ok = ok && secs < 60.0;
    detail << fmt("%.2f s (limit 60 s)", secs);
    report("ensembles_separable_and_null", ok, detail.str());
}

void overfitting_curve_check() {
    const ml::Dataset data = noisy_set(300, 5);
    std::vector<double> acc;
    for (int depth = 1; depth <= 20; ++depth) {
        ml::ModelParams p = ml::ModelParams::defaults(ml::Algo::Cart);
        p.max_depth = depth;
        acc.push_back(accuracy(ml::train_cart(data, p), data));
    }
    bool monotone = true;
    for (std::size_t i = 1; i < acc.size(); ++i) monotone = monotone && acc[i] >= acc[i - 1];
    report("cart_depth_train_accuracy", monotone,
           fmt("depth 1: %.3f, depth 5: %.3f, depth 20: %.3f, non-decreasing", acc[0], acc[4], acc[19]));
}

void smote_check() {
    Gaussian g(99);
    ml::Dataset d({"a", "b", "c"});
    for (int i = 0; i < 60; ++i) {
        const int label = i < 12 ? 1 : 0;
        d.add_row(std::vector<double>{g(), g() * 3.0, g() + 10.0}, label);
    }
    const ml::Dataset out = ml::smote(d, 5, 42);
    const bool balanced = out.count(0) == out.count(1);
    std::vector<std::size_t> minority;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d.label(i) == 1) minority.push_back(i);
    }
    bool prefix_kept = true;
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t j = 0; j < d.n_features(); ++j) prefix_kept = prefix_kept && out.at(i, j) == d.at(i, j);
    }
    std::size_t convex = 0;
    const std::size_t synthetic = out.size() - d.size();
    for (std::size_t s = d.size(); s < out.size(); ++s) {
        bool found = false;
        for (std::size_t a : minority) {
            for (std::size_t b : minority) {
                if (a == b || found) continue;
                std::size_t jmax = 0;
                for (std::size_t j = 1; j < d.n_features(); ++j) {
                    if (std::abs(d.at(b, j) - d.at(a, j)) > std::abs(d.at(b, jmax) - d.at(a, jmax))) jmax = j;
                }
                const double span = d.at(b, jmax) - d.at(a, jmax);
                if (span == 0.0) continue;
                const double lambda = (out.at(s, jmax) - d.at(a, jmax)) / span;
                if (lambda < -1e-12 || lambda > 1.0 + 1e-12) continue;
                bool all = true;
                for (std::size_t j = 0; j < d.n_features(); ++j) {
                    const double expect = d.at(a, j) + lambda * (d.at(b, j) - d.at(a, j));
                    all = all && std::abs(out.at(s, j) - expect) <= 1e-9;
                }
                found = all;
            }
        }
        convex += found ? 1 : 0;
    }
    report("smote_balance_convexity", balanced && prefix_kept && convex == synthetic && synthetic == 36,
           std::to_string(out.count(1)) + " vs " + std::to_string(out.count(0)) + " rows, " + std::to_string(convex) +
               "/" + std::to_string(synthetic) + " synthetic rows on a minority segment (1e-9)");
}

void information_gain_check() {
    const std::vector<double> perfect_x{1, 1, 1, 1, 0, 0, 0, 0};
    const std::vector<int> labels{1, 1, 1, 1, 0, 0, 0, 0};
    const double perfect = information_gain(perfect_x, labels);

    const std::vector<double> indep_x{1, 0, 1, 0, 1, 0, 1, 0};
    const double independent = information_gain(indep_x, labels);

    const std::vector<double> hand_x{1, 1, 1, 1, 0, 0, 0, 0};
    const std::vector<int> hand_y{1, 1, 1, 0, 1, 0, 0, 0};
    const double hand = information_gain(hand_x, hand_y);
    const double oracle = 1.0 - entropy_bits(0.75);

    const bool ok = perfect == 1.0 && std::abs(independent) <= 1e-9 && std::abs(hand - 0.1887) <= 1e-4 &&
                    std::abs(hand - oracle) <= 1e-12;
    report("information_gain_cases", ok,
           fmt("perfect %.12f, independent %.2e, 8-row case %.6f (oracle %.6f)", perfect, independent, hand, oracle));
}

void shapley_check() {
    // Two-feature stump: one split on x0. x1 is constant while training, so
    // the tree never consults it and it must receive exactly zero.
    ml::Dataset train({"x0", "x1"});
    for (int i = 0; i < 20; ++i) {
        const double x0 = (i % 2) ? 0.9 : 0.1;
        train.add_row(std::vector<double>{x0, 0.0}, x0 > 0.5 ? 1 : 0);
    }
    ml::ModelParams p = ml::ModelParams::defaults(ml::Algo::Cart);
    p.max_depth = 1;
    const ml::TrainedModel model = ml::train_cart(train, p);
    auto f = [&](const std::vector<double>& z) { return ml::predict(model, z).score; };

    ml::Dataset background({"x0", "x1"});
    Gaussian g(3);
    std::vector<std::vector<double>> bg_rows;
    for (int i = 0; i < 8; ++i) {
        std::vector<double> r{g.uniform(), g()};
        background.add_row(r, 0);
        bg_rows.push_back(r);
    }
    ml::Dataset instances({"x0", "x1"});
    const std::vector<std::vector<double>> xs{{0.9, 0.3}, {0.2, 0.7}, {0.6, -4.0}};
    for (const auto& x : xs) instances.add_row(x, 0);

    const ShapleyResult r = shapley_importance(model, background, instances, 200, 42);
    bool within = true;
    bool dummy_zero = true;
    bool efficient = true;
    double worst = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto exact = exact_shapley(f, xs[i], bg_rows);
        const double diff = std::abs(r.attributions[i][0] - exact[0]);
        const double se = r.standard_errors[i][0];
        within = within && (se > 0.0 ? diff <= 3.0 * se : diff <= 1e-12);
        if (se > 0.0) worst = std::max(worst, diff / se);
        dummy_zero = dummy_zero && r.attributions[i][1] == 0.0 && exact[1] == 0.0;

        double mean_f = 0.0;
        for (const auto& b : bg_rows) mean_f += f(b);
        mean_f /= static_cast<double>(bg_rows.size());
        const double gap = std::abs(r.attributions[i][0] + r.attributions[i][1] - (f(xs[i]) - mean_f));
        efficient = efficient && (se > 0.0 ? gap <= 3.0 * se : gap <= 1e-12);
    }
    report("shapley_exact_oracle", within && dummy_zero && efficient,
           fmt("largest deviation %.2f standard errors (limit 3)", worst) + ", efficiency within 3 SE: " +
               (efficient ? "yes" : "no") + ", dummy feature exactly 0: " + (dummy_zero ? "yes" : "no"));
}

void reason_fixture_check() {
    const auto fixtures = load_reason_fixtures();
    std::size_t ok = 0;
    std::vector<std::vector<RejectionReason>> identified;
    std::vector<std::vector<RejectionReason>> annotated;
    for (const auto& f : fixtures) {
        const auto got = identify_reasons(f.features, f.lengths, nullptr);
        ok += got == f.expected ? 1 : 0;
        identified.push_back(got);
        annotated.push_back(f.annotated);
    }
    const ConfusionMatrix cm = reason_confusion(identified, annotated);
    // Hand count: 8 exact matches with reasons, 2 mismatches, 1 empty/empty,
    // 1 missed signature.
    const ConfusionMatrix hand{8, 2, 1, 1};
    report("reason_fixtures", fixtures.size() == 12 && ok == 12 && cm == hand,
           std::to_string(ok) + "/" + std::to_string(fixtures.size()) + " reason lists exact; confusion TP " +
               std::to_string(cm.tp) + " FP " + std::to_string(cm.fp) + " TN " + std::to_string(cm.tn) + " FN " +
               std::to_string(cm.fn) + " (expected 8/2/1/1)");
}

void persistence_check() {
    const ml::Dataset data = separable_blobs(200, 21);
    Gaussian g(77);
    std::vector<std::vector<double>> probes(1000, std::vector<double>(kFeatureCount));
    for (auto& p : probes) {
        for (auto& v : p) v = g() * 3.0;
    }
    const auto dir = std::filesystem::temp_directory_path() / "editex_acceptance";
    std::filesystem::create_directories(dir);
    std::ostringstream detail;
    bool ok = true;
    for (ml::Algo algo : {ml::Algo::Cart, ml::Algo::RandomForest, ml::Algo::Knn, ml::Algo::GradBoost}) {
        ml::ModelParams params = ml::ModelParams::defaults(algo);
        if (algo == ml::Algo::Knn) params.k_neighbors = 15;
        ModelBundle bundle;
        bundle.predictor = ml::train(data, params);
        const auto path = dir / (std::string(ml::algo_name(algo)) + ".json");
        save_model(bundle, path);
        const ModelBundle loaded = load_model(path);
        std::size_t same = 0;
        for (const auto& p : probes) {
            const auto a = ml::predict(bundle.predictor, p);
            const auto b = ml::predict(loaded.predictor, p);
            same += (a.label == b.label && std::memcmp(&a.score, &b.score, sizeof(double)) == 0) ? 1 : 0;
        }
        ok = ok && same == probes.size() && loaded == bundle;
        detail << ml::algo_name(algo) << ' ' << same << "/1000 ";
    }
    std::filesystem::remove_all(dir);
    report("persistence_round_trip", ok, detail.str() + "bit-identical");
}

void service_check() {
    const auto bundle = std::make_shared<const ModelBundle>(load_model(data_dir() / "golden_model.json"));
    ServiceConfig cfg;
    cfg.port = 0;
    PredictionService service(cfg);
    service.set_model(bundle);
    const int port = service.start();
    httplib::Client client("127.0.0.1", port);

    std::vector<EditPair> pairs;
    for (const auto& f : load_feature_fixtures()) {
        if (!f.link_checks) pairs.push_back(f.pair);
    }
    for (const auto& r : ingest(data_dir() / "edits.jsonl", DataFormat::Jsonl).records) pairs.push_back(r.pair);

    std::size_t equal = 0;
    std::size_t rejected = 0;
    for (auto pair : pairs) {
        pair.other_party_name.reset();  // the service only knows the editor
        const EditDecision offline = predict_edit(*bundle, pair, LinkCheckDisabled{});
        const Json body{{"text_before", pair.body_before_html},
                        {"text_after", pair.body_after_html},
                        {"reputation", pair.editor_reputation},
                        {"user_name", pair.editor_name}};
        const auto res = client.Post("/api/v1/predict", body.dump(), "application/json");
        if (!res || res->status != 200) continue;
        const Json got = Json::parse(res->body);
        std::vector<std::string> tags;
        for (const auto& r : got["reasons"]) tags.push_back(r["tag"].get<std::string>());
        std::vector<std::string> want;
        for (const auto& r : offline.reasons) want.emplace_back(reason_name(r));
        const bool same = got["decision"] == verdict_name(offline.decision) &&
                          got["score"].get<double>() == offline.score && tags == want &&
                          feature_vector_from_json(got["features"]) == offline.feature_vector;
        equal += same ? 1 : 0;
        rejected += offline.decision == Verdict::Rejected ? 1 : 0;
    }

    const auto bad = client.Post("/api/v1/predict", "{not json", "application/json");
    const bool malformed_400 = bad && bad->status == 400;
    const auto missing = client.Post("/api/v1/predict", R"({"text_before":"a","text_after":"b","user_name":"x"})",
                                     "application/json");
    const bool missing_400 =
        missing && missing->status == 400 && Json::parse(missing->body)["error"]["code"] == "missing_field";
    service.stop();

    PredictionService empty(cfg);
    const int empty_port = empty.start();
    httplib::Client empty_client("127.0.0.1", empty_port);
    const auto unavailable = empty_client.Post(
        "/api/v1/predict", R"({"text_before":"a","text_after":"b","reputation":1,"user_name":"x"})", "application/json");
    const bool no_model_503 = unavailable && unavailable->status == 503;
    empty.stop();

    report("service_parity", equal == pairs.size() && rejected > 0 && malformed_400 && missing_400 && no_model_503,
           std::to_string(equal) + "/" + std::to_string(pairs.size()) + " responses equal offline (" +
               std::to_string(rejected) + " rejected); malformed 400: " + (malformed_400 ? "yes" : "no") +
               ", missing field 400: " + (missing_400 ? "yes" : "no") + ", no model 503: " +
               (no_model_503 ? "yes" : "no"));
}

void corpus_check() {
    const char* path = std::getenv("EDITEX_CORPUS");
    if (path == nullptr || *path == '\0') {
        skip("optional_corpus", "set EDITEX_CORPUS to a labelled corpus with >= 500 rows per class");
        return;
    }
    const auto data = ingest(path, format_for(path));
    std::size_t rej = 0;
    std::size_t acc = 0;
    for (const auto& r : data.records) {
        if (r.label == Verdict::Rejected) ++rej;
        if (r.label == Verdict::Accepted) ++acc;
    }
    if (rej < 500 || acc < 500) {
        report("optional_corpus", false,
               "corpus has " + std::to_string(rej) + " rejected / " + std::to_string(acc) + " accepted rows");
        return;
    }
    ExperimentOptions opts;
    opts.run_ablation = false;
    const EvaluationReport r = run_experiment(data, opts);
    double rf_accuracy = -1.0;
    for (const auto& c : r.classifiers) {
        if (c.name == "rf" && !c.error) rf_accuracy = c.rejected.accuracy;
    }
    report("optional_corpus", rf_accuracy >= 0.0, fmt("run_experiment completed; RF accuracy %.3f", rf_accuracy));
}

}  // namespace

int main() {
    guarded("levenshtein_oracle", levenshtein_oracle_check);
    guarded("feature_fixtures", feature_fixture_check);
    guarded("metrics_table_values", metrics_check);
    guarded("ensembles_separable_and_null", ensemble_check);
    guarded("cart_depth_train_accuracy", overfitting_curve_check);
    guarded("smote_balance_convexity", smote_check);
    guarded("information_gain_cases", information_gain_check);
    guarded("shapley_exact_oracle", shapley_check);
    guarded("reason_fixtures", reason_fixture_check);
    guarded("persistence_round_trip", persistence_check);
    guarded("service_parity", service_check);
    guarded("optional_corpus", corpus_check);
    std::printf("%s\n", failures == 0 ? "all criteria passed" : (std::to_string(failures) + " failed").c_str());
    return failures == 0 ? 0 : 1;
}
