// editex command-line tool: train, evaluate, predict, features, rank, serve.

#include <pthread.h>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "editex/error.hpp"
#include "editex/evaluation.hpp"
#include "editex/json_io.hpp"
#include "editex/pipeline.hpp"
#include "editex/service.hpp"

namespace {

using namespace editex;

constexpr int kExitRejected = 3;

int exit_code(ErrorFamily family) {
    switch (family) {
        case ErrorFamily::Usage: return 2;
        case ErrorFamily::Data: return 4;
        case ErrorFamily::Model: return 5;
        case ErrorFamily::Io: return 6;
    }
    return 1;
}

// A model path that cannot be opened is a model problem, not an io one.
struct ModelLoadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ModelBundle load_bundle(const std::string& path) {
    try {
        return load_model(path);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::FileNotFound) throw ModelLoadError("model file not found: " + path);
        throw;
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileNotFound, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + out_path + "'");
    out << text;
}

struct EditArgs {
    std::string before;
    std::string after;
    std::int64_t reputation = 0;
    std::string user_name;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--before", before, "File holding the post HTML before the edit")->required();
        cmd.add_option("--after", after, "File holding the post HTML after the edit")->required();
        cmd.add_option("--reputation", reputation, "Editor reputation")->check(CLI::NonNegativeNumber);
        cmd.add_option("--user-name", user_name, "Editor display name");
    }

    EditPair pair() const {
        EditPair p;
        p.id = "cli";
        p.body_before_html = read_file(before);
        p.body_after_html = read_file(after);
        p.editor_name = user_name;
        p.editor_reputation = reputation;
        return p;
    }
};

LinkCheckPolicy link_policy(bool enabled) {
    if (!enabled) return LinkCheckDisabled{};
    return LinkCheckNetwork{};
}

std::string feature_table(const FeatureVector& fv) {
    std::ostringstream os;
    const Json j = to_json(fv);
    for (const auto& [key, value] : j.items()) {
        std::string name = key;
        name.resize(24, ' ');
        os << name << ' ' << value.dump() << '\n';
    }
    return os.str();
}

std::string ranking_table(const std::vector<FeatureScore>& scores, const char* unit) {
    std::ostringstream os;
    os << "rank  feature                  " << unit << '\n';
    for (std::size_t i = 0; i < scores.size(); ++i) {
        std::string name = scores[i].feature;
        name.resize(24, ' ');
        char buf[64];
        std::snprintf(buf, sizeof buf, "%4zu  %s %.6f\n", i + 1, name.c_str(), scores[i].score);
        os << buf;
    }
    return os.str();
}

Json ranking_json(const std::vector<FeatureScore>& scores) {
    Json arr = Json::array();
    for (const auto& s : scores) arr.push_back({{"feature", s.feature}, {"score", s.score}});
    return arr;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"editex: predict whether a suggested post edit will be rejected, and why"};
    app.require_subcommand(1);
    bool as_json = false;
    std::string config_path;
    app.add_flag("--json", as_json, "Print machine-readable JSON");
    app.add_option("--config", config_path, "JSON config file (service settings under \"service\")")
        ->check(CLI::ExistingFile);

    // train
    auto* train = app.add_subcommand("train", "Train on the chronological first 70% and report held-out metrics");
    std::string train_data;
    std::string train_algo = "rf";
    std::string train_out;
    std::uint64_t train_seed = 42;
    double train_fraction = 0.7;
    int n_trees = 100;
    std::optional<int> max_depth;
    std::optional<int> k_neighbors;
    std::optional<double> learning_rate;
    train->add_option("--data", train_data, "Labelled edits (.jsonl or .csv)")->required();
    train->add_option("--algo", train_algo, "cart, rf, knn or gbt")
        ->check(CLI::IsMember({"cart", "rf", "knn", "gbt"}))
        ->capture_default_str();
    train->add_option("--out", train_out, "Model file to write")->required();
    train->add_option("--seed", train_seed, "Random seed")->capture_default_str();
    train->add_option("--train-fraction", train_fraction, "Share of rows, oldest first, used for training")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    train->add_option("--n-trees", n_trees, "Trees for rf and gbt")->check(CLI::PositiveNumber)->capture_default_str();
    train->add_option("--max-depth", max_depth, "Tree depth (default 5, gbt 3)")->check(CLI::PositiveNumber);
    train->add_option("--k", k_neighbors, "Neighbours for knn (default 46)")->check(CLI::PositiveNumber);
    train->add_option("--learning-rate", learning_rate, "Shrinkage for gbt (default 0.1)");

    // evaluate
    auto* evaluate = app.add_subcommand(
        "evaluate", "Score a saved model on a dataset, or run the full comparison when --model is omitted");
    std::string eval_data;
    std::string eval_model;
    std::string eval_out;
    std::uint64_t eval_seed = 42;
    int eval_trees = 100;
    int eval_perms = 200;
    std::string eval_ranking = "shapley";
    bool no_ablation = false;
    bool eval_links = false;
    evaluate->add_option("--data", eval_data, "Labelled edits (.jsonl or .csv)")->required();
    evaluate->add_option("--model", eval_model, "Saved model; all rows are scored");
    evaluate->add_option("--out", eval_out, "Write the report here instead of stdout");
    evaluate->add_option("--seed", eval_seed, "Random seed for the comparison run")->capture_default_str();
    evaluate->add_option("--n-trees", eval_trees, "Trees for rf and gbt")->check(CLI::PositiveNumber)->capture_default_str();
    evaluate->add_option("--permutations", eval_perms, "Shapley permutations per instance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    evaluate->add_option("--ablation-ranking", eval_ranking, "Ranking that orders the ablation: shapley or infogain")
        ->check(CLI::IsMember({"shapley", "infogain"}))
        ->capture_default_str();
    evaluate->add_flag("--no-ablation", no_ablation, "Skip the feature ablation");
    evaluate->add_flag("--enable-link-checks", eval_links, "Check hyperlinks over the network");

    // predict
    auto* predict = app.add_subcommand("predict", "Predict one edit; exit 0 when accepted, 3 when rejected");
    std::string predict_model;
    EditArgs predict_args;
    bool predict_links = false;
    predict->add_option("--model", predict_model, "Saved model")->required();
    predict_args.add_to(*predict);
    predict->add_flag("--enable-link-checks", predict_links, "Check hyperlinks over the network");

    // features
    auto* features = app.add_subcommand("features", "Print the 15-field feature vector of one edit");
    EditArgs feature_args;
    bool feature_links = false;
    feature_args.add_to(*features);
    features->add_flag("--enable-link-checks", feature_links, "Check hyperlinks over the network");

    // rank
    auto* rank = app.add_subcommand("rank", "Rank features by information gain or Shapley importance");
    std::string rank_data;
    std::string rank_method = "infogain";
    std::string rank_model;
    std::uint64_t rank_seed = 42;
    int rank_bins = 10;
    int rank_perms = 200;
    rank->add_option("--data", rank_data, "Labelled edits (.jsonl or .csv)")->required();
    rank->add_option("--method", rank_method, "infogain or shapley")
        ->check(CLI::IsMember({"infogain", "shapley"}))
        ->capture_default_str();
    rank->add_option("--model", rank_model, "Model explained by shapley (default: a forest trained on the data)");
    rank->add_option("--seed", rank_seed, "Random seed")->capture_default_str();
    rank->add_option("--bins", rank_bins, "Equal-frequency bins for continuous features")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    rank->add_option("--permutations", rank_perms, "Shapley permutations per instance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    // serve
    auto* serve = app.add_subcommand("serve", "Run the HTTP prediction service (flags > EDITEX_* env > config file)");
    std::optional<int> serve_port;
    std::optional<std::string> serve_host;
    std::optional<std::string> serve_model;
    std::optional<std::string> serve_cors;
    std::optional<std::string> serve_messages;
    bool serve_links = false;
    serve->add_option("--port", serve_port, "Listen port (default 8080, 0 picks a free port)");
    serve->add_option("--host", serve_host, "Listen address (default 127.0.0.1)");
    serve->add_option("--model", serve_model, "Model to load at startup");
    serve->add_flag("--enable-link-checks", serve_links, "Check hyperlinks with a 2 second budget per request");
    serve->add_option("--cors-origin", serve_cors, "Access-Control-Allow-Origin value (default *)");
    serve->add_option("--messages", serve_messages, "JSON file overriding reason messages");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*train) {
            const auto algo = *ml::parse_algo(train_algo);
            ml::ModelParams params = ml::ModelParams::defaults(algo);
            params.seed = train_seed;
            params.n_trees = n_trees;
            if (max_depth) params.max_depth = *max_depth;
            if (k_neighbors) params.k_neighbors = *k_neighbors;
            if (learning_rate) params.learning_rate = *learning_rate;

            const IngestResult data = ingest(train_data, format_for(train_data));
            for (const auto& e : data.errors) std::cerr << "warning: line " << e.line << ": " << e.message << '\n';
            std::vector<IngestRecord> labelled;
            for (const auto& r : data.records) {
                if (r.label) labelled.push_back(r);
            }
            if (labelled.empty()) throw Error(ErrorCode::EmptyInput, "no labelled rows in " + train_data);
            const auto split = chronological_split(std::move(labelled), train_fraction);
            std::vector<std::string> notes;
            const ModelBundle bundle =
                fit_bundle(featurize(split.train, LinkCheckDisabled{}), params, &notes);
            save_model(bundle, train_out);
            for (const auto& n : notes) std::cerr << "note: " << n << '\n';

            EvaluationReport report = evaluate_bundle(bundle, split.test, LinkCheckDisabled{});
            report.n_rows = split.train.size() + split.test.size();
            report.n_train = split.train.size();
            report.seed = train_seed;
            if (as_json) {
                Json j = to_json(report);
                j["model"] = train_out;
                std::cout << j.dump(2) << '\n';
            } else {
                std::cout << "model written to " << train_out << "\n\n" << render_text(report);
            }
            return 0;
        }

        if (*evaluate) {
            const IngestResult data = ingest(eval_data, format_for(eval_data));
            EvaluationReport report;
            if (!eval_model.empty()) {
                const ModelBundle bundle = load_bundle(eval_model);
                report = evaluate_bundle(bundle, data.records, link_policy(eval_links));
                report.ingest_errors = data.errors.size();
            } else {
                ExperimentOptions opts;
                opts.seed = eval_seed;
                opts.n_trees = eval_trees;
                opts.shapley_permutations = eval_perms;
                opts.ablation_ranking =
                    eval_ranking == "shapley" ? RankingMethod::Shapley : RankingMethod::InformationGain;
                opts.run_ablation = !no_ablation;
                opts.link_policy = link_policy(eval_links);
                report = run_experiment(data, opts);
            }
            write_output(as_json ? to_json(report).dump(2) + "\n" : render_text(report), eval_out);
            return 0;
        }

        if (*predict) {
            const ModelBundle bundle = load_bundle(predict_model);
            const EditDecision d = predict_edit(bundle, predict_args.pair(), link_policy(predict_links));
            if (as_json) {
                std::cout << to_json(d).dump(2) << '\n';
            } else {
                std::cout << verdict_name(d.decision) << " (score " << d.score << ")\n";
                for (const auto& r : d.reasons) std::cout << "  - " << reason_name(r) << '\n';
            }
            return d.decision == Verdict::Rejected ? kExitRejected : 0;
        }

        if (*features) {
            const FeatureVector fv = extract_features(feature_args.pair(), link_policy(feature_links));
            std::cout << (as_json ? to_json(fv).dump(2) + "\n" : feature_table(fv));
            return 0;
        }

        if (*rank) {
            const IngestResult data = ingest(rank_data, format_for(rank_data));
            std::vector<IngestRecord> labelled;
            for (const auto& r : data.records) {
                if (r.label) labelled.push_back(r);
            }
            if (labelled.empty()) throw Error(ErrorCode::EmptyInput, "no labelled rows in " + rank_data);
            std::vector<FeatureScore> scores;
            if (rank_method == "infogain") {
                scores = information_gain_ranking(to_dataset(featurize(labelled, LinkCheckDisabled{})), rank_bins);
            } else {
                ml::TrainedModel model;
                ml::Dataset instances;
                ml::Dataset background;
                if (!rank_model.empty()) {
                    model = load_bundle(rank_model).predictor;
                    background = to_dataset(featurize(labelled, LinkCheckDisabled{}));
                    instances = background;
                } else {
                    const auto split = chronological_split(std::move(labelled), 0.7);
                    background = to_dataset(featurize(split.train, LinkCheckDisabled{}));
                    instances = to_dataset(featurize(split.test, LinkCheckDisabled{}));
                    ml::ModelParams params = ml::ModelParams::defaults(ml::Algo::RandomForest);
                    params.seed = rank_seed;
                    model = ml::train(background, params);
                }
                auto subsample = [](const ml::Dataset& d, std::size_t limit) {
                    std::vector<std::size_t> idx;
                    const std::size_t take = std::min(d.size(), limit);
                    for (std::size_t i = 0; i < take; ++i) idx.push_back(i * d.size() / take);
                    return d.select_rows(idx);
                };
                scores = shapley_importance(model, subsample(background, 100), subsample(instances, 200), rank_perms,
                                            rank_seed)
                             .ranking;
            }
            if (as_json) {
                std::cout << Json{{"method", rank_method}, {"ranking", ranking_json(scores)}}.dump(2) << '\n';
            } else {
                std::cout << ranking_table(scores, rank_method == "infogain" ? "bits" : "mean |phi|");
            }
            return 0;
        }

        if (*serve) {
            ServiceConfig cfg = load_service_config(
                config_path.empty() ? std::nullopt : std::optional<std::filesystem::path>(config_path));
            if (serve_port) cfg.port = *serve_port;
            if (serve_host) cfg.host = *serve_host;
            if (serve_model) cfg.model_path = *serve_model;
            if (serve_links) cfg.enable_link_checks = true;
            if (serve_cors) cfg.cors_origin = *serve_cors;
            if (serve_messages) cfg.messages_path = *serve_messages;

            MessageCatalog catalog =
                cfg.messages_path ? MessageCatalog::from_file(*cfg.messages_path) : MessageCatalog::defaults();
            PredictionService service(cfg, std::move(catalog));
            if (cfg.model_path) {
                try {
                    service.reload_model();
                } catch (const Error& e) {
                    if (e.code() == ErrorCode::FileNotFound) {
                        throw ModelLoadError("model file not found: " + cfg.model_path->string());
                    }
                    throw;
                }
            }
            // Server threads inherit the blocked mask; this thread waits for the signal.
            sigset_t stop_signals;
            sigemptyset(&stop_signals);
            sigaddset(&stop_signals, SIGINT);
            sigaddset(&stop_signals, SIGTERM);
            pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);
            const int port = service.start();
            std::cerr << "listening on " << cfg.host << ':' << port
                      << (service.model() ? "" : " (no model loaded)") << std::endl;
            int sig = 0;
            sigwait(&stop_signals, &sig);
            service.stop();
            return 0;
        }
    } catch (const ModelLoadError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(ErrorFamily::Model);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.family());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
