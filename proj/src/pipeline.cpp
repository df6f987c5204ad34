#include "editex/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "editex/error.hpp"
#include "editex/post_parser.hpp"
#include "editex/text.hpp"

namespace editex {
namespace {

// CSV ------------------------------------------------------------------------

struct CsvRow {
    std::vector<std::string> fields;
    std::size_t line = 0;
};

// RFC 4180: quoted fields may contain commas, newlines and doubled quotes.
std::vector<CsvRow> read_csv(std::string_view text) {
    std::vector<CsvRow> rows;
    CsvRow row;
    std::string field;
    bool quoted = false;
    bool any = false;
    std::size_t line = 1;
    row.line = 1;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        if (c == '"' && field.empty()) {
            quoted = true;
            any = true;
        } else if (c == ',') {
            row.fields.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (any || !field.empty()) {
                row.fields.push_back(std::move(field));
                rows.push_back(std::move(row));
            }
            field.clear();
            row = CsvRow{};
            any = false;
            ++line;
            row.line = line;
        } else {
            field.push_back(c);
            any = true;
        }
    }
    if (any || !field.empty()) {
        row.fields.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::string> split_reasons(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i <= s.size()) {
        std::size_t j = s.find_first_of(";|", i);
        if (j == std::string_view::npos) j = s.size();
        std::string part{s.substr(i, j - i)};
        part.erase(0, part.find_first_not_of(' '));
        part.erase(part.find_last_not_of(' ') + 1);
        if (!part.empty()) out.push_back(part);
        i = j + 1;
    }
    return out;
}

IngestRecord record_from_json(const Json& j, std::size_t line) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "row is not an object");
    for (const char* key : {"id", "timestamp"}) {
        if (!j.contains(key) || j.at(key).is_null()) {
            throw Error(ErrorCode::InvalidArgument, std::string("missing required field '") + key + "'");
        }
    }
    IngestRecord rec;
    rec.line = line;
    rec.pair = edit_pair_from_json(j);
    if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
        const auto label = ascii_lower(it->get<std::string>());
        if (label == "rejected") {
            rec.label = Verdict::Rejected;
        } else if (label == "accepted") {
            rec.label = Verdict::Accepted;
        } else {
            throw Error(ErrorCode::InvalidArgument, "label must be 'rejected' or 'accepted', got '" + label + "'");
        }
    }
    if (auto it = j.find("reasons"); it != j.end() && !it->is_null()) {
        std::vector<RejectionReason> reasons;
        for (const auto& r : *it) reasons.push_back(reason_from_json(r));
        canonicalize(reasons);
        if (rec.label == Verdict::Accepted && !reasons.empty()) {
            throw Error(ErrorCode::InvalidArgument, "accepted rows cannot carry rejection reasons");
        }
        rec.reasons = std::move(reasons);
    }
    return rec;
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Training helpers --------------------------------------------------------

bool has_reason(const std::vector<RejectionReason>& reasons, ReasonTag tag) {
    return std::any_of(reasons.begin(), reasons.end(), [&](const RejectionReason& r) { return r.tag == tag; });
}

std::vector<LengthExample> length_examples(std::span<const FeaturizedRecord> rows) {
    std::vector<LengthExample> out;
    for (const auto& row : rows) {
        if (!row.record.label) continue;
        const bool rejected = *row.record.label == Verdict::Rejected;
        if (rejected && !row.record.reasons) continue;
        static const std::vector<RejectionReason> kNone;
        const auto& reasons = rejected ? *row.record.reasons : kNone;
        const bool text = has_reason(reasons, ReasonTag::UndesiredTextAddRemove);
        const bool code = has_reason(reasons, ReasonTag::UndesiredCodeAddRemove);
        LengthExample ex;
        ex.lengths = row.lengths;
        ex.undesired[0] = text && row.lengths.added_text_ratio > 0.0;
        ex.undesired[1] = text && row.lengths.removed_text_ratio > 0.0;
        ex.undesired[2] = code && row.lengths.added_code_ratio > 0.0;
        ex.undesired[3] = code && row.lengths.removed_code_ratio > 0.0;
        out.push_back(ex);
    }
    return out;
}

std::optional<ReasonModels> try_fit_reason_models(std::span<const FeaturizedRecord> rows,
                                                  const ml::ModelParams& params, const ReasonConfig& config,
                                                  std::vector<std::string>* notes) {
    const bool labelled = std::any_of(rows.begin(), rows.end(), [](const auto& r) { return r.record.reasons.has_value(); });
    if (!labelled) {
        if (notes) notes->push_back("reason models skipped: no reason labels; using ratio fallback");
        return std::nullopt;
    }
    const auto examples = length_examples(rows);
    for (std::size_t task = 0; task < kLengthTaskCount; ++task) {
        std::size_t pos = 0;
        for (const auto& ex : examples) pos += ex.undesired[task] ? 1 : 0;
        if (pos < 2 || examples.size() - pos < 2) {
            if (notes) {
                notes->push_back("reason models skipped: length task " + std::to_string(task) +
                                 " has too few examples of one class; using ratio fallback");
            }
            return std::nullopt;
        }
    }
    ml::ModelParams rf = ml::ModelParams::defaults(ml::Algo::RandomForest);
    rf.n_trees = params.n_trees > 0 ? params.n_trees : rf.n_trees;
    return train_reason_models(examples, rf, params.seed, config.smote_k);
}

std::vector<std::size_t> evenly_spaced(std::size_t n, std::size_t limit) {
    std::vector<std::size_t> out;
    if (n == 0 || limit == 0) return out;
    const std::size_t take = std::min(n, limit);
    for (std::size_t i = 0; i < take; ++i) out.push_back(i * n / take);
    return out;
}

ClassifierEvaluation evaluate_predictions(std::string name, std::span<const int> predicted,
                                          std::span<const int> actual) {
    ClassifierEvaluation ev;
    ev.name = std::move(name);
    for (std::size_t i = 0; i < predicted.size(); ++i) ev.confusion.add(predicted[i], actual[i]);
    ev.rejected = metrics(ev.confusion);
    ev.accepted = metrics(ev.confusion.flipped());
    return ev;
}

ClassifierEvaluation evaluate_model(std::string name, const ml::TrainedModel& model, const ml::Dataset& test) {
    std::vector<int> predicted;
    for (std::size_t i = 0; i < test.size(); ++i) predicted.push_back(ml::predict(model, test.row(i)).label);
    auto ev = evaluate_predictions(std::move(name), predicted, test.labels());
    ev.notes = model.warnings;
    return ev;
}

std::vector<FeaturizedRecord> labelled_only(std::vector<FeaturizedRecord> rows) {
    rows.erase(std::remove_if(rows.begin(), rows.end(), [](const auto& r) { return !r.record.label; }), rows.end());
    return rows;
}

void add_baselines(EvaluationReport& report, const Quartiles& q, std::span<const FeaturizedRecord> test) {
    std::vector<int> actual;
    std::vector<int> trivial;
    std::vector<int> non_trivial;
    for (const auto& row : test) {
        actual.push_back(*row.record.label == Verdict::Rejected ? 1 : 0);
        const EditCategory c = edit_category(row.edit_distance, q);
        trivial.push_back(baseline_predict(c, BaselineMode::RejectTrivial));
        non_trivial.push_back(baseline_predict(c, BaselineMode::RejectNonTrivial));
    }
    report.classifiers.push_back(evaluate_predictions("baseline_reject_trivial", trivial, actual));
    report.classifiers.push_back(evaluate_predictions("baseline_reject_non_trivial", non_trivial, actual));
}

void add_reason_section(EvaluationReport& report, std::span<const FeaturizedRecord> test,
                        std::span<const int> predicted, const ReasonModels* models, const ReasonConfig& config) {
    std::vector<std::vector<RejectionReason>> identified;
    std::vector<std::vector<RejectionReason>> expected;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto& rec = test[i].record;
        const bool rejected = *rec.label == Verdict::Rejected;
        if (rejected && !rec.reasons) continue;
        expected.push_back(rejected ? *rec.reasons : std::vector<RejectionReason>{});
        identified.push_back(predicted[i] == 1 ? identify_reasons(test[i].features, test[i].lengths, models, config)
                                               : std::vector<RejectionReason>{});
    }
    const ConfusionMatrix cm = reason_confusion(identified, expected);
    report.reason_status = "ok";
    report.reason_confusion = cm;
    report.reason_metrics = metrics(cm);
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

}  // namespace

// Ingestion -----------------------------------------------------------------

DataFormat format_for(const std::filesystem::path& path) {
    return ascii_lower(path.extension().string()) == ".csv" ? DataFormat::Csv : DataFormat::Jsonl;
}

IngestResult ingest_text(std::string_view content, DataFormat format) {
    IngestResult out;
    std::size_t attempted = 0;
    auto handle = [&](std::size_t line, auto&& make_json) {
        ++attempted;
        try {
            out.records.push_back(record_from_json(make_json(), line));
        } catch (const std::exception& e) {
            out.errors.push_back({line, e.what()});
        }
    };

    if (format == DataFormat::Jsonl) {
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= content.size()) {
            std::size_t nl = content.find('\n', pos);
            if (nl == std::string_view::npos) nl = content.size();
            std::string_view line = content.substr(pos, nl - pos);
            ++line_no;
            pos = nl + 1;
            if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
            handle(line_no, [&] { return Json::parse(line); });
        }
    } else {
        const auto rows = read_csv(content);
        if (!rows.empty()) {
            const auto& header = rows.front().fields;
            for (std::size_t r = 1; r < rows.size(); ++r) {
                handle(rows[r].line, [&] {
                    const auto& f = rows[r].fields;
                    if (f.size() != header.size()) {
                        throw Error(ErrorCode::InvalidArgument, "expected " + std::to_string(header.size()) +
                                                                    " columns, got " + std::to_string(f.size()));
                    }
                    Json j = Json::object();
                    for (std::size_t c = 0; c < header.size(); ++c) {
                        const std::string& key = header[c];
                        const std::string& value = f[c];
                        if (key == "editor_reputation") {
                            std::size_t used = 0;
                            const long long rep = value.empty() ? 0 : std::stoll(value, &used);
                            if (!value.empty() && used != value.size()) {
                                throw Error(ErrorCode::InvalidArgument, "editor_reputation is not an integer");
                            }
                            j[key] = rep;
                        } else if (key == "reasons") {
                            j[key] = split_reasons(value);
                        } else if (value.empty() && (key == "label" || key == "other_party_name" ||
                                                     key == "id" || key == "timestamp")) {
                            j[key] = nullptr;
                        } else {
                            j[key] = value;
                        }
                    }
                    return j;
                });
            }
        }
    }
    if (attempted > 0 && out.records.empty()) {
        std::string first = out.errors.empty() ? "" : ": line " + std::to_string(out.errors.front().line) + ": " +
                                                         out.errors.front().message;
        throw Error(ErrorCode::AllRowsInvalid, "all " + std::to_string(attempted) + " rows are invalid" + first);
    }
    return out;
}

IngestResult ingest(const std::filesystem::path& path, DataFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileNotFound, "cannot open data file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ingest_text(ss.str(), format);
}

Split<IngestRecord> chronological_split(std::vector<IngestRecord> records, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "train_fraction must lie strictly between 0 and 1");
    }
    if (records.empty()) throw Error(ErrorCode::EmptyInput, "cannot split an empty record list");
    std::stable_sort(records.begin(), records.end(), [](const IngestRecord& a, const IngestRecord& b) {
        if (a.pair.timestamp != b.pair.timestamp) return a.pair.timestamp < b.pair.timestamp;
        return a.pair.id < b.pair.id;
    });
    const auto n_train =
        static_cast<std::size_t>(std::floor(static_cast<double>(records.size()) * train_fraction));
    if (n_train == 0 || n_train >= records.size()) {
        throw Error(ErrorCode::EmptyTestSet, "splitting " + std::to_string(records.size()) +
                                                 " rows at fraction " + std::to_string(train_fraction) +
                                                 " leaves one side empty");
    }
    Split<IngestRecord> out;
    out.train.assign(std::make_move_iterator(records.begin()),
                     std::make_move_iterator(records.begin() + static_cast<std::ptrdiff_t>(n_train)));
    out.test.assign(std::make_move_iterator(records.begin() + static_cast<std::ptrdiff_t>(n_train)),
                    std::make_move_iterator(records.end()));
    return out;
}

// Featurisation -------------------------------------------------------------

double body_edit_distance(const ParsedBody& before, const ParsedBody& after) {
    const std::string b = normalize_text(before.text_plain + "\n" + before.code_plain);
    const std::string a = normalize_text(after.text_plain + "\n" + after.code_plain);
    if (a == b) return 0.0;
    return static_cast<double>(levenshtein(b, a)) / static_cast<double>(std::max<std::size_t>(char_length(b), 1));
}

std::vector<FeaturizedRecord> featurize(std::span<const IngestRecord> records, const LinkCheckPolicy& policy) {
    std::vector<FeaturizedRecord> out(records.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < records.size(); i = next.fetch_add(1)) {
            const EditViews views = parse_edit(records[i].pair);
            out[i].record = records[i];
            out[i].features = extract_features(records[i].pair, views, policy);
            out[i].lengths = length_features(views.before, views.after);
            out[i].edit_distance = body_edit_distance(views.before, views.after);
        }
    };
    const std::size_t n_threads =
        std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(records.size(), 1));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < std::min<std::size_t>(n_threads, 16); ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    return out;
}

ml::Dataset to_dataset(std::span<const FeaturizedRecord> rows) {
    ml::Dataset data = ml::Dataset::edit_schema();
    for (const auto& row : rows) {
        if (!row.record.label) throw Error(ErrorCode::InvalidArgument, "row '" + row.record.pair.id + "' has no label");
        const auto values = row.features.to_array();
        data.add_row(values, *row.record.label == Verdict::Rejected ? 1 : 0, row.record.pair.timestamp);
    }
    return data;
}

// Bundles -----------------------------------------------------------------

ModelBundle fit_bundle(std::span<const FeaturizedRecord> train, const ml::ModelParams& params,
                       std::vector<std::string>* notes) {
    const auto rows = labelled_only({train.begin(), train.end()});
    ModelBundle bundle;
    bundle.predictor = ml::train(to_dataset(rows), params);
    if (notes) notes->insert(notes->end(), bundle.predictor.warnings.begin(), bundle.predictor.warnings.end());
    std::vector<double> distances;
    for (const auto& r : rows) distances.push_back(r.edit_distance);
    if (!distances.empty()) bundle.quartiles = compute_quartiles(distances);
    bundle.reason_models = try_fit_reason_models(rows, params, bundle.reason_config, notes);
    return bundle;
}

std::string serialize_model(const ModelBundle& bundle) {
    Json payload;
    payload["feature_order"] = bundle.predictor.feature_names;
    payload["predictor"] = to_json(bundle.predictor);
    payload["decision_threshold"] = bundle.decision_threshold;
    payload["quartiles"] = bundle.quartiles ? to_json(*bundle.quartiles) : Json(nullptr);
    if (bundle.reason_models) {
        Json models = Json::array();
        for (const auto& m : bundle.reason_models->models) models.push_back(to_json(m));
        payload["reason_models"] = std::move(models);
    } else {
        payload["reason_models"] = nullptr;
    }
    payload["reason_config"] = to_json(bundle.reason_config);
    payload["scoring_table"] = to_json(bundle.scoring);

    Json doc;
    doc["schema_version"] = kModelSchemaVersion;
    doc["checksum"] = "fnv1a64:" + hex64(fnv1a64(payload.dump()));
    doc["payload"] = std::move(payload);
    return doc.dump() + "\n";
}

ModelBundle deserialize_model(std::string_view document) {
    Json doc;
    try {
        doc = Json::parse(document);
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::CorruptModel, std::string("model document does not parse: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("schema_version") || !doc["schema_version"].is_number_integer()) {
        throw Error(ErrorCode::CorruptModel, "model document has no schema_version");
    }
    const int version = doc["schema_version"].get<int>();
    if (version != kModelSchemaVersion) {
        throw Error(ErrorCode::SchemaVersionMismatch, "model schema version " + std::to_string(version) +
                                                          " is not supported (expected " +
                                                          std::to_string(kModelSchemaVersion) + ")");
    }
    if (!doc.contains("payload") || !doc.contains("checksum")) {
        throw Error(ErrorCode::CorruptModel, "model document is missing payload or checksum");
    }
    const Json& payload = doc["payload"];
    const std::string expected = "fnv1a64:" + hex64(fnv1a64(payload.dump()));
    if (!doc["checksum"].is_string() || doc["checksum"].get<std::string>() != expected) {
        throw Error(ErrorCode::CorruptModel, "model checksum mismatch");
    }
    try {
        ModelBundle bundle;
        bundle.predictor = trained_model_from_json(payload.at("predictor"));
        bundle.decision_threshold = payload.at("decision_threshold").get<double>();
        if (!payload.at("quartiles").is_null()) bundle.quartiles = quartiles_from_json(payload.at("quartiles"));
        if (!payload.at("reason_models").is_null()) {
            const auto& arr = payload.at("reason_models");
            if (arr.size() != kLengthTaskCount) throw Error(ErrorCode::CorruptModel, "expected four reason models");
            ReasonModels rm;
            for (std::size_t i = 0; i < kLengthTaskCount; ++i) rm.models[i] = trained_model_from_json(arr.at(i));
            bundle.reason_models = std::move(rm);
        }
        bundle.reason_config = reason_config_from_json(payload.at("reason_config"));
        bundle.scoring = scoring_table_from_json(payload.at("scoring_table"));
        return bundle;
    } catch (const Error& e) {
        throw Error(ErrorCode::CorruptModel, e.what());
    } catch (const std::exception& e) {
        throw Error(ErrorCode::CorruptModel, std::string("malformed model payload: ") + e.what());
    }
}

void save_model(const ModelBundle& bundle, const std::filesystem::path& path) {
    const std::string doc = serialize_model(bundle);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write model file '" + path.string() + "'");
    out << doc;
    if (!out.flush()) throw Error(ErrorCode::Io, "failed writing model file '" + path.string() + "'");
}

ModelBundle load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileNotFound, "cannot open model file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize_model(ss.str());
}

EditDecision predict_edit(const ModelBundle& bundle, const EditPair& pair, const LinkCheckPolicy& policy) {
    const EditViews views = parse_edit(pair);
    EditDecision out;
    out.feature_vector = extract_features(pair, views, policy);
    out.score = ml::predict(bundle.predictor, out.feature_vector).score;
    out.decision = out.score >= bundle.decision_threshold ? Verdict::Rejected : Verdict::Accepted;
    if (out.decision == Verdict::Rejected) {
        const LengthFeatures lengths = length_features(views.before, views.after);
        out.reasons = identify_reasons(out.feature_vector, lengths,
                                       bundle.reason_models ? &*bundle.reason_models : nullptr, bundle.reason_config);
    }
    return out;
}

// Experiments ---------------------------------------------------------------

EvaluationReport run_experiment(const std::filesystem::path& data_path, const ExperimentOptions& options) {
    return run_experiment(ingest(data_path, format_for(data_path)), options);
}

EvaluationReport run_experiment(const IngestResult& data, const ExperimentOptions& options) {
    EvaluationReport report;
    report.seed = options.seed;
    report.ingest_errors = data.errors.size();
    for (const auto& e : data.errors) {
        report.warnings.push_back("ingest line " + std::to_string(e.line) + ": " + e.message);
    }
    std::vector<IngestRecord> labelled;
    for (const auto& r : data.records) {
        if (r.label) labelled.push_back(r);
    }
    if (labelled.size() != data.records.size()) {
        report.warnings.push_back(std::to_string(data.records.size() - labelled.size()) + " unlabelled rows ignored");
    }
    if (labelled.empty()) throw Error(ErrorCode::EmptyInput, "no labelled rows to experiment on");
    report.n_rows = labelled.size();

    auto split = chronological_split(std::move(labelled), options.train_fraction);
    const auto train_rows = featurize(split.train, options.link_policy);
    const auto test_rows = featurize(split.test, options.link_policy);
    report.n_train = train_rows.size();
    report.n_test = test_rows.size();
    const ml::Dataset train = to_dataset(train_rows);
    const ml::Dataset test = to_dataset(test_rows);
    if (train.count(1) == 0 || train.count(1) == train.size()) {
        report.warnings.push_back("degenerate training data: only one class present");
    }

    std::optional<ml::TrainedModel> forest;
    for (ml::Algo algo : {ml::Algo::Cart, ml::Algo::RandomForest, ml::Algo::Knn, ml::Algo::GradBoost}) {
        ml::ModelParams params = ml::ModelParams::defaults(algo);
        params.seed = options.seed;
        params.n_trees = options.n_trees;
        std::vector<std::string> extra;
        if (algo == ml::Algo::Knn && static_cast<std::size_t>(params.k_neighbors) > train.size()) {
            params.k_neighbors = static_cast<int>(train.size());
            extra.push_back("k_neighbors reduced to " + std::to_string(params.k_neighbors) +
                            " (training rows available)");
        }
        try {
            ml::TrainedModel model = ml::train(train, params);
            auto ev = evaluate_model(std::string(ml::algo_name(algo)), model, test);
            ev.notes.insert(ev.notes.begin(), extra.begin(), extra.end());
            report.classifiers.push_back(std::move(ev));
            if (algo == ml::Algo::RandomForest) forest = std::move(model);
        } catch (const Error& e) {
            ClassifierEvaluation ev;
            ev.name = ml::algo_name(algo);
            ev.error = std::string(to_string(e.code())) + ": " + e.what();
            report.classifiers.push_back(std::move(ev));
        }
    }

    std::vector<double> distances;
    for (const auto& r : train_rows) distances.push_back(r.edit_distance);
    report.quartiles = compute_quartiles(distances);
    add_baselines(report, *report.quartiles, test_rows);

    const bool has_reason_labels =
        std::any_of(data.records.begin(), data.records.end(), [](const auto& r) { return r.reasons.has_value(); });
    if (!has_reason_labels) {
        report.reason_status = "skipped: no reason labels";
    } else if (!forest) {
        report.reason_status = "skipped: random forest unavailable";
    } else {
        ml::ModelParams params = ml::ModelParams::defaults(ml::Algo::RandomForest);
        params.seed = options.seed;
        params.n_trees = options.n_trees;
        const ReasonConfig config;
        const auto models = try_fit_reason_models(train_rows, params, config, &report.warnings);
        std::vector<int> predicted;
        for (std::size_t i = 0; i < test.size(); ++i) predicted.push_back(ml::predict(*forest, test.row(i)).label);
        add_reason_section(report, test_rows, predicted, models ? &*models : nullptr, config);
    }

    report.information_gain = information_gain_ranking(train, options.information_gain_bins);

    if (forest) {
        const auto bg = train.select_rows(evenly_spaced(train.size(), options.shapley_background));
        const auto inst = test.select_rows(evenly_spaced(test.size(), options.shapley_instances));
        report.shapley =
            shapley_importance(*forest, bg, inst, options.shapley_permutations, options.seed).ranking;
    }

    const auto& ranking =
        options.ablation_ranking == RankingMethod::Shapley && !report.shapley.empty() ? report.shapley
                                                                                      : report.information_gain;
    report.ablation_ranking = &ranking == &report.shapley ? "shapley" : "information_gain";
    if (options.run_ablation && forest) {
        ml::ModelParams params = ml::ModelParams::defaults(ml::Algo::RandomForest);
        params.seed = options.seed;
        params.n_trees = options.n_trees;
        std::vector<std::string> kept;
        for (const auto& fs : ranking) kept.push_back(fs.feature);
        while (kept.size() > 1) {
            const std::string removed = kept.back();
            kept.pop_back();
            std::vector<std::size_t> columns;
            for (std::size_t c = 0; c < train.n_features(); ++c) {
                if (std::find(kept.begin(), kept.end(), train.feature_names()[c]) != kept.end()) columns.push_back(c);
            }
            const auto sub_train = train.select_columns(columns);
            const auto sub_test = test.select_columns(columns);
            const auto model = ml::train_random_forest(sub_train, params);
            const auto ev = evaluate_model("rf", model, sub_test);
            report.ablation.push_back({removed, kept.size(), ev.rejected, ev.accepted});
        }
    }
    return report;
}

EvaluationReport evaluate_bundle(const ModelBundle& bundle, std::span<const IngestRecord> records,
                                 const LinkCheckPolicy& policy) {
    EvaluationReport report;
    report.seed = bundle.predictor.params.seed;
    std::vector<IngestRecord> labelled;
    for (const auto& r : records) {
        if (r.label) labelled.push_back(r);
    }
    if (labelled.size() != records.size()) {
        report.warnings.push_back(std::to_string(records.size() - labelled.size()) + " unlabelled rows ignored");
    }
    if (labelled.empty()) throw Error(ErrorCode::EmptyInput, "no labelled rows to evaluate");
    const auto rows = featurize(labelled, policy);
    report.n_rows = rows.size();
    report.n_test = rows.size();

    std::vector<int> predicted;
    std::vector<int> actual;
    for (const auto& row : rows) {
        const double score = ml::predict(bundle.predictor, row.features).score;
        predicted.push_back(score >= bundle.decision_threshold ? 1 : 0);
        actual.push_back(*row.record.label == Verdict::Rejected ? 1 : 0);
    }
    auto ev = evaluate_predictions(std::string(ml::algo_name(bundle.predictor.algo)), predicted, actual);
    ev.notes = bundle.predictor.warnings;
    report.classifiers.push_back(std::move(ev));

    if (bundle.quartiles) {
        report.quartiles = bundle.quartiles;
        add_baselines(report, *bundle.quartiles, rows);
    }
    const bool has_reason_labels =
        std::any_of(labelled.begin(), labelled.end(), [](const auto& r) { return r.reasons.has_value(); });
    if (has_reason_labels) {
        add_reason_section(report, rows, predicted, bundle.reason_models ? &*bundle.reason_models : nullptr,
                           bundle.reason_config);
    } else {
        report.reason_status = "skipped: no reason labels";
    }
    report.information_gain = information_gain_ranking(to_dataset(rows));
    return report;
}

// Report rendering ------------------------------------------------------------

Json to_json(const EvaluationReport& r) {
    Json j;
    j["rows"] = {{"total", r.n_rows}, {"train", r.n_train}, {"test", r.n_test}, {"ingest_errors", r.ingest_errors}};
    j["seed"] = r.seed;
    j["warnings"] = r.warnings;
    Json classifiers = Json::array();
    for (const auto& c : r.classifiers) {
        Json cj;
        cj["name"] = c.name;
        if (c.error) {
            cj["error"] = *c.error;
        } else {
            cj["confusion"] = to_json(c.confusion);
            cj["rejected"] = to_json(c.rejected);
            cj["accepted"] = to_json(c.accepted);
        }
        cj["notes"] = c.notes;
        classifiers.push_back(std::move(cj));
    }
    j["classifiers"] = std::move(classifiers);
    j["quartiles"] = r.quartiles ? to_json(*r.quartiles) : Json(nullptr);
    Json reasons;
    reasons["status"] = r.reason_status;
    reasons["confusion"] = r.reason_confusion ? to_json(*r.reason_confusion) : Json(nullptr);
    reasons["metrics"] = r.reason_metrics ? to_json(*r.reason_metrics) : Json(nullptr);
    j["reason_identification"] = std::move(reasons);
    auto ranking = [](const std::vector<FeatureScore>& scores) {
        Json arr = Json::array();
        for (const auto& s : scores) arr.push_back({{"feature", s.feature}, {"score", s.score}});
        return arr;
    };
    j["rankings"] = {{"information_gain", ranking(r.information_gain)}, {"shapley", ranking(r.shapley)}};
    Json ablation = Json::array();
    for (const auto& step : r.ablation) {
        ablation.push_back({{"removed", step.removed_feature},
                            {"remaining", step.remaining},
                            {"rejected", to_json(step.rejected)},
                            {"accepted", to_json(step.accepted)}});
    }
    j["ablation"] = {{"ranking", r.ablation_ranking}, {"steps", std::move(ablation)}};
    return j;
}

std::string render_text(const EvaluationReport& r) {
    std::ostringstream os;
    os << "rows: " << r.n_rows << " (train " << r.n_train << ", test " << r.n_test << ")\n";
    for (const auto& w : r.warnings) os << "warning: " << w << '\n';
    os << "\nclassifier                   | rej P | rej R | rej F1| acc P | acc R | acc F1| accuracy\n";
    os << "-----------------------------+-------+-------+-------+-------+-------+-------+---------\n";
    for (const auto& c : r.classifiers) {
        std::string name = c.name;
        name.resize(28, ' ');
        os << name << " | ";
        if (c.error) {
            os << "error: " << *c.error << '\n';
            continue;
        }
        os << fmt_double(c.rejected.precision) << " | " << fmt_double(c.rejected.recall) << " | "
           << fmt_double(c.rejected.f1) << " | " << fmt_double(c.accepted.precision) << " | "
           << fmt_double(c.accepted.recall) << " | " << fmt_double(c.accepted.f1) << " | "
           << fmt_double(c.rejected.accuracy) << '\n';
        for (const auto& n : c.notes) os << "    note: " << n << '\n';
    }
    if (r.quartiles) {
        os << "\nedit-distance quartiles: " << fmt_double(r.quartiles->q1) << " / " << fmt_double(r.quartiles->q2)
           << " / " << fmt_double(r.quartiles->q3) << '\n';
    }
    os << "\nreason identification: " << r.reason_status << '\n';
    if (r.reason_confusion && r.reason_metrics) {
        const auto& cm = *r.reason_confusion;
        const auto& m = *r.reason_metrics;
        os << "  TP " << cm.tp << "  FP " << cm.fp << "  TN " << cm.tn << "  FN " << cm.fn << "\n  precision "
           << fmt_double(m.precision) << "  recall " << fmt_double(m.recall) << "  f1 " << fmt_double(m.f1)
           << "  accuracy " << fmt_double(m.accuracy) << '\n';
    }
    auto ranking = [&](const char* title, const std::vector<FeatureScore>& scores) {
        if (scores.empty()) return;
        os << '\n' << title << '\n';
        for (std::size_t i = 0; i < scores.size(); ++i) {
            std::string name = scores[i].feature;
            name.resize(24, ' ');
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6f", scores[i].score);
            os << "  " << (i + 1 < 10 ? " " : "") << i + 1 << ". " << name << ' ' << buf << '\n';
        }
    };
    ranking("information gain ranking (bits):", r.information_gain);
    ranking("shapley ranking (mean |phi|):", r.shapley);
    if (!r.ablation.empty()) {
        os << "\nablation (" << r.ablation_ranking << " ranking, lowest first):\n";
        for (const auto& s : r.ablation) {
            std::string name = s.removed_feature;
            name.resize(24, ' ');
            os << "  -" << name << " remaining " << (s.remaining < 10 ? " " : "") << s.remaining << "  accuracy "
               << fmt_double(s.rejected.accuracy) << "  rej F1 " << fmt_double(s.rejected.f1) << "  acc F1 "
               << fmt_double(s.accepted.f1) << '\n';
        }
    }
    return os.str();
}

}  // namespace editex
