#pragma once

// Ingestion, chronological splitting, model bundles and their persistence,
// and the end-to-end experiment driver.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "editex/evaluation.hpp"
#include "editex/features.hpp"
#include "editex/json_io.hpp"
#include "editex/ml.hpp"
#include "editex/reasons.hpp"
#include "editex/types.hpp"

namespace editex {

// Ingestion -----------------------------------------------------------------

enum class DataFormat : std::uint8_t { Jsonl, Csv };

/// Picks the format from the file extension (.csv, otherwise jsonl).
DataFormat format_for(const std::filesystem::path& path);

struct IngestRecord {
    EditPair pair;
    std::optional<Verdict> label;
    /// Present when the row carried a reasons field (possibly empty).
    std::optional<std::vector<RejectionReason>> reasons;
    std::size_t line = 0;  // 1-based
};

struct IngestError {
    std::size_t line = 0;
    std::string message;
};

struct IngestResult {
    std::vector<IngestRecord> records;
    std::vector<IngestError> errors;
};

/// Parses every row; bad rows are reported, not fatal, unless no row survives.
IngestResult ingest(const std::filesystem::path& path, DataFormat format);
IngestResult ingest_text(std::string_view content, DataFormat format);

// Splitting -----------------------------------------------------------------

template <typename T>
struct Split {
    std::vector<T> train;
    std::vector<T> test;
};

/// Stable sort by (timestamp, id); the first floor(n * fraction) rows train.
Split<IngestRecord> chronological_split(std::vector<IngestRecord> records, double train_fraction = 0.7);

// Featurisation -------------------------------------------------------------

struct FeaturizedRecord {
    IngestRecord record;
    FeatureVector features;
    LengthFeatures lengths;
    double edit_distance = 0.0;  // whole-body normalised Levenshtein
};

/// Whole-body edit distance used for the trivial/small/medium/major buckets.
double body_edit_distance(const ParsedBody& before, const ParsedBody& after);

/// Results keep input order regardless of internal parallelism.
std::vector<FeaturizedRecord> featurize(std::span<const IngestRecord> records, const LinkCheckPolicy& policy);

ml::Dataset to_dataset(std::span<const FeaturizedRecord> rows);

// Model bundles ---------------------------------------------------------------

inline constexpr int kModelSchemaVersion = 1;

/// Everything the predictor needs at inference time.
struct ModelBundle {
    ml::TrainedModel predictor;
    double decision_threshold = 0.5;
    std::optional<Quartiles> quartiles;
    std::optional<ReasonModels> reason_models;
    ReasonConfig reason_config;
    ScoringTable scoring;

    friend bool operator==(const ModelBundle&, const ModelBundle&) = default;
};

/// Trains the predictor, quartiles and (when labels allow) reason models.
ModelBundle fit_bundle(std::span<const FeaturizedRecord> train, const ml::ModelParams& params,
                       std::vector<std::string>* notes = nullptr);

std::string serialize_model(const ModelBundle& bundle);
ModelBundle deserialize_model(std::string_view document);

void save_model(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_model(const std::filesystem::path& path);

/// Feature extraction, prediction and (for rejections) reason
/// identification for one edit. The service answers with exactly this.
EditDecision predict_edit(const ModelBundle& bundle, const EditPair& pair, const LinkCheckPolicy& policy);

// Reports ---------------------------------------------------------------------

struct ClassifierEvaluation {
    std::string name;
    ConfusionMatrix confusion;
    Metrics rejected;  // rejected as the positive class
    Metrics accepted;  // accepted as the positive class
    std::vector<std::string> notes;
    std::optional<std::string> error;
};

struct AblationStep {
    std::string removed_feature;
    std::size_t remaining = 0;
    Metrics rejected;
    Metrics accepted;
};

struct EvaluationReport {
    std::size_t n_rows = 0;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::size_t ingest_errors = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;
    std::vector<ClassifierEvaluation> classifiers;
    std::optional<Quartiles> quartiles;

    std::string reason_status;  // "ok" or "skipped: ..."
    std::optional<ConfusionMatrix> reason_confusion;
    std::optional<Metrics> reason_metrics;

    std::vector<FeatureScore> information_gain;
    std::vector<FeatureScore> shapley;
    std::string ablation_ranking;  // which ranking drove the ablation
    std::vector<AblationStep> ablation;
};

Json to_json(const EvaluationReport& report);
std::string render_text(const EvaluationReport& report);

enum class RankingMethod : std::uint8_t { Shapley, InformationGain };

struct ExperimentOptions {
    std::uint64_t seed = 42;
    double train_fraction = 0.7;
    LinkCheckPolicy link_policy = LinkCheckDisabled{};
    int n_trees = 100;
    int shapley_permutations = 200;
    std::size_t shapley_background = 100;
    std::size_t shapley_instances = 200;
    int information_gain_bins = 10;
    RankingMethod ablation_ranking = RankingMethod::Shapley;
    bool run_ablation = true;
};

EvaluationReport run_experiment(const std::filesystem::path& data_path, const ExperimentOptions& options = {});
EvaluationReport run_experiment(const IngestResult& data, const ExperimentOptions& options = {});

/// Scores an existing bundle on labelled records.
EvaluationReport evaluate_bundle(const ModelBundle& bundle, std::span<const IngestRecord> records,
                                 const LinkCheckPolicy& policy);

}  // namespace editex
