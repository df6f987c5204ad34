#pragma once

// Structured-document encodings of the domain types. Key order is fixed so
// that documents (and the checksums over them) are reproducible.

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "editex/evaluation.hpp"
#include "editex/features.hpp"
#include "editex/ml.hpp"
#include "editex/reasons.hpp"
#include "editex/types.hpp"

namespace editex {

using Json = nlohmann::ordered_json;

/// "2021-03-04T05:06:07Z" <-> seconds since the epoch. Accepts fractional
/// seconds (truncated) and numeric offsets.
std::int64_t parse_timestamp(std::string_view iso);
std::string format_timestamp(std::int64_t seconds);

Json to_json(const RejectionReason& r);
RejectionReason reason_from_json(const Json& j);

Json to_json(const EditPair& p);
EditPair edit_pair_from_json(const Json& j);

Json to_json(const FeatureVector& fv);
FeatureVector feature_vector_from_json(const Json& j);

Json to_json(const LabeledExample& ex);
LabeledExample labeled_example_from_json(const Json& j);

Json to_json(const EditDecision& d);
EditDecision edit_decision_from_json(const Json& j);

Json to_json(const ParsedBody& b);

Json to_json(const ml::ModelParams& p);
ml::ModelParams model_params_from_json(const Json& j);

Json to_json(const ml::TrainedModel& m);
ml::TrainedModel trained_model_from_json(const Json& j);

Json to_json(const ScoringTable& t);
ScoringTable scoring_table_from_json(const Json& j);

Json to_json(const Quartiles& q);
Quartiles quartiles_from_json(const Json& j);

Json to_json(const ReasonConfig& c);
ReasonConfig reason_config_from_json(const Json& j);

Json to_json(const ConfusionMatrix& cm);
Json to_json(const Metrics& m);
Json to_json(const LengthFeatures& l);

}  // namespace editex
