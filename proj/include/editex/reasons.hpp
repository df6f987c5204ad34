#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "editex/ml.hpp"
#include "editex/types.hpp"

namespace editex {

/// Share of each channel that an edit added or removed.
struct LengthFeatures {
    double added_text_ratio = 0.0;
    double removed_text_ratio = 0.0;
    double added_code_ratio = 0.0;
    double removed_code_ratio = 0.0;

    std::array<double, 4> to_array() const noexcept {
        return {added_text_ratio, removed_text_ratio, added_code_ratio, removed_code_ratio};
    }
    friend bool operator==(const LengthFeatures&, const LengthFeatures&) = default;
};

/// Ratios from a rendered revision diff: span characters over the plain
/// length of the same channel in the diff.
LengthFeatures length_features_from_diff(std::string_view revision_html);

/// Ratios from a before/after pair, using a longest-common-subsequence
/// alignment per channel: added = |after| - lcs, removed = |before| - lcs,
/// channel total = |before| + |after| - lcs (the size of the merged diff).
LengthFeatures length_features(const ParsedBody& before, const ParsedBody& after);

/// Sub-model order inside ReasonModels.
enum class LengthTask : std::uint8_t { TextAdd, TextRemove, CodeAdd, CodeRemove };
inline constexpr std::size_t kLengthTaskCount = 4;

struct ReasonModels {
    std::array<ml::TrainedModel, kLengthTaskCount> models;

    friend bool operator==(const ReasonModels&, const ReasonModels&) = default;
};

struct LengthExample {
    LengthFeatures lengths;
    std::array<bool, kLengthTaskCount> undesired{};  // indexed by LengthTask
};

struct ReasonConfig {
    std::int64_t reputation_threshold = 2000;
    /// Used when no ReasonModels are available.
    double fallback_ratio = 0.35;
    int smote_k = 5;

    friend bool operator==(const ReasonConfig&, const ReasonConfig&) = default;
};

std::vector<RejectionReason> identify_rule_reasons(const FeatureVector& fv);

/// Four single-feature random forests, each on SMOTE-balanced data.
ReasonModels train_reason_models(std::span<const LengthExample> labeled, const ml::ModelParams& params,
                                 std::uint64_t seed, int smote_k = 5);

/// Canonically ordered reasons for an edit already predicted as rejected.
std::vector<RejectionReason> identify_reasons(const FeatureVector& fv, const LengthFeatures& lengths,
                                              const ReasonModels* models, const ReasonConfig& config = {});

}  // namespace editex
