#include "editex/reasons.hpp"

#include <algorithm>
#include <string>

#include "editex/error.hpp"
#include "editex/post_parser.hpp"
#include "editex/text.hpp"

namespace editex {
namespace {

double ratio(std::size_t part, std::size_t total) {
    return static_cast<double>(part) / static_cast<double>(std::max<std::size_t>(total, 1));
}

struct ChannelDiff {
    std::size_t added = 0;
    std::size_t removed = 0;
    std::size_t total = 0;
};

ChannelDiff diff_channel(std::string_view before, std::string_view after) {
    const std::size_t lb = char_length(before);
    const std::size_t la = char_length(after);
    const std::size_t common = lcs_length(before, after);
    return {la - common, lb - common, lb + la - common};
}

constexpr std::array<std::string_view, kLengthTaskCount> kTaskNames{
    "added_text_ratio", "removed_text_ratio", "added_code_ratio", "removed_code_ratio"};

}  // namespace

LengthFeatures length_features_from_diff(std::string_view revision_html) {
    const ParsedBody body = parse_post(revision_html);
    const std::size_t text_total = char_length(body.text_plain);
    const std::size_t code_total = char_length(body.code_plain);
    LengthFeatures out;
    out.added_text_ratio = ratio(char_length(body.diff_added_text), text_total);
    out.removed_text_ratio = ratio(char_length(body.diff_removed_text), text_total);
    out.added_code_ratio = ratio(char_length(body.diff_added_code), code_total);
    out.removed_code_ratio = ratio(char_length(body.diff_removed_code), code_total);
    return out;
}

LengthFeatures length_features(const ParsedBody& before, const ParsedBody& after) {
    const ChannelDiff text = diff_channel(before.text_plain, after.text_plain);
    const ChannelDiff code = diff_channel(before.code_plain, after.code_plain);
    LengthFeatures out;
    out.added_text_ratio = ratio(text.added, text.total);
    out.removed_text_ratio = ratio(text.removed, text.total);
    out.added_code_ratio = ratio(code.added, code.total);
    out.removed_code_ratio = ratio(code.removed, code.total);
    return out;
}

std::vector<RejectionReason> identify_rule_reasons(const FeatureVector& fv) {
    std::vector<RejectionReason> out;
    if (fv.text_format) out.emplace_back(ReasonTag::UndesiredTextFormatting);
    if (fv.code_format) out.emplace_back(ReasonTag::UndesiredCodeFormatting);
    if (fv.complete_change) out.push_back(RejectionReason::other_reason(OtherKind::CompleteChange));
    if (fv.deface_post) out.push_back(RejectionReason::other_reason(OtherKind::DefacePost));
    if (fv.gratitude) out.emplace_back(ReasonTag::GratitudeAddRemove);
    if (fv.greetings) out.emplace_back(ReasonTag::GreetingsAddRemove);
    if (fv.signature) out.emplace_back(ReasonTag::SignatureAddRemove);
    if (fv.deprecation_note) out.emplace_back(ReasonTag::DeprecationNoteAddRemove);
    if (fv.duplication_note) out.emplace_back(ReasonTag::DuplicationNoteAddRemove);
    if (fv.reference_modification || fv.inactive_hyperlink) {
        out.emplace_back(ReasonTag::UndesiredReferenceModification);
    }
    if (fv.status) out.emplace_back(ReasonTag::StatusUpdate);
    canonicalize(out);
    return out;
}

ReasonModels train_reason_models(std::span<const LengthExample> labeled, const ml::ModelParams& params,
                                 std::uint64_t seed, int smote_k) {
    if (labeled.empty()) throw Error(ErrorCode::EmptyDataset, "reason models: no labeled examples");
    ml::ModelParams rf = params;
    rf.algo = ml::Algo::RandomForest;

    ReasonModels out;
    for (std::size_t task = 0; task < kLengthTaskCount; ++task) {
        ml::Dataset data(std::vector<std::string>{std::string(kTaskNames[task])});
        for (const auto& ex : labeled) {
            const double v = ex.lengths.to_array()[task];
            data.add_row(std::span<const double>(&v, 1), ex.undesired[task] ? 1 : 0);
        }
        const std::size_t ones = data.count(1);
        const std::size_t minority = std::min(ones, data.size() - ones);
        ml::Dataset balanced = data;
        if (minority >= 2) {
            const int k = std::min<int>(smote_k, static_cast<int>(minority) - 1);
            balanced = ml::smote(data, k, seed + task);
        }
        rf.seed = seed + task;
        out.models[task] = ml::train_random_forest(balanced, rf);
    }
    return out;
}

std::vector<RejectionReason> identify_reasons(const FeatureVector& fv, const LengthFeatures& lengths,
                                              const ReasonModels* models, const ReasonConfig& config) {
    std::vector<RejectionReason> out = identify_rule_reasons(fv);

    const auto ratios = lengths.to_array();
    std::array<bool, kLengthTaskCount> fired{};
    for (std::size_t task = 0; task < kLengthTaskCount; ++task) {
        if (models) {
            const double v = ratios[task];
            fired[task] = ml::predict(models->models[task], std::span<const double>(&v, 1)).label == 1;
        } else {
            fired[task] = ratios[task] >= config.fallback_ratio;
        }
    }
    if (fired[0] || fired[1]) out.emplace_back(ReasonTag::UndesiredTextAddRemove);
    if (fired[2] || fired[3]) out.emplace_back(ReasonTag::UndesiredCodeAddRemove);

    if (out.empty() && fv.reputation < config.reputation_threshold) {
        out.emplace_back(ReasonTag::CommunityTrust);
    }
    canonicalize(out);
    return out;
}

}  // namespace editex
