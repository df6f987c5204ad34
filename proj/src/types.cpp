#include "editex/types.hpp"

#include <algorithm>

#include "editex/error.hpp"

namespace editex {
namespace {

struct TagInfo {
    ReasonTag tag;
    std::string_view name;
    bool identifiable;
};

constexpr std::array<TagInfo, kReasonTagCount> kTags{{
    {ReasonTag::UndesiredTextFormatting, "undesired_text_formatting", true},
    {ReasonTag::UndesiredTextAddRemove, "undesired_text_add_remove", true},
    {ReasonTag::UndesiredTextChange, "undesired_text_change", false},
    {ReasonTag::IncorrectTextChange, "incorrect_text_change", false},
    {ReasonTag::UndesiredCodeFormatting, "undesired_code_formatting", true},
    {ReasonTag::UndesiredCodeAddRemove, "undesired_code_add_remove", true},
    {ReasonTag::UndesiredCodeChange, "undesired_code_change", false},
    {ReasonTag::IncorrectCodeChange, "incorrect_code_change", false},
    {ReasonTag::StatusUpdate, "status_update", true},
    {ReasonTag::EmotionAddRemove, "emotion_add_remove", false},
    {ReasonTag::GratitudeAddRemove, "gratitude_add_remove", true},
    {ReasonTag::GreetingsAddRemove, "greetings_add_remove", true},
    {ReasonTag::UndesiredReferenceModification, "undesired_reference_modification", true},
    {ReasonTag::SignatureAddRemove, "signature_add_remove", true},
    {ReasonTag::PartialAcceptance, "partial_acceptance", false},
    {ReasonTag::DeprecationNoteAddRemove, "deprecation_note_add_remove", true},
    {ReasonTag::DuplicationNoteAddRemove, "duplication_note_add_remove", true},
    {ReasonTag::CommunityTrust, "community_trust", true},
    {ReasonTag::Other, "other", true},
}};

constexpr std::array<std::pair<OtherKind, std::string_view>, 3> kOtherKinds{{
    {OtherKind::DefacePost, "deface_post"},
    {OtherKind::CompleteChange, "complete_change"},
    {OtherKind::Spam, "spam"},
}};

constexpr std::array<std::string_view, kFeatureCount> kFeatureNames{
    "text_format",
    "code_format",
    "text_modification",
    "code_modification",
    "deface_post",
    "complete_change",
    "status",
    "gratitude",
    "greetings",
    "reference_modification",
    "inactive_hyperlink",
    "signature",
    "deprecation_note",
    "duplication_note",
    "reputation",
};

}  // namespace

const std::array<ReasonTag, kReasonTagCount>& all_reason_tags() noexcept {
    static const auto tags = [] {
        std::array<ReasonTag, kReasonTagCount> out{};
        for (std::size_t i = 0; i < kTags.size(); ++i) out[i] = kTags[i].tag;
        return out;
    }();
    return tags;
}

bool machine_identifiable(ReasonTag tag) noexcept {
    return kTags[static_cast<std::size_t>(tag)].identifiable;
}

std::string reason_name(const RejectionReason& reason) {
    std::string name{kTags[static_cast<std::size_t>(reason.tag)].name};
    if (reason.tag == ReasonTag::Other && reason.other) {
        for (const auto& [kind, suffix] : kOtherKinds) {
            if (kind == *reason.other) {
                name += '_';
                name += suffix;
            }
        }
    }
    return name;
}

std::optional<RejectionReason> parse_reason(std::string_view name) {
    for (const auto& info : kTags) {
        if (info.name == name) return RejectionReason{info.tag};
    }
    constexpr std::string_view prefix = "other_";
    if (name.starts_with(prefix)) {
        const auto rest = name.substr(prefix.size());
        for (const auto& [kind, suffix] : kOtherKinds) {
            if (suffix == rest) return RejectionReason::other_reason(kind);
        }
    }
    return std::nullopt;
}

void canonicalize(std::vector<RejectionReason>& reasons) {
    std::sort(reasons.begin(), reasons.end());
    reasons.erase(std::unique(reasons.begin(), reasons.end()), reasons.end());
}

std::string_view verdict_name(Verdict v) noexcept {
    return v == Verdict::Rejected ? "rejected" : "accepted";
}

std::array<double, kFeatureCount> FeatureVector::to_array() const noexcept {
    auto b = [](bool v) { return v ? 1.0 : 0.0; };
    return {
        b(text_format),
        b(code_format),
        text_modification,
        code_modification,
        b(deface_post),
        b(complete_change),
        b(status),
        b(gratitude),
        b(greetings),
        b(reference_modification),
        b(inactive_hyperlink),
        b(signature),
        b(deprecation_note),
        b(duplication_note),
        static_cast<double>(reputation),
    };
}

FeatureVector FeatureVector::from_array(std::span<const double> v) {
    if (v.size() != kFeatureCount) {
        throw Error(ErrorCode::SchemaMismatch,
                    "feature vector needs " + std::to_string(kFeatureCount) + " values, got " +
                        std::to_string(v.size()));
    }
    auto b = [](double x) { return x >= 0.5; };
    FeatureVector fv;
    fv.text_format = b(v[0]);
    fv.code_format = b(v[1]);
    fv.text_modification = v[2];
    fv.code_modification = v[3];
    fv.deface_post = b(v[4]);
    fv.complete_change = b(v[5]);
    fv.status = b(v[6]);
    fv.gratitude = b(v[7]);
    fv.greetings = b(v[8]);
    fv.reference_modification = b(v[9]);
    fv.inactive_hyperlink = b(v[10]);
    fv.signature = b(v[11]);
    fv.deprecation_note = b(v[12]);
    fv.duplication_note = b(v[13]);
    fv.reputation = static_cast<std::int64_t>(v[14]);
    return fv;
}

const std::array<std::string_view, kFeatureCount>& feature_names() noexcept {
    return kFeatureNames;
}

}  // namespace editex
