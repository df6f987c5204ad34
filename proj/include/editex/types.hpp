#pragma once

// Domain types shared across the toolkit.

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace editex {

/// Rejection reason taxonomy. Declaration order is the canonical order used
/// for every reason list the toolkit emits.
enum class ReasonTag : std::uint8_t {
    UndesiredTextFormatting,
    UndesiredTextAddRemove,
    UndesiredTextChange,
    IncorrectTextChange,
    UndesiredCodeFormatting,
    UndesiredCodeAddRemove,
    UndesiredCodeChange,
    IncorrectCodeChange,
    StatusUpdate,
    EmotionAddRemove,
    GratitudeAddRemove,
    GreetingsAddRemove,
    UndesiredReferenceModification,
    SignatureAddRemove,
    PartialAcceptance,
    DeprecationNoteAddRemove,
    DuplicationNoteAddRemove,
    CommunityTrust,
    Other,
};

inline constexpr std::size_t kReasonTagCount = 19;

/// Refinement carried only by ReasonTag::Other.
enum class OtherKind : std::uint8_t { DefacePost, CompleteChange, Spam };

struct RejectionReason {
    ReasonTag tag{ReasonTag::Other};
    std::optional<OtherKind> other;

    RejectionReason() = default;
    constexpr RejectionReason(ReasonTag t) : tag(t) {}  // NOLINT(google-explicit-constructor)
    constexpr RejectionReason(ReasonTag t, OtherKind kind) : tag(t), other(kind) {}

    static constexpr RejectionReason other_reason(OtherKind kind) {
        return RejectionReason{ReasonTag::Other, kind};
    }

    friend constexpr auto operator<=>(const RejectionReason&, const RejectionReason&) = default;
    friend constexpr bool operator==(const RejectionReason&, const RejectionReason&) = default;
};

/// All 19 tags in canonical order.
const std::array<ReasonTag, kReasonTagCount>& all_reason_tags() noexcept;

/// True for the tags the reason classifier is able to emit.
bool machine_identifiable(ReasonTag tag) noexcept;

/// Wire name, e.g. "gratitude_add_remove", "other_deface_post".
std::string reason_name(const RejectionReason& reason);
std::optional<RejectionReason> parse_reason(std::string_view name);

/// Sorts into canonical order and drops duplicates.
void canonicalize(std::vector<RejectionReason>& reasons);

enum class Verdict : std::uint8_t { Accepted = 0, Rejected = 1 };

std::string_view verdict_name(Verdict v) noexcept;

/// One suggested edit: the post body before and after, plus who made it.
struct EditPair {
    std::string id;
    std::int64_t timestamp = 0;  // UTC seconds since epoch
    std::string body_before_html;
    std::string body_after_html;
    std::string editor_name;
    std::optional<std::string> other_party_name;
    std::int64_t editor_reputation = 0;

    friend bool operator==(const EditPair&, const EditPair&) = default;
};

struct ParsedBody {
    std::string text_with_tags;
    std::string text_plain;
    std::string code_with_tags;
    std::string code_plain;
    std::vector<std::string> hyperlinks;
    std::string diff_added_text;
    std::string diff_removed_text;
    std::string diff_added_code;
    std::string diff_removed_code;

    friend bool operator==(const ParsedBody&, const ParsedBody&) = default;
};

inline constexpr std::size_t kFeatureCount = 15;

/// The predictor's fifteen features. Field order is the canonical column
/// order (see feature_names()).
struct FeatureVector {
    bool text_format = false;
    bool code_format = false;
    double text_modification = 0.0;
    double code_modification = 0.0;
    bool deface_post = false;
    bool complete_change = false;
    bool status = false;
    bool gratitude = false;
    bool greetings = false;
    bool reference_modification = false;
    bool inactive_hyperlink = false;
    bool signature = false;
    bool deprecation_note = false;
    bool duplication_note = false;
    std::int64_t reputation = 0;

    /// Numeric encoding in canonical order; booleans become 0.0 / 1.0.
    std::array<double, kFeatureCount> to_array() const noexcept;
    static FeatureVector from_array(std::span<const double> values);

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

const std::array<std::string_view, kFeatureCount>& feature_names() noexcept;

struct LabeledExample {
    FeatureVector features;
    Verdict label = Verdict::Accepted;
    std::vector<RejectionReason> reasons;
    std::int64_t timestamp = 0;

    friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

struct EditDecision {
    Verdict decision = Verdict::Accepted;
    double score = 0.0;
    std::vector<RejectionReason> reasons;
    FeatureVector feature_vector;

    friend bool operator==(const EditDecision&, const EditDecision&) = default;
};

}  // namespace editex
