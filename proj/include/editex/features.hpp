#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "editex/types.hpp"

namespace editex {

struct KeywordList {
    std::string name;
    std::vector<std::string> words;  // lowercase; may be multi-word

    /// Lowercases, trims and de-duplicates; throws InvalidArgument when empty.
    static KeywordList make(std::string name, std::vector<std::string> words);
};

namespace keywords {
const KeywordList& status();
const KeywordList& gratitude();
const KeywordList& greetings();
const KeywordList& deprecation();
const KeywordList& duplication();
}  // namespace keywords

/// Lowercased word tokens; a word is a maximal run of letters, digits, '_'
/// or non-ASCII characters.
std::vector<std::string> word_tokens(std::string_view s);

/// Whole-word, case-insensitive phrase match.
bool contains_phrase(std::span<const std::string> haystack_tokens, std::string_view phrase);

/// Full name, first part and last part of each user, dropping tokens
/// shorter than three characters.
KeywordList signature_keywords(std::string_view editor_name,
                               const std::optional<std::string>& other_party_name);

bool detect_format(std::string_view plain_before, std::string_view plain_after,
                   std::string_view tagged_before, std::string_view tagged_after);

/// Edit distance normalised by the length of the before side; 0 unless both
/// sides are non-empty and differ.
double modification_score(std::string_view plain_before, std::string_view plain_after);

bool detect_deface(std::string_view plain_before, std::string_view plain_after);

bool detect_complete_change(std::string_view plain_before, std::string_view plain_after);

/// True iff some keyword matches exactly one side.
bool detect_keyword_toggle(std::string_view before, std::string_view after, const KeywordList& list);

bool detect_reference_modification(std::span<const std::string> links_before,
                                   std::span<const std::string> links_after);

// Link checking ------------------------------------------------------------

struct LinkCheckDisabled {};

struct LinkCheckNetwork {
    double timeout_seconds = 5.0;
    int max_parallel = 4;
    /// Wall-clock cap across all links of one call; 0 means none. Links not
    /// checked before the budget runs out count as active.
    double budget_seconds = 0.0;
};

using LinkCheckPolicy = std::variant<LinkCheckDisabled, LinkCheckNetwork>;

bool check_inactive_hyperlinks(std::span<const std::string> links_after, const LinkCheckPolicy& policy);

/// Drops cached link results (tests use this between stub servers).
void clear_link_cache();

// Reputation ---------------------------------------------------------------

enum class ReputationEventKind : std::uint8_t {
    QuestionUpvote,
    AnswerUpvote,
    AnswerAccepted,
    DownvoteReceived,
    DownvoteCast,
    BountyWon,
    EditApproved,
};

struct ReputationEvent {
    ReputationEventKind kind = ReputationEventKind::QuestionUpvote;
    std::int64_t at = 0;          // UTC seconds
    std::int64_t bounty_amount = 0;  // BountyWon only, > 0
};

struct ScoringTable {
    std::int64_t question_upvote = 5;
    std::int64_t answer_upvote = 10;
    std::int64_t answer_accepted = 15;
    std::int64_t downvote_received = -2;
    std::int64_t downvote_cast = -1;
    std::int64_t edit_approved = 2;
    std::int64_t base = 1;
    std::int64_t floor = 1;

    friend bool operator==(const ScoringTable&, const ScoringTable&) = default;
};

std::int64_t compute_reputation(std::span<const ReputationEvent> events, std::int64_t as_of,
                                const ScoringTable& rules = {});

// Extraction ---------------------------------------------------------------

/// The parsed and normalised views extract_features works from; exposed so
/// the reason classifier can reuse them.
struct EditViews {
    ParsedBody before;
    ParsedBody after;
};

EditViews parse_edit(const EditPair& pair);

FeatureVector extract_features(const EditPair& pair, const LinkCheckPolicy& link_policy);
FeatureVector extract_features(const EditPair& pair, const EditViews& views,
                               const LinkCheckPolicy& link_policy);

}  // namespace editex
