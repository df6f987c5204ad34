#include "editex/features.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include "editex/error.hpp"
#include "editex/post_parser.hpp"
#include "editex/text.hpp"

namespace editex {
namespace {

bool is_word_byte(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           c >= 0x80;
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    while (b < s.size() && (s[b] == ' ' || s[b] == '\t' || s[b] == '\n' || s[b] == '\r')) ++b;
    std::size_t e = s.size();
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\n' || s[e - 1] == '\r')) --e;
    return std::string{s.substr(b, e - b)};
}

}  // namespace

KeywordList KeywordList::make(std::string name, std::vector<std::string> words) {
    std::vector<std::string> cleaned;
    for (auto& w : words) {
        std::string t = ascii_lower(trim(w));
        if (!t.empty()) cleaned.push_back(std::move(t));
    }
    std::sort(cleaned.begin(), cleaned.end());
    cleaned.erase(std::unique(cleaned.begin(), cleaned.end()), cleaned.end());
    if (cleaned.empty()) {
        throw Error(ErrorCode::InvalidArgument, "keyword list '" + name + "' is empty");
    }
    return KeywordList{std::move(name), std::move(cleaned)};
}

namespace keywords {

const KeywordList& status() {
    static const KeywordList list = KeywordList::make("status", {"edit", "update", "note", "ps"});
    return list;
}

const KeywordList& gratitude() {
    static const KeywordList list = KeywordList::make(
        "gratitude", {"welcome", "thanks", "sorry", "appreciated", "thank", "ty", "thx", "regards", "tia"});
    return list;
}

const KeywordList& greetings() {
    static const KeywordList list =
        KeywordList::make("greetings", {"hi", "hello", "hey", "dear", "greetings", "hai", "guys", "hii", "howdy",
                                        "hiya", "hay", "heya", "hola", "hihi", "salutations"});
    return list;
}

const KeywordList& deprecation() {
    static const KeywordList list = KeywordList::make("deprecation", {"deprecation", "deprecate", "old code"});
    return list;
}

const KeywordList& duplication() {
    static const KeywordList list = KeywordList::make("duplication", {"duplicate", "duplication"});
    return list;
}

}  // namespace keywords

std::vector<std::string> word_tokens(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && !is_word_byte(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t j = i;
        while (j < s.size() && is_word_byte(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.push_back(ascii_lower(s.substr(i, j - i)));
        i = j;
    }
    return out;
}

bool contains_phrase(std::span<const std::string> haystack, std::string_view phrase) {
    const std::vector<std::string> needle = word_tokens(phrase);
    if (needle.empty() || needle.size() > haystack.size()) return false;
    const auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end());
    return it != haystack.end();
}

KeywordList signature_keywords(std::string_view editor_name,
                               const std::optional<std::string>& other_party_name) {
    std::vector<std::string> names;
    auto add = [&](std::string_view raw) {
        const std::string full = ascii_lower(trim(raw));
        if (full.empty()) return;
        std::vector<std::string> parts;
        std::size_t i = 0;
        while (i < full.size()) {
            while (i < full.size() && full[i] == ' ') ++i;
            std::size_t j = i;
            while (j < full.size() && full[j] != ' ') ++j;
            if (j > i) parts.push_back(full.substr(i, j - i));
            i = j;
        }
        if (char_length(full) >= 3) names.push_back(full);
        if (parts.size() > 1) {
            if (char_length(parts.front()) >= 3) names.push_back(parts.front());
            if (char_length(parts.back()) >= 3) names.push_back(parts.back());
        }
    };
    add(editor_name);
    if (other_party_name) add(*other_party_name);

    KeywordList list{"signature", {}};
    for (auto& n : names) {
        if (!word_tokens(n).empty()) list.words.push_back(std::move(n));
    }
    std::sort(list.words.begin(), list.words.end());
    list.words.erase(std::unique(list.words.begin(), list.words.end()), list.words.end());
    return list;
}

bool detect_format(std::string_view plain_before, std::string_view plain_after, std::string_view tagged_before,
                   std::string_view tagged_after) {
    return !plain_before.empty() && !plain_after.empty() && levenshtein(plain_before, plain_after) == 0 &&
           levenshtein(tagged_before, tagged_after) != 0;
}

double modification_score(std::string_view plain_before, std::string_view plain_after) {
    if (plain_before.empty() || plain_after.empty()) return 0.0;
    const std::size_t d = levenshtein(plain_before, plain_after);
    if (d == 0) return 0.0;
    const std::size_t len = std::max<std::size_t>(char_length(plain_before), 1);
    return static_cast<double>(d) / static_cast<double>(len);
}

bool detect_deface(std::string_view plain_before, std::string_view plain_after) {
    return plain_before.empty() != plain_after.empty();
}

bool detect_complete_change(std::string_view plain_before, std::string_view plain_after) {
    if (plain_before.empty() || plain_after.empty()) return false;
    const std::size_t d = levenshtein(plain_before, plain_after);
    return d == char_length(plain_before) || d == char_length(plain_after);
}

bool detect_keyword_toggle(std::string_view before, std::string_view after, const KeywordList& list) {
    const std::vector<std::string> tb = word_tokens(before);
    const std::vector<std::string> ta = word_tokens(after);
    for (const std::string& kw : list.words) {
        if (contains_phrase(tb, kw) != contains_phrase(ta, kw)) return true;
    }
    return false;
}

bool detect_reference_modification(std::span<const std::string> links_before,
                                   std::span<const std::string> links_after) {
    const std::set<std::string_view> before(links_before.begin(), links_before.end());
    const std::set<std::string_view> after(links_after.begin(), links_after.end());
    return before != after;
}

std::int64_t compute_reputation(std::span<const ReputationEvent> events, std::int64_t as_of,
                                const ScoringTable& rules) {
    std::int64_t score = rules.base;
    for (const auto& e : events) {
        if (e.at > as_of) continue;
        switch (e.kind) {
            case ReputationEventKind::QuestionUpvote: score += rules.question_upvote; break;
            case ReputationEventKind::AnswerUpvote: score += rules.answer_upvote; break;
            case ReputationEventKind::AnswerAccepted: score += rules.answer_accepted; break;
            case ReputationEventKind::DownvoteReceived: score += rules.downvote_received; break;
            case ReputationEventKind::DownvoteCast: score += rules.downvote_cast; break;
            case ReputationEventKind::BountyWon:
                if (e.bounty_amount <= 0) {
                    throw Error(ErrorCode::InvalidArgument, "bounty amount must be positive");
                }
                score += e.bounty_amount;
                break;
            case ReputationEventKind::EditApproved: score += rules.edit_approved; break;
        }
    }
    return std::max(score, rules.floor);
}

EditViews parse_edit(const EditPair& pair) {
    return EditViews{parse_post(pair.body_before_html), parse_post(pair.body_after_html)};
}

FeatureVector extract_features(const EditPair& pair, const LinkCheckPolicy& link_policy) {
    return extract_features(pair, parse_edit(pair), link_policy);
}

FeatureVector extract_features(const EditPair& pair, const EditViews& views, const LinkCheckPolicy& link_policy) {
    const ParsedBody& b = views.before;
    const ParsedBody& a = views.after;

    const std::string text_b = normalize_text(b.text_plain);
    const std::string text_a = normalize_text(a.text_plain);
    const std::string code_b = normalize_text(b.code_plain);
    const std::string code_a = normalize_text(a.code_plain);

    FeatureVector fv;
    fv.text_format =
        detect_format(text_b, text_a, normalize_text(b.text_with_tags), normalize_text(a.text_with_tags));
    fv.code_format =
        detect_format(code_b, code_a, normalize_text(b.code_with_tags), normalize_text(a.code_with_tags));
    fv.text_modification = modification_score(text_b, text_a);
    fv.code_modification = modification_score(code_b, code_a);
    fv.deface_post = detect_deface(text_b, text_a) || detect_deface(code_b, code_a);
    fv.complete_change = detect_complete_change(text_b, text_a) || detect_complete_change(code_b, code_a);

    // Keyword features read the text channel with line breaks intact so
    // that words on adjacent lines stay separate.
    fv.status = detect_keyword_toggle(b.text_plain, a.text_plain, keywords::status());
    fv.gratitude = detect_keyword_toggle(b.text_plain, a.text_plain, keywords::gratitude());
    fv.greetings = detect_keyword_toggle(b.text_plain, a.text_plain, keywords::greetings());
    fv.deprecation_note = detect_keyword_toggle(b.text_plain, a.text_plain, keywords::deprecation());
    fv.duplication_note = detect_keyword_toggle(b.text_plain, a.text_plain, keywords::duplication());

    const KeywordList names = signature_keywords(pair.editor_name, pair.other_party_name);
    fv.signature = !names.words.empty() && detect_keyword_toggle(b.text_plain, a.text_plain, names);

    fv.reference_modification = detect_reference_modification(b.hyperlinks, a.hyperlinks);
    fv.inactive_hyperlink = check_inactive_hyperlinks(a.hyperlinks, link_policy);
    fv.reputation = pair.editor_reputation;
    return fv;
}

}  // namespace editex
