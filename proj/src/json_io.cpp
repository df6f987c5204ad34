#include "editex/json_io.hpp"

#include <array>
#include <chrono>
#include <cstdio>

#include "editex/error.hpp"

namespace editex {
namespace {

// Days since 1970-01-01 for a proleptic Gregorian date (H. Hinnant).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y += m <= 2;
}

[[noreturn]] void bad_timestamp(std::string_view iso) {
    throw Error(ErrorCode::InvalidArgument, "invalid ISO-8601 timestamp '" + std::string(iso) + "'");
}

int digits(std::string_view s, std::size_t at, std::size_t n, std::string_view whole) {
    if (at + n > s.size()) bad_timestamp(whole);
    int v = 0;
    for (std::size_t i = at; i < at + n; ++i) {
        if (s[i] < '0' || s[i] > '9') bad_timestamp(whole);
        v = v * 10 + (s[i] - '0');
    }
    return v;
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
    auto it = j.find(key);
    return it == j.end() || it->is_null() ? fallback : it->get<T>();
}

Json tree_to_json(const ml::Tree& tree, int i) {
    const ml::TreeNode& n = tree.nodes[static_cast<std::size_t>(i)];
    Json j;
    if (n.is_leaf()) {
        j["counts"] = {n.count0, n.count1};
        j["value"] = n.value;
    } else {
        j["feature_index"] = n.feature;
        j["threshold"] = n.threshold;
        j["counts"] = {n.count0, n.count1};
        j["value"] = n.value;
        j["left"] = tree_to_json(tree, n.left);
        j["right"] = tree_to_json(tree, n.right);
    }
    return j;
}

int tree_from_json(const Json& j, ml::Tree& tree, int depth) {
    if (depth > 256) throw Error(ErrorCode::CorruptModel, "tree nesting too deep");
    const int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const auto& counts = j.at("counts");
    tree.nodes[idx].count0 = counts.at(0).get<std::uint64_t>();
    tree.nodes[idx].count1 = counts.at(1).get<std::uint64_t>();
    tree.nodes[idx].value = j.at("value").get<double>();
    if (j.contains("feature_index")) {
        const int feature = j.at("feature_index").get<int>();
        const double threshold = j.at("threshold").get<double>();
        const int l = tree_from_json(j.at("left"), tree, depth + 1);
        const int r = tree_from_json(j.at("right"), tree, depth + 1);
        ml::TreeNode& n = tree.nodes[idx];
        n.feature = feature;
        n.threshold = threshold;
        n.left = l;
        n.right = r;
    }
    return idx;
}

}  // namespace

std::int64_t parse_timestamp(std::string_view iso) {
    // YYYY-MM-DD[T ]HH:MM:SS[.fff][Z|+HH:MM|-HH:MM]
    if (iso.size() < 19 || iso[4] != '-' || iso[7] != '-' || (iso[10] != 'T' && iso[10] != ' ') ||
        iso[13] != ':' || iso[16] != ':') {
        bad_timestamp(iso);
    }
    const int y = digits(iso, 0, 4, iso);
    const int mo = digits(iso, 5, 2, iso);
    const int d = digits(iso, 8, 2, iso);
    const int h = digits(iso, 11, 2, iso);
    const int mi = digits(iso, 14, 2, iso);
    const int s = digits(iso, 17, 2, iso);
    if (mo < 1 || mo > 12 || d < 1 || h > 23 || mi > 59 || s > 60) bad_timestamp(iso);
    const std::chrono::year_month_day date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                                           std::chrono::day{static_cast<unsigned>(d)}};
    if (!date.ok()) bad_timestamp(iso);
    std::size_t i = 19;
    if (i < iso.size() && iso[i] == '.') {
        ++i;
        const std::size_t start = i;
        while (i < iso.size() && iso[i] >= '0' && iso[i] <= '9') ++i;
        if (i == start) bad_timestamp(iso);
    }
    std::int64_t offset = 0;
    if (i < iso.size()) {
        if (iso[i] == 'Z' && i + 1 == iso.size()) {
            ++i;
        } else if ((iso[i] == '+' || iso[i] == '-') && iso.size() == i + 6 && iso[i + 3] == ':') {
            const int oh = digits(iso, i + 1, 2, iso);
            const int om = digits(iso, i + 4, 2, iso);
            offset = (iso[i] == '+' ? 1 : -1) * (oh * 3600 + om * 60);
            i += 6;
        } else {
            bad_timestamp(iso);
        }
    }
    const std::int64_t days = days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
    return days * 86400 + h * 3600 + mi * 60 + s - offset;
}

std::string format_timestamp(std::int64_t seconds) {
    std::int64_t days = seconds / 86400;
    std::int64_t rem = seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    std::int64_t y = 0;
    unsigned m = 0;
    unsigned d = 0;
    civil_from_days(days, y, m, d);
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<long long>(y), m, d,
                  static_cast<long long>(rem / 3600), static_cast<long long>((rem / 60) % 60),
                  static_cast<long long>(rem % 60));
    return buf.data();
}

Json to_json(const RejectionReason& r) { return reason_name(r); }

RejectionReason reason_from_json(const Json& j) {
    const auto name = j.get<std::string>();
    const auto r = parse_reason(name);
    if (!r) throw Error(ErrorCode::InvalidArgument, "unknown rejection reason '" + name + "'");
    return *r;
}

Json to_json(const EditPair& p) {
    Json j;
    j["id"] = p.id;
    j["timestamp"] = format_timestamp(p.timestamp);
    j["body_before_html"] = p.body_before_html;
    j["body_after_html"] = p.body_after_html;
    j["editor_name"] = p.editor_name;
    j["other_party_name"] = p.other_party_name ? Json(*p.other_party_name) : Json(nullptr);
    j["editor_reputation"] = p.editor_reputation;
    return j;
}

EditPair edit_pair_from_json(const Json& j) {
    EditPair p;
    p.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
    p.timestamp = parse_timestamp(j.at("timestamp").get<std::string>());
    p.body_before_html = get_or<std::string>(j, "body_before_html", "");
    p.body_after_html = get_or<std::string>(j, "body_after_html", "");
    if (p.body_before_html.empty() && p.body_after_html.empty()) {
        throw Error(ErrorCode::InvalidArgument, "body_before_html and body_after_html are both empty");
    }
    p.editor_name = get_or<std::string>(j, "editor_name", "");
    if (auto it = j.find("other_party_name"); it != j.end() && !it->is_null()) {
        p.other_party_name = it->get<std::string>();
    }
    p.editor_reputation = get_or<std::int64_t>(j, "editor_reputation", 0);
    if (p.editor_reputation < 0) throw Error(ErrorCode::InvalidArgument, "editor_reputation must be non-negative");
    return p;
}

Json to_json(const FeatureVector& fv) {
    Json j;
    j["text_format"] = fv.text_format;
    j["code_format"] = fv.code_format;
    j["text_modification"] = fv.text_modification;
    j["code_modification"] = fv.code_modification;
    j["deface_post"] = fv.deface_post;
    j["complete_change"] = fv.complete_change;
    j["status"] = fv.status;
    j["gratitude"] = fv.gratitude;
    j["greetings"] = fv.greetings;
    j["reference_modification"] = fv.reference_modification;
    j["inactive_hyperlink"] = fv.inactive_hyperlink;
    j["signature"] = fv.signature;
    j["deprecation_note"] = fv.deprecation_note;
    j["duplication_note"] = fv.duplication_note;
    j["reputation"] = fv.reputation;
    return j;
}

FeatureVector feature_vector_from_json(const Json& j) {
    FeatureVector fv;
    fv.text_format = j.at("text_format").get<bool>();
    fv.code_format = j.at("code_format").get<bool>();
    fv.text_modification = j.at("text_modification").get<double>();
    fv.code_modification = j.at("code_modification").get<double>();
    fv.deface_post = j.at("deface_post").get<bool>();
    fv.complete_change = j.at("complete_change").get<bool>();
    fv.status = j.at("status").get<bool>();
    fv.gratitude = j.at("gratitude").get<bool>();
    fv.greetings = j.at("greetings").get<bool>();
    fv.reference_modification = j.at("reference_modification").get<bool>();
    fv.inactive_hyperlink = j.at("inactive_hyperlink").get<bool>();
    fv.signature = j.at("signature").get<bool>();
    fv.deprecation_note = j.at("deprecation_note").get<bool>();
    fv.duplication_note = j.at("duplication_note").get<bool>();
    fv.reputation = j.at("reputation").get<std::int64_t>();
    return fv;
}

Json to_json(const LabeledExample& ex) {
    Json j;
    j["features"] = to_json(ex.features);
    j["label"] = verdict_name(ex.label);
    j["reasons"] = Json::array();
    for (const auto& r : ex.reasons) j["reasons"].push_back(to_json(r));
    j["timestamp"] = format_timestamp(ex.timestamp);
    return j;
}

LabeledExample labeled_example_from_json(const Json& j) {
    LabeledExample ex;
    ex.features = feature_vector_from_json(j.at("features"));
    const auto label = j.at("label").get<std::string>();
    if (label != "rejected" && label != "accepted") {
        throw Error(ErrorCode::InvalidArgument, "label must be 'rejected' or 'accepted'");
    }
    ex.label = label == "rejected" ? Verdict::Rejected : Verdict::Accepted;
    for (const auto& r : j.at("reasons")) ex.reasons.push_back(reason_from_json(r));
    if (ex.label == Verdict::Accepted && !ex.reasons.empty()) {
        throw Error(ErrorCode::InvalidArgument, "accepted examples cannot carry rejection reasons");
    }
    ex.timestamp = parse_timestamp(j.at("timestamp").get<std::string>());
    return ex;
}

Json to_json(const EditDecision& d) {
    Json j;
    j["decision"] = verdict_name(d.decision);
    j["score"] = d.score;
    j["reasons"] = Json::array();
    for (const auto& r : d.reasons) j["reasons"].push_back(to_json(r));
    j["features"] = to_json(d.feature_vector);
    return j;
}

EditDecision edit_decision_from_json(const Json& j) {
    EditDecision d;
    d.decision = j.at("decision").get<std::string>() == "rejected" ? Verdict::Rejected : Verdict::Accepted;
    d.score = j.at("score").get<double>();
    for (const auto& r : j.at("reasons")) {
        d.reasons.push_back(r.is_object() ? reason_from_json(r.at("tag")) : reason_from_json(r));
    }
    d.feature_vector = feature_vector_from_json(j.at("features"));
    return d;
}

Json to_json(const ParsedBody& b) {
    Json j;
    j["text_with_tags"] = b.text_with_tags;
    j["text_plain"] = b.text_plain;
    j["code_with_tags"] = b.code_with_tags;
    j["code_plain"] = b.code_plain;
    j["hyperlinks"] = b.hyperlinks;
    j["diff_added_text"] = b.diff_added_text;
    j["diff_removed_text"] = b.diff_removed_text;
    j["diff_added_code"] = b.diff_added_code;
    j["diff_removed_code"] = b.diff_removed_code;
    return j;
}

Json to_json(const ml::ModelParams& p) {
    Json j;
    j["algo"] = ml::algo_name(p.algo);
    j["max_depth"] = p.max_depth;
    j["n_trees"] = p.n_trees;
    j["k_neighbors"] = p.k_neighbors;
    j["learning_rate"] = p.learning_rate;
    j["min_samples_split"] = p.min_samples_split;
    j["l2_lambda"] = p.l2_lambda;
    j["seed"] = p.seed;
    return j;
}

ml::ModelParams model_params_from_json(const Json& j) {
    ml::ModelParams p;
    const auto algo = ml::parse_algo(j.at("algo").get<std::string>());
    if (!algo) throw Error(ErrorCode::CorruptModel, "unknown algorithm " + j.at("algo").dump());
    p.algo = *algo;
    p.max_depth = j.at("max_depth").get<int>();
    p.n_trees = j.at("n_trees").get<int>();
    p.k_neighbors = j.at("k_neighbors").get<int>();
    p.learning_rate = j.at("learning_rate").get<double>();
    p.min_samples_split = j.at("min_samples_split").get<int>();
    p.l2_lambda = j.at("l2_lambda").get<double>();
    p.seed = j.at("seed").get<std::uint64_t>();
    return p;
}

Json to_json(const ml::TrainedModel& m) {
    Json j;
    j["algo"] = ml::algo_name(m.algo);
    j["params"] = to_json(m.params);
    j["feature_names"] = m.feature_names;
    j["constant_class"] = m.constant_class ? Json(*m.constant_class) : Json(nullptr);
    j["warnings"] = m.warnings;
    switch (m.algo) {
        case ml::Algo::Cart:
        case ml::Algo::RandomForest:
        case ml::Algo::GradBoost: {
            Json trees = Json::array();
            for (const auto& t : m.trees) trees.push_back(t.nodes.empty() ? Json(nullptr) : tree_to_json(t, 0));
            j["trees"] = std::move(trees);
            if (m.algo == ml::Algo::GradBoost) j["base_score"] = m.base_score;
            break;
        }
        case ml::Algo::Knn:
            j["scaler"] = {{"means", m.knn.means}, {"stds", m.knn.stds}};
            j["rows"] = m.knn.rows;
            j["labels"] = m.knn.labels;
            break;
    }
    return j;
}

ml::TrainedModel trained_model_from_json(const Json& j) {
    ml::TrainedModel m;
    const auto algo = ml::parse_algo(j.at("algo").get<std::string>());
    if (!algo) throw Error(ErrorCode::CorruptModel, "unknown algorithm " + j.at("algo").dump());
    m.algo = *algo;
    m.params = model_params_from_json(j.at("params"));
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    if (!j.at("constant_class").is_null()) m.constant_class = j.at("constant_class").get<int>();
    m.warnings = j.at("warnings").get<std::vector<std::string>>();
    if (m.algo == ml::Algo::Knn) {
        m.knn.means = j.at("scaler").at("means").get<std::vector<double>>();
        m.knn.stds = j.at("scaler").at("stds").get<std::vector<double>>();
        m.knn.rows = j.at("rows").get<std::vector<double>>();
        m.knn.labels = j.at("labels").get<std::vector<int>>();
        if (m.knn.rows.size() != m.knn.labels.size() * m.feature_names.size()) {
            throw Error(ErrorCode::CorruptModel, "knn row storage does not match label count");
        }
    } else {
        for (const auto& t : j.at("trees")) {
            ml::Tree tree;
            if (!t.is_null()) tree_from_json(t, tree, 0);
            m.trees.push_back(std::move(tree));
        }
        if (m.algo == ml::Algo::GradBoost) m.base_score = get_or<double>(j, "base_score", 0.0);
        for (const auto& tree : m.trees) {
            for (const auto& n : tree.nodes) {
                if (!n.is_leaf() && static_cast<std::size_t>(n.feature) >= m.feature_names.size()) {
                    throw Error(ErrorCode::CorruptModel, "tree split references a missing feature");
                }
            }
        }
    }
    return m;
}

Json to_json(const ScoringTable& t) {
    Json j;
    j["question_upvote"] = t.question_upvote;
    j["answer_upvote"] = t.answer_upvote;
    j["answer_accepted"] = t.answer_accepted;
    j["downvote_received"] = t.downvote_received;
    j["downvote_cast"] = t.downvote_cast;
    j["edit_approved"] = t.edit_approved;
    j["base"] = t.base;
    j["floor"] = t.floor;
    return j;
}

ScoringTable scoring_table_from_json(const Json& j) {
    ScoringTable t;
    t.question_upvote = get_or(j, "question_upvote", t.question_upvote);
    t.answer_upvote = get_or(j, "answer_upvote", t.answer_upvote);
    t.answer_accepted = get_or(j, "answer_accepted", t.answer_accepted);
    t.downvote_received = get_or(j, "downvote_received", t.downvote_received);
    t.downvote_cast = get_or(j, "downvote_cast", t.downvote_cast);
    t.edit_approved = get_or(j, "edit_approved", t.edit_approved);
    t.base = get_or(j, "base", t.base);
    t.floor = get_or(j, "floor", t.floor);
    return t;
}

Json to_json(const Quartiles& q) { return Json{{"q1", q.q1}, {"q2", q.q2}, {"q3", q.q3}}; }

Quartiles quartiles_from_json(const Json& j) {
    return {j.at("q1").get<double>(), j.at("q2").get<double>(), j.at("q3").get<double>()};
}

Json to_json(const ReasonConfig& c) {
    return Json{{"reputation_threshold", c.reputation_threshold},
                {"fallback_ratio", c.fallback_ratio},
                {"smote_k", c.smote_k}};
}

ReasonConfig reason_config_from_json(const Json& j) {
    ReasonConfig c;
    c.reputation_threshold = get_or(j, "reputation_threshold", c.reputation_threshold);
    c.fallback_ratio = get_or(j, "fallback_ratio", c.fallback_ratio);
    c.smote_k = get_or(j, "smote_k", c.smote_k);
    return c;
}

Json to_json(const ConfusionMatrix& cm) {
    return Json{{"tp", cm.tp}, {"fp", cm.fp}, {"tn", cm.tn}, {"fn", cm.fn}};
}

Json to_json(const Metrics& m) {
    return Json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"accuracy", m.accuracy}};
}

Json to_json(const LengthFeatures& l) {
    return Json{{"added_text_ratio", l.added_text_ratio},
                {"removed_text_ratio", l.removed_text_ratio},
                {"added_code_ratio", l.added_code_ratio},
                {"removed_code_ratio", l.removed_code_ratio}};
}

}  // namespace editex
