#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>

#include "editex/error.hpp"
#include "editex/features.hpp"
#include "test_support.hpp"

namespace {

using namespace editex;
namespace kw = editex::keywords;

TEST(DetectFormat, Examples) {
    const std::string plain = "i am using c# programming language";
    EXPECT_TRUE(detect_format(plain, plain, "<p>i am using <b>c#</b> programming language</p>",
                              "<p>i am using c# programming language</p>"));
    EXPECT_FALSE(detect_format(plain, plain, "<p>x</p>", "<p>x</p>"));
    EXPECT_FALSE(detect_format("abc", "abd", "<b>abc</b>", "abd"));
    EXPECT_FALSE(detect_format("", "", "<p></p>", "<div></div>"));
}

TEST(DetectFormat, NeverTrueForIdenticalInputs) {
    testkit::Gaussian g(4);
    for (int i = 0; i < 100; ++i) {
        const std::string p(g.bits() % 5, 'a');
        const std::string t = "<b>" + p + "</b>";
        EXPECT_FALSE(detect_format(p, p, t, t));
    }
}

TEST(ModificationScore, Examples) {
    EXPECT_EQ(modification_score("abcd", "abcd"), 0.0);
    EXPECT_EQ(modification_score("abcd", "abce"), 0.25);
    EXPECT_EQ(modification_score("", "xyz"), 0.0);
    EXPECT_EQ(modification_score("xyz", ""), 0.0);
}

TEST(DetectDeface, Examples) {
    EXPECT_TRUE(detect_deface("abc", ""));
    EXPECT_TRUE(detect_deface("", "abc"));
    EXPECT_FALSE(detect_deface("", ""));
    EXPECT_FALSE(detect_deface("abc", "xyz"));
}

TEST(DetectCompleteChange, Examples) {
    EXPECT_TRUE(detect_complete_change("abc", "xyz"));
    EXPECT_FALSE(detect_complete_change("abc", "abc"));
    EXPECT_FALSE(detect_complete_change("ab", ""));
    EXPECT_TRUE(detect_complete_change("ab", "xyzw"));  // distance 4 = length of after
}

TEST(DefaceAndCompleteChange, MutuallyExclusivePerChannel) {
    for (const auto& [b, a] : std::vector<std::pair<std::string, std::string>>{
             {"abc", ""}, {"", "abc"}, {"abc", "xyz"}, {"", ""}, {"ab", "ab"}}) {
        EXPECT_FALSE(detect_deface(b, a) && detect_complete_change(b, a)) << b << " -> " << a;
    }
}

TEST(KeywordToggle, Examples) {
    EXPECT_TRUE(detect_keyword_toggle("thanks in advance", "", kw::gratitude()));
    EXPECT_FALSE(detect_keyword_toggle("thanks a lot", "many thanks", kw::gratitude()));
    EXPECT_FALSE(detect_keyword_toggle("plain words", "other words", kw::gratitude()));
}

TEST(KeywordToggle, WordBoundariesAndCase) {
    EXPECT_FALSE(detect_keyword_toggle("maps", "maps and apps", kw::status()));
    EXPECT_TRUE(detect_keyword_toggle("text", "text. PS: more", kw::status()));
    EXPECT_TRUE(detect_keyword_toggle("Hello", "", kw::greetings()));
    EXPECT_FALSE(detect_keyword_toggle("this", "this", kw::greetings()));
    EXPECT_FALSE(detect_keyword_toggle("thigh", "thighs", kw::greetings()));
}

TEST(KeywordToggle, MultiWordPhrase) {
    EXPECT_TRUE(detect_keyword_toggle("x", "this is old code", kw::deprecation()));
    EXPECT_FALSE(detect_keyword_toggle("x", "old, then code", kw::deprecation()));
    EXPECT_FALSE(detect_keyword_toggle("x", "code old", kw::deprecation()));
}

TEST(KeywordToggle, Symmetric) {
    const std::vector<std::string> samples{"", "thanks", "hi there", "edit: done", "duplicate of", "x y z"};
    for (const auto& a : samples) {
        for (const auto& b : samples) {
            for (const auto* list : {&kw::status(), &kw::gratitude(), &kw::greetings(), &kw::duplication()}) {
                EXPECT_EQ(detect_keyword_toggle(a, b, *list), detect_keyword_toggle(b, a, *list));
            }
        }
    }
}

bool has(const KeywordList& l, const std::string& w) {
    return std::find(l.words.begin(), l.words.end(), w) != l.words.end();
}

TEST(KeywordList, RejectsEmptyAndLowercases) {
    EXPECT_THROW(KeywordList::make("empty", {}), editex::Error);
    const auto l = KeywordList::make("x", {"  Foo ", "BAR"});
    EXPECT_TRUE(has(l, "foo"));
    EXPECT_TRUE(has(l, "bar"));
}

TEST(SignatureKeywords, ShortTokensIgnored) {
    const auto l = signature_keywords("Maria Keller", std::string("Al Bo"));
    EXPECT_TRUE(has(l, "maria keller"));
    EXPECT_TRUE(has(l, "maria"));
    EXPECT_TRUE(has(l, "keller"));
    EXPECT_TRUE(has(l, "al bo"));
    EXPECT_FALSE(has(l, "al"));
    EXPECT_FALSE(has(l, "bo"));
    EXPECT_TRUE(signature_keywords("", std::nullopt).words.empty());
}

TEST(ReferenceModification, Examples) {
    using V = std::vector<std::string>;
    EXPECT_TRUE(detect_reference_modification(V{"http://a"}, V{}));
    EXPECT_FALSE(detect_reference_modification(V{"http://a"}, V{"http://a"}));
    EXPECT_TRUE(detect_reference_modification(V{"http://a"}, V{"http://a", "http://b"}));
    EXPECT_FALSE(detect_reference_modification(V{"http://a", "http://a"}, V{"http://a"}));
}

TEST(LinkCheck, DisabledIsAlwaysFalse) {
    const std::vector<std::string> links{"http://127.0.0.1:9/definitely-down"};
    EXPECT_FALSE(check_inactive_hyperlinks(links, LinkCheckDisabled{}));
}

class LinkCheckNetworkTest : public ::testing::Test {
protected:
    void SetUp() override { clear_link_cache(); }
    bool inactive(const std::vector<std::string>& paths, double budget = 0.0) {
        std::vector<std::string> links;
        for (const auto& p : paths) links.push_back(stub.base() + p);
        return check_inactive_hyperlinks(links, LinkCheckNetwork{2.0, 4, budget});
    }
    testkit::StubServer stub;
};

TEST_F(LinkCheckNetworkTest, NotFoundIsInactive) { EXPECT_TRUE(inactive({"/missing"})); }

TEST_F(LinkCheckNetworkTest, OkIsActive) { EXPECT_FALSE(inactive({"/ok"})); }

TEST_F(LinkCheckNetworkTest, AnyFailingLinkMakesItTrue) { EXPECT_TRUE(inactive({"/ok", "/missing", "/ok"})); }

TEST_F(LinkCheckNetworkTest, HeadNotAllowedFallsBackToGet) {
    EXPECT_FALSE(inactive({"/head-not-allowed"}));
    EXPECT_EQ(stub.head_405_count(), 1);
}

TEST_F(LinkCheckNetworkTest, RedirectsFollowedWithinLimit) {
    EXPECT_FALSE(inactive({"/redirect"}));
}

TEST_F(LinkCheckNetworkTest, RedirectChainStopsAfterFiveHops) {
    // The first request plus five followed redirects; the final 3xx is not
    // an error status, so the link is not reported inactive.
    EXPECT_FALSE(inactive({"/loop"}));
    EXPECT_EQ(stub.loop_hits(), 6);
}

TEST_F(LinkCheckNetworkTest, TransportErrorIsInactive) {
    const std::vector<std::string> links{"http://127.0.0.1:1/refused"};
    EXPECT_TRUE(check_inactive_hyperlinks(links, LinkCheckNetwork{1.0, 1, 0.0}));
}

TEST_F(LinkCheckNetworkTest, ResultsAreCached) {
    EXPECT_FALSE(inactive({"/head-not-allowed"}));
    EXPECT_FALSE(inactive({"/head-not-allowed"}));
    EXPECT_EQ(stub.head_405_count(), 1);
}

TEST_F(LinkCheckNetworkTest, BudgetExpiryCountsAsActive) {
    const auto t0 = std::chrono::steady_clock::now();
    EXPECT_FALSE(inactive({"/slow"}, 0.2));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LT(secs, 1.4);
}

TEST(Reputation, Examples) {
    EXPECT_EQ(compute_reputation({}, 100), 1);
    const std::vector<ReputationEvent> up{{ReputationEventKind::AnswerUpvote, 10, 0}};
    EXPECT_EQ(compute_reputation(up, 100), 11);
    const std::vector<ReputationEvent> down{{ReputationEventKind::DownvoteReceived, 10, 0}};
    EXPECT_EQ(compute_reputation(down, 100), 1);
}

TEST(Reputation, EventsAfterAsOfExcludedAndTableApplied) {
    const std::vector<ReputationEvent> events{
        {ReputationEventKind::QuestionUpvote, 1, 0},   {ReputationEventKind::AnswerAccepted, 2, 0},
        {ReputationEventKind::BountyWon, 3, 50},       {ReputationEventKind::EditApproved, 4, 0},
        {ReputationEventKind::DownvoteCast, 5, 0},     {ReputationEventKind::AnswerUpvote, 500, 0},
    };
    EXPECT_EQ(compute_reputation(events, 100), 1 + 5 + 15 + 50 + 2 - 1);
    ScoringTable custom;
    custom.question_upvote = 100;
    custom.base = 0;
    EXPECT_EQ(compute_reputation(std::vector<ReputationEvent>{{ReputationEventKind::QuestionUpvote, 0, 0}}, 0, custom),
              100);
    EXPECT_THROW(compute_reputation(std::vector<ReputationEvent>{{ReputationEventKind::BountyWon, 0, 0}}, 10), editex::Error);
}

TEST(ExtractFeatures, FixtureCorpusWithoutNetwork) {
    for (const auto& f : testkit::load_feature_fixtures()) {
        if (f.link_checks) continue;
        EXPECT_EQ(extract_features(f.pair, LinkCheckDisabled{}), f.expected) << f.name;
    }
}

TEST(ExtractFeatures, FixtureCorpusWithStubLinks) {
    testkit::StubServer stub;
    clear_link_cache();
    for (const auto& f : testkit::load_feature_fixtures(stub.base())) {
        if (!f.link_checks) continue;
        EXPECT_EQ(extract_features(f.pair, LinkCheckNetwork{2.0, 4, 0.0}), f.expected) << f.name;
    }
}

TEST(ExtractFeatures, IdenticalBodiesOnlyCarryReputation) {
    EditPair p;
    p.body_before_html = p.body_after_html = "<p>Body</p><pre><code>int x;</code></pre>";
    p.editor_reputation = 77;
    FeatureVector want;
    want.reputation = 77;
    EXPECT_EQ(extract_features(p, LinkCheckDisabled{}), want);
}

TEST(ExtractFeatures, Deterministic) {
    const auto fixtures = testkit::load_feature_fixtures();
    for (const auto& f : fixtures) {
        EXPECT_EQ(extract_features(f.pair, LinkCheckDisabled{}), extract_features(f.pair, LinkCheckDisabled{}));
    }
}

TEST(ExtractFeatures, GratitudeAppended) {
    EditPair p;
    p.body_before_html = "<p>How do I sort a list?</p>";
    p.body_after_html = "<p>How do I sort a list?</p><p>thanks!</p>";
    const auto fv = extract_features(p, LinkCheckDisabled{});
    EXPECT_TRUE(fv.gratitude);
    EXPECT_GT(fv.text_modification, 0.0);
}

}  // namespace
