#include <gtest/gtest.h>

#include <cmath>

#include "editex/error.hpp"
#include "editex/evaluation.hpp"
#include "test_support.hpp"

namespace {

using namespace editex;
using testkit::entropy_bits;
using testkit::exact_shapley;

template <class F>
void expect_code(F&& f, ErrorCode code) {
    try {
        f();
        ADD_FAILURE() << "expected " << to_string(code);
    } catch (const editex::Error& e) {
        EXPECT_EQ(e.code(), code) << e.what();
    }
}

TEST(Metrics, PublishedRow) {
    const Metrics m = metrics(ConfusionMatrix{129, 78, 153, 63});
    EXPECT_NEAR(m.precision, 129.0 / 207.0, 1e-12);
    EXPECT_NEAR(m.recall, 129.0 / 192.0, 1e-12);
    EXPECT_NEAR(m.accuracy, 282.0 / 423.0, 1e-12);
    // F1 as 2TP / (2TP + FP + FN), independent of the harmonic-mean form.
    EXPECT_NEAR(m.f1, 258.0 / (258.0 + 78.0 + 63.0), 1e-12);
}

TEST(Metrics, ZeroDenominators) {
    const Metrics none = metrics(ConfusionMatrix{});
    EXPECT_EQ(none.precision, 0.0);
    EXPECT_EQ(none.recall, 0.0);
    EXPECT_EQ(none.f1, 0.0);
    EXPECT_EQ(none.accuracy, 0.0);
    const Metrics all_negative = metrics(ConfusionMatrix{0, 0, 5, 0});
    EXPECT_EQ(all_negative.precision, 0.0);
    EXPECT_EQ(all_negative.accuracy, 1.0);
}

TEST(Metrics, AddAndFlip) {
    ConfusionMatrix cm;
    cm.add(1, 1);
    cm.add(1, 0);
    cm.add(0, 0);
    cm.add(0, 0);
    cm.add(0, 1);
    EXPECT_EQ(cm, (ConfusionMatrix{1, 1, 2, 1}));
    EXPECT_EQ(cm.flipped(), (ConfusionMatrix{2, 1, 1, 1}));
    EXPECT_EQ(cm.total(), 5u);
}

TEST(ReasonConfusion, PerInstanceRule) {
    using R = std::vector<RejectionReason>;
    const std::vector<R> identified{{ReasonTag::Other}, {}, {}, {ReasonTag::StatusUpdate}, {ReasonTag::Other}};
    const std::vector<R> expected{{ReasonTag::Other}, {}, {ReasonTag::StatusUpdate}, {}, {ReasonTag::StatusUpdate}};
    EXPECT_EQ(reason_confusion(identified, expected), (ConfusionMatrix{1, 2, 1, 1}));
    expect_code([&] { reason_confusion(std::span(identified).first(2), expected); }, ErrorCode::LengthMismatch);
}

TEST(ReasonConfusion, FixtureTally) {
    std::vector<std::vector<RejectionReason>> got;
    std::vector<std::vector<RejectionReason>> annotated;
    for (const auto& f : testkit::load_reason_fixtures()) {
        got.push_back(f.expected);
        annotated.push_back(f.annotated);
    }
    EXPECT_EQ(reason_confusion(got, annotated), (ConfusionMatrix{8, 2, 1, 1}));
}

TEST(Quartiles, LinearInterpolation) {
    const std::vector<double> v{4, 1, 3, 2};
    EXPECT_EQ(compute_quartiles(v), (Quartiles{1.75, 2.5, 3.25}));
    const std::vector<double> one{7};
    EXPECT_EQ(compute_quartiles(one), (Quartiles{7, 7, 7}));
    expect_code([] { compute_quartiles({}); }, ErrorCode::EmptyInput);
}

TEST(EditCategory, RightClosedIntervals) {
    const Quartiles q{0.1, 0.2, 0.3};
    EXPECT_EQ(edit_category(0.0, q), EditCategory::Trivial);
    EXPECT_EQ(edit_category(0.1, q), EditCategory::Trivial);
    EXPECT_EQ(edit_category(0.15, q), EditCategory::Small);
    EXPECT_EQ(edit_category(0.2, q), EditCategory::Small);
    EXPECT_EQ(edit_category(0.3, q), EditCategory::Medium);
    EXPECT_EQ(edit_category(0.31, q), EditCategory::Major);
    EXPECT_EQ(category_name(EditCategory::Major), "major");
}

TEST(Baselines, RejectTrivialAndNonTrivial) {
    EXPECT_EQ(baseline_predict(EditCategory::Trivial, BaselineMode::RejectTrivial), 1);
    EXPECT_EQ(baseline_predict(EditCategory::Small, BaselineMode::RejectTrivial), 0);
    EXPECT_EQ(baseline_predict(EditCategory::Trivial, BaselineMode::RejectNonTrivial), 0);
    for (auto c : {EditCategory::Small, EditCategory::Medium, EditCategory::Major}) {
        EXPECT_EQ(baseline_predict(c, BaselineMode::RejectNonTrivial), 1);
    }
}

TEST(InformationGain, Examples) {
    const std::vector<int> y{1, 1, 1, 1, 0, 0, 0, 0};
    EXPECT_DOUBLE_EQ(information_gain(std::vector<double>{1, 1, 1, 1, 0, 0, 0, 0}, y), 1.0);
    EXPECT_NEAR(information_gain(std::vector<double>{1, 0, 1, 0, 1, 0, 1, 0}, y), 0.0, 1e-12);
    const std::vector<int> y2{1, 1, 1, 0, 1, 0, 0, 0};
    EXPECT_NEAR(information_gain(std::vector<double>{1, 1, 1, 1, 0, 0, 0, 0}, y2), 1.0 - entropy_bits(0.75), 1e-12);
    EXPECT_NEAR(label_entropy(y2), 1.0, 1e-12);
}

TEST(InformationGain, EqualFrequencyBins) {
    const std::vector<double> x{8, 7, 6, 5, 4, 3, 2, 1};
    const std::vector<int> y{1, 1, 1, 1, 0, 0, 0, 0};
    EXPECT_NEAR(information_gain(x, y, 2), 1.0, 1e-12);
    EXPECT_NEAR(information_gain(x, y, 1), 0.0, 1e-12);
    // A constant non-binary column collapses into one bin.
    EXPECT_NEAR(information_gain(std::vector<double>(8, 3.5), y, 4), 0.0, 1e-12);
    expect_code([&] { information_gain(x, std::vector<int>{1}); }, ErrorCode::LengthMismatch);
    expect_code([&] { information_gain(x, y, 0); }, ErrorCode::InvalidArgument);
}

TEST(InformationGain, BoundedByLabelEntropy) {
    testkit::Gaussian g(21);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x;
        std::vector<int> y;
        for (int i = 0; i < 60; ++i) {
            x.push_back(g());
            y.push_back(g.uniform() < 0.3 ? 1 : 0);
        }
        const double ig = information_gain(x, y);
        EXPECT_GE(ig, -1e-12);
        EXPECT_LE(ig, label_entropy(y) + 1e-12);
    }
}

TEST(Ranking, StableOnTies) {
    const std::vector<std::string> names{"a", "b", "c"};
    const std::vector<double> s{0.5, 0.9, 0.5};
    const auto r = rank_features(names, s);
    ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(r[0].feature, "b");
    EXPECT_EQ(r[1].feature, "a");
    EXPECT_EQ(r[2].feature, "c");
}

TEST(Ranking, InformationGainPutsInformativeFirst) {
    const ml::Dataset d = testkit::separable_blobs(200, 4);
    const auto r = information_gain_ranking(d);
    ASSERT_EQ(r.size(), d.n_features());
    EXPECT_TRUE(r[0].feature == d.feature_names()[0] || r[0].feature == d.feature_names()[1]);
    EXPECT_TRUE(r[1].feature == d.feature_names()[0] || r[1].feature == d.feature_names()[1]);
}

ml::TrainedModel constant_model(double score) {
    ml::TrainedModel m;
    m.algo = ml::Algo::RandomForest;
    m.feature_names = {"a", "b"};
    ml::Tree t;
    ml::TreeNode leaf;
    leaf.count1 = score >= 0.5 ? 1 : 0;
    leaf.count0 = 1 - leaf.count1;
    t.nodes.push_back(leaf);
    m.trees.push_back(t);
    return m;
}

TEST(Shapley, ConstantModelGivesZeros) {
    ml::Dataset bg({"a", "b"});
    bg.add_row(std::vector<double>{0, 0}, 0);
    bg.add_row(std::vector<double>{1, 2}, 1);
    const auto r = shapley_importance(constant_model(1.0), bg, bg, 50, 1);
    for (const auto& row : r.attributions) {
        for (double v : row) EXPECT_EQ(v, 0.0);
    }
    EXPECT_EQ(r.ranking.size(), 2u);
}

TEST(Shapley, Guards) {
    ml::Dataset bg({"a", "b"});
    bg.add_row(std::vector<double>{0, 0}, 0);
    const auto m = constant_model(0.0);
    expect_code([&] { shapley_importance(m, ml::Dataset({"a", "b"}), bg); }, ErrorCode::EmptyBackground);
    expect_code([&] { shapley_importance(m, bg, bg, 0); }, ErrorCode::InvalidArgument);
    ml::Dataset wide({"a", "b", "c"});
    wide.add_row(std::vector<double>{0, 0, 0}, 0);
    expect_code([&] { shapley_importance(m, wide, wide); }, ErrorCode::SchemaMismatch);
}

TEST(Shapley, DeterministicForSeed) {
    const ml::Dataset d = testkit::noisy_set(80, 2);
    ml::ModelParams p = ml::ModelParams::defaults(ml::Algo::RandomForest);
    p.n_trees = 10;
    const auto m = ml::train(d, p);
    const auto a = shapley_importance(m, d, d.select_rows(std::vector<std::size_t>{0, 1, 2}), 40, 9);
    const auto b = shapley_importance(m, d, d.select_rows(std::vector<std::size_t>{0, 1, 2}), 40, 9);
    EXPECT_EQ(a.attributions, b.attributions);
    EXPECT_EQ(a.standard_errors, b.standard_errors);
}

// Depth-2 AND tree: both features interact. Over many seeds the standardised
// error (estimate - exact) / SE should look like a unit normal.
TEST(Shapley, CalibratedAgainstExactOnInteraction) {
    ml::Dataset train({"x0", "x1"});
    for (int i = 0; i < 40; ++i) {
        const double x0 = (i % 2) ? 0.9 : 0.1;
        const double x1 = ((i / 2) % 2) ? 0.9 : 0.1;
        train.add_row(std::vector<double>{x0, x1}, (x0 > 0.5 && x1 > 0.5) ? 1 : 0);
    }
    ml::ModelParams p = ml::ModelParams::defaults(ml::Algo::Cart);
    p.max_depth = 2;
    const auto model = ml::train_cart(train, p);
    auto f = [&](const std::vector<double>& z) { return ml::predict(model, z).score; };
    ASSERT_EQ(f({0.9, 0.9}), 1.0);
    ASSERT_EQ(f({0.9, 0.1}), 0.0);

    ml::Dataset background({"x0", "x1"});
    std::vector<std::vector<double>> bg_rows;
    testkit::Gaussian g(3);
    for (int i = 0; i < 8; ++i) {
        std::vector<double> r{g.uniform(), g.uniform()};
        background.add_row(r, 0);
        bg_rows.push_back(r);
    }
    const std::vector<double> x{0.8, 0.7};
    ml::Dataset instance({"x0", "x1"});
    instance.add_row(x, 0);
    const auto exact = exact_shapley(f, x, bg_rows);

    std::vector<double> z;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const auto r = shapley_importance(model, background, instance, 200, seed);
        for (std::size_t j = 0; j < 2; ++j) {
            ASSERT_GT(r.standard_errors[0][j], 0.0);
            z.push_back((r.attributions[0][j] - exact[j]) / r.standard_errors[0][j]);
        }
    }
    double mean = 0.0;
    for (double v : z) mean += v;
    mean /= static_cast<double>(z.size());
    double var = 0.0;
    std::size_t tail = 0;
    for (double v : z) {
        var += (v - mean) * (v - mean);
        tail += std::abs(v) > 3.0 ? 1 : 0;
    }
    var /= static_cast<double>(z.size() - 1);
    EXPECT_LT(std::abs(mean), 0.2);
    EXPECT_GT(var, 0.7);
    EXPECT_LT(var, 1.3);
    EXPECT_LE(static_cast<double>(tail) / static_cast<double>(z.size()), 0.02);
}

}  // namespace
