#pragma once

// Classifiers trained from scratch: CART, random forest, k-nearest
// neighbours and gradient-boosted trees, plus SMOTE oversampling.
// Label 1 is the positive class (Rejected) throughout.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "editex/types.hpp"

namespace editex::ml {

/// Dense row-major feature matrix with 0/1 labels.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::vector<std::string> feature_names) : names_(std::move(feature_names)) {}

    /// Empty dataset with the canonical 15-feature schema.
    static Dataset edit_schema();

    void add_row(std::span<const double> values, int label, std::int64_t timestamp = 0);

    std::size_t size() const noexcept { return labels_.size(); }
    bool empty() const noexcept { return labels_.empty(); }
    std::size_t n_features() const noexcept { return names_.size(); }
    const std::vector<std::string>& feature_names() const noexcept { return names_; }

    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * names_.size(), names_.size()};
    }
    double at(std::size_t i, std::size_t f) const { return values_[i * names_.size() + f]; }
    int label(std::size_t i) const { return labels_[i]; }
    std::int64_t timestamp(std::size_t i) const { return timestamps_[i]; }
    const std::vector<int>& labels() const noexcept { return labels_; }

    std::size_t count(int label) const;

    Dataset select_rows(std::span<const std::size_t> rows) const;
    Dataset select_columns(std::span<const std::size_t> columns) const;
    Dataset with_labels(std::vector<int> labels) const;

private:
    std::vector<std::string> names_;
    std::vector<double> values_;
    std::vector<int> labels_;
    std::vector<std::int64_t> timestamps_;
};

Dataset make_dataset(std::span<const LabeledExample> examples);

enum class Algo : std::uint8_t { Cart, RandomForest, Knn, GradBoost };

std::string_view algo_name(Algo algo) noexcept;  // "cart", "rf", "knn", "gbt"
std::optional<Algo> parse_algo(std::string_view name);

struct ModelParams {
    Algo algo = Algo::RandomForest;
    int max_depth = 5;
    int n_trees = 100;
    int k_neighbors = 46;
    double learning_rate = 0.1;
    int min_samples_split = 2;
    double l2_lambda = 1.0;
    std::uint64_t seed = 42;

    /// Tuned defaults per algorithm: CART and forest depth 5, boosting
    /// depth 3, 46 neighbours.
    static ModelParams defaults(Algo algo);

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Flat binary tree; nodes[0] is the root. Classification leaves use the
/// class counts; regression leaves (boosting) use `value`.
struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // rows with x[feature] <= threshold go left
    int left = -1;
    int right = -1;
    std::uint64_t count0 = 0;
    std::uint64_t count1 = 0;
    double value = 0.0;

    bool is_leaf() const noexcept { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Tree {
    std::vector<TreeNode> nodes;

    const TreeNode& leaf_for(std::span<const double> x) const;
    int depth() const;  // a lone leaf has depth 0
    friend bool operator==(const Tree&, const Tree&) = default;
};

struct KnnState {
    std::vector<double> means;
    std::vector<double> stds;
    std::vector<double> rows;  // standardised, row-major
    std::vector<int> labels;

    friend bool operator==(const KnnState&, const KnnState&) = default;
};

struct TrainedModel {
    Algo algo = Algo::Cart;
    ModelParams params;
    std::vector<std::string> feature_names;
    /// Set when training saw a single class; the model then always predicts it.
    std::optional<int> constant_class;
    std::vector<std::string> warnings;

    std::vector<Tree> trees;
    double base_score = 0.0;  // boosting: initial log-odds
    KnnState knn;

    std::size_t n_features() const noexcept { return feature_names.size(); }
    friend bool operator==(const TrainedModel&, const TrainedModel&) = default;
};

struct Prediction {
    int label = 0;
    double score = 0.0;  // probability of class 1

    friend bool operator==(const Prediction&, const Prediction&) = default;
};

TrainedModel train_cart(const Dataset& data, const ModelParams& params);
TrainedModel train_random_forest(const Dataset& data, const ModelParams& params);
TrainedModel train_knn(const Dataset& data, const ModelParams& params);
TrainedModel train_gradboost(const Dataset& data, const ModelParams& params);

/// Dispatches on params.algo.
TrainedModel train(const Dataset& data, const ModelParams& params);

Prediction predict(const TrainedModel& model, std::span<const double> x);
Prediction predict(const TrainedModel& model, const FeatureVector& fv);

/// Mean training log-loss after each boosting round (index 0 is the prior).
std::vector<double> boosting_loss_curve(const TrainedModel& model, const Dataset& data);

/// Appends synthetic minority rows until both classes have equal counts.
Dataset smote(const Dataset& data, int k, std::uint64_t seed);

}  // namespace editex::ml
