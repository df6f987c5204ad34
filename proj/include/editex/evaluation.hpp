#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "editex/ml.hpp"
#include "editex/types.hpp"

namespace editex {

/// Binary confusion counts with Rejected (1) as the positive class.
struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    void add(int predicted, int actual);
    std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
    /// Same counts with the negative class treated as positive.
    ConfusionMatrix flipped() const noexcept { return {tn, fn, tp, fp}; }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
};

/// Standard precision / recall / F1 / accuracy; every 0/0 is 0.
Metrics metrics(const ConfusionMatrix& cm);

/// Per-instance reason accounting: TP when identified == expected != {},
/// TN when both are empty, FN when only expected is non-empty, FP otherwise.
ConfusionMatrix reason_confusion(std::span<const std::vector<RejectionReason>> identified,
                                 std::span<const std::vector<RejectionReason>> expected);

struct Quartiles {
    double q1 = 0.0;
    double q2 = 0.0;
    double q3 = 0.0;

    friend bool operator==(const Quartiles&, const Quartiles&) = default;
};

/// Linear-interpolation quartiles of a non-empty sample.
Quartiles compute_quartiles(std::span<const double> values);

enum class EditCategory : std::uint8_t { Trivial, Small, Medium, Major };
std::string_view category_name(EditCategory c) noexcept;

/// Intervals are left-open, right-closed: (-inf,q1], (q1,q2], (q2,q3], (q3,inf).
EditCategory edit_category(double norm_distance, const Quartiles& q);

enum class BaselineMode : std::uint8_t { RejectTrivial, RejectNonTrivial };
int baseline_predict(EditCategory category, BaselineMode mode) noexcept;

/// Shannon entropy in bits of a 0/1 label column.
double label_entropy(std::span<const int> labels);

/// H(C) - H(C|A) in bits. 0/1-valued columns are categorical; anything else
/// is cut into `bins` equal-frequency bins (repeated edges merge).
double information_gain(std::span<const double> values, std::span<const int> labels, int bins = 10);

struct FeatureScore {
    std::string feature;
    double score = 0.0;
};

/// Features sorted by descending score; ties keep canonical column order.
std::vector<FeatureScore> rank_features(std::span<const std::string> names, std::span<const double> scores);

std::vector<FeatureScore> information_gain_ranking(const ml::Dataset& data, int bins = 10);

struct ShapleyResult {
    /// attributions[i][j]: feature j's contribution for instance i.
    std::vector<std::vector<double>> attributions;
    /// Monte Carlo standard error of each attribution.
    std::vector<std::vector<double>> standard_errors;
    std::vector<double> mean_abs;
    std::vector<FeatureScore> ranking;
};

/// Permutation-sampling Shapley values of the class-1 score. Features not yet
/// in the coalition take their values from one background row drawn per
/// permutation.
ShapleyResult shapley_importance(const ml::TrainedModel& model, const ml::Dataset& background,
                                 const ml::Dataset& instances, int n_permutations = 200,
                                 std::uint64_t seed = 42);

}  // namespace editex
