#include "editex/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "editex/error.hpp"
#include "editex/rng.hpp"

namespace editex {
namespace {

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double entropy2(double c0, double c1) {
    const double n = c0 + c1;
    double h = 0.0;
    for (double c : {c0, c1}) {
        if (c > 0.0) {
            const double p = c / n;
            h -= p * std::log2(p);
        }
    }
    return h;
}

bool is_binary_column(std::span<const double> values) {
    return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0 || v == 1.0; });
}

}  // namespace

void ConfusionMatrix::add(int predicted, int actual) {
    if (predicted == 1) {
        (actual == 1 ? tp : fp)++;
    } else {
        (actual == 1 ? fn : tn)++;
    }
}

Metrics metrics(const ConfusionMatrix& cm) {
    const auto tp = static_cast<double>(cm.tp);
    const auto fp = static_cast<double>(cm.fp);
    const auto tn = static_cast<double>(cm.tn);
    const auto fn = static_cast<double>(cm.fn);
    Metrics m;
    m.precision = safe_div(tp, tp + fp);
    m.recall = safe_div(tp, tp + fn);
    m.f1 = safe_div(2.0 * m.precision * m.recall, m.precision + m.recall);
    m.accuracy = safe_div(tp + tn, tp + fp + tn + fn);
    return m;
}

ConfusionMatrix reason_confusion(std::span<const std::vector<RejectionReason>> identified,
                                 std::span<const std::vector<RejectionReason>> expected) {
    if (identified.size() != expected.size()) {
        throw Error(ErrorCode::LengthMismatch, "reason_confusion: " + std::to_string(identified.size()) +
                                                   " identified vs " + std::to_string(expected.size()) +
                                                   " expected");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < identified.size(); ++i) {
        auto got = identified[i];
        auto want = expected[i];
        canonicalize(got);
        canonicalize(want);
        if (got.empty() && want.empty()) {
            ++cm.tn;
        } else if (got.empty()) {
            ++cm.fn;
        } else if (got == want) {
            ++cm.tp;
        } else {
            ++cm.fp;
        }
    }
    return cm;
}

Quartiles compute_quartiles(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorCode::EmptyInput, "quartiles of an empty sample");
    std::vector<double> s(values.begin(), values.end());
    std::sort(s.begin(), s.end());
    auto at = [&](double p) {
        const double pos = p * static_cast<double>(s.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, s.size() - 1);
        return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
    };
    return {at(0.25), at(0.5), at(0.75)};
}

std::string_view category_name(EditCategory c) noexcept {
    switch (c) {
        case EditCategory::Trivial: return "trivial";
        case EditCategory::Small: return "small";
        case EditCategory::Medium: return "medium";
        case EditCategory::Major: return "major";
    }
    return "unknown";
}

EditCategory edit_category(double d, const Quartiles& q) {
    if (d <= q.q1) return EditCategory::Trivial;
    if (d <= q.q2) return EditCategory::Small;
    if (d <= q.q3) return EditCategory::Medium;
    return EditCategory::Major;
}

int baseline_predict(EditCategory category, BaselineMode mode) noexcept {
    const bool trivial = category == EditCategory::Trivial;
    return (mode == BaselineMode::RejectTrivial ? trivial : !trivial) ? 1 : 0;
}

double label_entropy(std::span<const int> labels) {
    const auto ones = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
    return entropy2(static_cast<double>(labels.size()) - ones, ones);
}

double information_gain(std::span<const double> values, std::span<const int> labels, int bins) {
    if (values.size() != labels.size()) {
        throw Error(ErrorCode::LengthMismatch, "information_gain: column lengths differ");
    }
    if (values.empty()) throw Error(ErrorCode::EmptyInput, "information_gain: empty column");
    if (bins < 1) throw Error(ErrorCode::InvalidArgument, "information_gain: bins must be positive");

    const std::size_t n = values.size();
    std::vector<std::size_t> bucket(n);
    if (is_binary_column(values)) {
        for (std::size_t i = 0; i < n; ++i) bucket[i] = values[i] == 1.0 ? 1 : 0;
    } else {
        std::vector<double> sorted(values.begin(), values.end());
        std::sort(sorted.begin(), sorted.end());
        std::vector<double> edges;
        for (int b = 1; b < bins; ++b) {
            edges.push_back(sorted[static_cast<std::size_t>(b) * n / static_cast<std::size_t>(bins)]);
        }
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        for (std::size_t i = 0; i < n; ++i) {
            bucket[i] = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), values[i]) -
                                                 edges.begin());
        }
    }

    const std::size_t n_buckets = *std::max_element(bucket.begin(), bucket.end()) + 1;
    std::vector<double> c0(n_buckets, 0.0);
    std::vector<double> c1(n_buckets, 0.0);
    for (std::size_t i = 0; i < n; ++i) (labels[i] == 1 ? c1 : c0)[bucket[i]] += 1.0;

    double conditional = 0.0;
    for (std::size_t b = 0; b < n_buckets; ++b) {
        const double w = (c0[b] + c1[b]) / static_cast<double>(n);
        if (w > 0.0) conditional += w * entropy2(c0[b], c1[b]);
    }
    const double gain = label_entropy(labels) - conditional;
    return std::max(gain, 0.0);
}

std::vector<FeatureScore> rank_features(std::span<const std::string> names, std::span<const double> scores) {
    std::vector<std::size_t> order(names.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<FeatureScore> out;
    for (std::size_t i : order) out.push_back({names[i], scores[i]});
    return out;
}

std::vector<FeatureScore> information_gain_ranking(const ml::Dataset& data, int bins) {
    std::vector<double> scores;
    std::vector<double> column(data.size());
    for (std::size_t f = 0; f < data.n_features(); ++f) {
        for (std::size_t i = 0; i < data.size(); ++i) column[i] = data.at(i, f);
        scores.push_back(information_gain(column, data.labels(), bins));
    }
    return rank_features(data.feature_names(), scores);
}

ShapleyResult shapley_importance(const ml::TrainedModel& model, const ml::Dataset& background,
                                 const ml::Dataset& instances, int n_permutations, std::uint64_t seed) {
    if (background.empty()) throw Error(ErrorCode::EmptyBackground, "shapley: background set is empty");
    if (n_permutations < 1) throw Error(ErrorCode::InvalidArgument, "shapley: need at least one permutation");
    const std::size_t f = model.n_features();
    if (background.n_features() != f || instances.n_features() != f) {
        throw Error(ErrorCode::SchemaMismatch, "shapley: dataset width does not match the model");
    }

    ShapleyResult out;
    out.mean_abs.assign(f, 0.0);
    std::vector<std::size_t> perm(f);
    std::vector<double> current(f);
    std::vector<double> sum(f);
    std::vector<double> sum_sq(f);
    const auto n_perm = static_cast<std::size_t>(n_permutations);

    for (std::size_t i = 0; i < instances.size(); ++i) {
        const auto x = instances.row(i);
        std::fill(sum.begin(), sum.end(), 0.0);
        std::fill(sum_sq.begin(), sum_sq.end(), 0.0);
        for (std::size_t p = 0; p < n_perm; ++p) {
            Rng rng = Rng::derive(seed ^ splitmix64(i), p);
            std::iota(perm.begin(), perm.end(), 0);
            for (std::size_t k = f; k > 1; --k) std::swap(perm[k - 1], perm[rng.index(k)]);
            const auto z = background.row(rng.index(background.size()));
            std::copy(z.begin(), z.end(), current.begin());
            double prev = ml::predict(model, current).score;
            for (std::size_t j : perm) {
                current[j] = x[j];
                const double now = ml::predict(model, current).score;
                const double contribution = now - prev;
                sum[j] += contribution;
                sum_sq[j] += contribution * contribution;
                prev = now;
            }
        }
        std::vector<double> phi(f);
        std::vector<double> se(f);
        const auto np = static_cast<double>(n_perm);
        for (std::size_t j = 0; j < f; ++j) {
            phi[j] = sum[j] / np;
            const double var = n_perm > 1 ? std::max(0.0, (sum_sq[j] - np * phi[j] * phi[j]) / (np - 1.0)) : 0.0;
            se[j] = std::sqrt(var / np);
            out.mean_abs[j] += std::abs(phi[j]);
        }
        out.attributions.push_back(std::move(phi));
        out.standard_errors.push_back(std::move(se));
    }
    if (!instances.empty()) {
        for (double& m : out.mean_abs) m /= static_cast<double>(instances.size());
    }
    out.ranking = rank_features(model.feature_names, out.mean_abs);
    return out;
}

}  // namespace editex
