#include "editex/ml.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>
#include <utility>

#include "editex/error.hpp"
#include "editex/rng.hpp"

namespace editex::ml {
namespace {

constexpr double kScoreEps = 1e-12;

void require_trainable(const Dataset& data, std::string_view what) {
    if (data.empty()) {
        throw Error(ErrorCode::EmptyDataset, std::string(what) + ": dataset is empty");
    }
    if (data.n_features() == 0) {
        throw Error(ErrorCode::SchemaMismatch, std::string(what) + ": dataset has no features");
    }
}

void require_params(const ModelParams& p) {
    if (p.max_depth < 1) throw Error(ErrorCode::InvalidArgument, "max_depth must be positive");
    if (p.n_trees < 0) throw Error(ErrorCode::InvalidArgument, "n_trees must be non-negative");
    if (p.k_neighbors < 1) throw Error(ErrorCode::InvalidArgument, "k_neighbors must be positive");
    if (p.min_samples_split < 1) throw Error(ErrorCode::InvalidArgument, "min_samples_split must be positive");
    if (!(p.learning_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "learning_rate must be positive");
    if (p.l2_lambda < 0.0) throw Error(ErrorCode::InvalidArgument, "l2_lambda must be non-negative");
}

TrainedModel model_shell(const Dataset& data, const ModelParams& params, Algo algo) {
    TrainedModel m;
    m.algo = algo;
    m.params = params;
    m.params.algo = algo;
    m.feature_names = data.feature_names();
    return m;
}

// Returns the constant model when only one class is present.
std::optional<TrainedModel> degenerate_model(const Dataset& data, const ModelParams& params, Algo algo) {
    const std::size_t ones = data.count(1);
    if (ones != 0 && ones != data.size()) return std::nullopt;
    TrainedModel m = model_shell(data, params, algo);
    const int cls = ones == 0 ? 0 : 1;
    m.constant_class = cls;
    m.warnings.push_back("single_class_dataset: training data contains only class " + std::to_string(cls));
    return m;
}

double midpoint(double lo, double hi) {
    double t = lo + (hi - lo) / 2.0;
    if (!(t < hi) || !(t >= lo)) t = lo;
    return t;
}

// n * weighted Gini of a child with the given counts.
double gini_mass(double c0, double c1) {
    const double n = c0 + c1;
    return n > 0.0 ? n - (c0 * c0 + c1 * c1) / n : 0.0;
}

class ClassificationTreeBuilder {
public:
    ClassificationTreeBuilder(const Dataset& data, const ModelParams& params, std::size_t mtry, Rng* rng)
        : data_(data), params_(params), mtry_(mtry), rng_(rng) {}

    Tree build(std::vector<std::size_t> rows) {
        grow(rows, 0);
        return std::move(tree_);
    }

private:
    struct Split {
        int feature = -1;
        double threshold = 0.0;
        double score = 0.0;
    };

    int grow(std::vector<std::size_t>& rows, int depth) {
        const int idx = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        std::uint64_t c0 = 0;
        std::uint64_t c1 = 0;
        for (std::size_t r : rows) (data_.label(r) == 1 ? c1 : c0)++;
        tree_.nodes[idx].count0 = c0;
        tree_.nodes[idx].count1 = c1;

        const bool pure = c0 == 0 || c1 == 0;
        if (pure || depth >= params_.max_depth ||
            rows.size() < static_cast<std::size_t>(params_.min_samples_split)) {
            return idx;
        }
        const Split best = find_split(rows, static_cast<double>(c0), static_cast<double>(c1));
        if (best.feature < 0) return idx;

        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (std::size_t r : rows) {
            (data_.at(r, static_cast<std::size_t>(best.feature)) <= best.threshold ? left : right).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        const int l = grow(left, depth + 1);
        const int r = grow(right, depth + 1);
        TreeNode& node = tree_.nodes[idx];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = l;
        node.right = r;
        return idx;
    }

    std::vector<std::size_t> candidate_features() {
        std::vector<std::size_t> feats(data_.n_features());
        std::iota(feats.begin(), feats.end(), 0);
        if (rng_ && mtry_ < feats.size()) {
            for (std::size_t i = 0; i < mtry_; ++i) {
                std::swap(feats[i], feats[i + rng_->index(feats.size() - i)]);
            }
            feats.resize(mtry_);
            std::sort(feats.begin(), feats.end());
        }
        return feats;
    }

    Split find_split(const std::vector<std::size_t>& rows, double c0, double c1) {
        Split best;
        best.score = gini_mass(c0, c1) + kScoreEps;  // zero-gain splits are allowed
        std::vector<std::pair<double, int>> col(rows.size());
        for (std::size_t f : candidate_features()) {
            for (std::size_t i = 0; i < rows.size(); ++i) {
                col[i] = {data_.at(rows[i], f), data_.label(rows[i])};
            }
            std::sort(col.begin(), col.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            double l0 = 0.0;
            double l1 = 0.0;
            for (std::size_t i = 0; i + 1 < col.size(); ++i) {
                (col[i].second == 1 ? l1 : l0) += 1.0;
                if (col[i].first == col[i + 1].first) continue;
                const double score = gini_mass(l0, l1) + gini_mass(c0 - l0, c1 - l1);
                if (best.feature < 0 ? score <= best.score : score < best.score - kScoreEps) {
                    best.feature = static_cast<int>(f);
                    best.threshold = midpoint(col[i].first, col[i + 1].first);
                    best.score = score;
                }
            }
        }
        return best;
    }

    const Dataset& data_;
    const ModelParams& params_;
    std::size_t mtry_;
    Rng* rng_;
    Tree tree_;
};

class RegressionTreeBuilder {
public:
    RegressionTreeBuilder(const Dataset& data, const ModelParams& params, const std::vector<double>& grad,
                          const std::vector<double>& hess)
        : data_(data), params_(params), grad_(grad), hess_(hess) {}

    Tree build(std::vector<std::size_t> rows) {
        grow(rows, 0);
        return std::move(tree_);
    }

private:
    double leaf_gain(double g, double h) const { return g * g / (h + params_.l2_lambda); }

    int grow(std::vector<std::size_t>& rows, int depth) {
        const int idx = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        double g = 0.0;
        double h = 0.0;
        std::uint64_t c0 = 0;
        std::uint64_t c1 = 0;
        for (std::size_t r : rows) {
            g += grad_[r];
            h += hess_[r];
            (data_.label(r) == 1 ? c1 : c0)++;
        }
        {
            TreeNode& node = tree_.nodes[idx];
            node.count0 = c0;
            node.count1 = c1;
            node.value = -g / (h + params_.l2_lambda);
        }
        if (depth >= params_.max_depth || rows.size() < static_cast<std::size_t>(params_.min_samples_split)) {
            return idx;
        }

        int best_f = -1;
        double best_t = 0.0;
        double best_gain = kScoreEps;
        const double parent = leaf_gain(g, h);
        std::vector<std::size_t> order(rows);
        for (std::size_t f = 0; f < data_.n_features(); ++f) {
            std::sort(order.begin(), order.end(),
                      [&](std::size_t a, std::size_t b) { return data_.at(a, f) < data_.at(b, f); });
            double gl = 0.0;
            double hl = 0.0;
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                gl += grad_[order[i]];
                hl += hess_[order[i]];
                const double v = data_.at(order[i], f);
                const double next = data_.at(order[i + 1], f);
                if (v == next) continue;
                const double gain = leaf_gain(gl, hl) + leaf_gain(g - gl, h - hl) - parent;
                if (gain > best_gain + (best_f < 0 ? 0.0 : kScoreEps)) {
                    best_f = static_cast<int>(f);
                    best_t = midpoint(v, next);
                    best_gain = gain;
                }
            }
        }
        if (best_f < 0) return idx;

        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (std::size_t r : rows) {
            (data_.at(r, static_cast<std::size_t>(best_f)) <= best_t ? left : right).push_back(r);
        }
        rows.clear();
        const int l = grow(left, depth + 1);
        const int r = grow(right, depth + 1);
        TreeNode& node = tree_.nodes[idx];
        node.feature = best_f;
        node.threshold = best_t;
        node.left = l;
        node.right = r;
        return idx;
    }

    const Dataset& data_;
    const ModelParams& params_;
    const std::vector<double>& grad_;
    const std::vector<double>& hess_;
    Tree tree_;
};

std::vector<std::size_t> all_rows(const Dataset& data) {
    std::vector<std::size_t> rows(data.size());
    std::iota(rows.begin(), rows.end(), 0);
    return rows;
}

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double boosted_margin(const TrainedModel& m, std::span<const double> x, std::size_t rounds) {
    double sum = 0.0;
    for (std::size_t t = 0; t < rounds; ++t) sum += m.trees[t].leaf_for(x).value;
    return m.base_score + m.params.learning_rate * sum;
}

void check_width(const TrainedModel& model, std::size_t width) {
    if (width != model.n_features()) {
        throw Error(ErrorCode::SchemaMismatch, "model expects " + std::to_string(model.n_features()) +
                                                   " features, got " + std::to_string(width));
    }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        d += diff * diff;
    }
    return d;
}

}  // namespace

// Dataset -------------------------------------------------------------------

Dataset Dataset::edit_schema() {
    std::vector<std::string> names;
    for (auto n : editex::feature_names()) names.emplace_back(n);
    return Dataset(std::move(names));
}

void Dataset::add_row(std::span<const double> values, int label, std::int64_t timestamp) {
    if (values.size() != names_.size()) {
        throw Error(ErrorCode::SchemaMismatch, "row has " + std::to_string(values.size()) +
                                                   " values, dataset has " + std::to_string(names_.size()) +
                                                   " features");
    }
    if (label != 0 && label != 1) throw Error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
    values_.insert(values_.end(), values.begin(), values.end());
    labels_.push_back(label);
    timestamps_.push_back(timestamp);
}

std::size_t Dataset::count(int label) const {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
    Dataset out(names_);
    for (std::size_t r : rows) out.add_row(row(r), labels_[r], timestamps_[r]);
    return out;
}

Dataset Dataset::select_columns(std::span<const std::size_t> columns) const {
    std::vector<std::string> names;
    for (std::size_t c : columns) names.push_back(names_.at(c));
    Dataset out(std::move(names));
    std::vector<double> buf(columns.size());
    for (std::size_t i = 0; i < size(); ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j) buf[j] = at(i, columns[j]);
        out.add_row(buf, labels_[i], timestamps_[i]);
    }
    return out;
}

Dataset Dataset::with_labels(std::vector<int> labels) const {
    if (labels.size() != labels_.size()) throw Error(ErrorCode::LengthMismatch, "label count mismatch");
    Dataset out = *this;
    out.labels_ = std::move(labels);
    return out;
}

Dataset make_dataset(std::span<const LabeledExample> examples) {
    Dataset out = Dataset::edit_schema();
    for (const auto& ex : examples) {
        out.add_row(ex.features.to_array(), ex.label == Verdict::Rejected ? 1 : 0, ex.timestamp);
    }
    return out;
}

// Params --------------------------------------------------------------------

std::string_view algo_name(Algo algo) noexcept {
    switch (algo) {
        case Algo::Cart: return "cart";
        case Algo::RandomForest: return "rf";
        case Algo::Knn: return "knn";
        case Algo::GradBoost: return "gbt";
    }
    return "unknown";
}

std::optional<Algo> parse_algo(std::string_view name) {
    for (Algo a : {Algo::Cart, Algo::RandomForest, Algo::Knn, Algo::GradBoost}) {
        if (algo_name(a) == name) return a;
    }
    return std::nullopt;
}

ModelParams ModelParams::defaults(Algo algo) {
    ModelParams p;
    p.algo = algo;
    p.max_depth = algo == Algo::GradBoost ? 3 : 5;
    return p;
}

// Trees ---------------------------------------------------------------------

const TreeNode& Tree::leaf_for(std::span<const double> x) const {
    const TreeNode* node = &nodes.front();
    while (!node->is_leaf()) {
        const int next = x[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left : node->right;
        node = &nodes[static_cast<std::size_t>(next)];
    }
    return *node;
}

int Tree::depth() const {
    if (nodes.empty()) return 0;
    int deepest = 0;
    std::vector<std::pair<int, int>> stack{{0, 0}};
    while (!stack.empty()) {
        const auto [i, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        const TreeNode& n = nodes[static_cast<std::size_t>(i)];
        if (!n.is_leaf()) {
            stack.emplace_back(n.left, d + 1);
            stack.emplace_back(n.right, d + 1);
        }
    }
    return deepest;
}

// Training ------------------------------------------------------------------

TrainedModel train_cart(const Dataset& data, const ModelParams& params) {
    require_params(params);
    require_trainable(data, "cart");
    if (auto m = degenerate_model(data, params, Algo::Cart)) return *m;
    TrainedModel m = model_shell(data, params, Algo::Cart);
    m.trees.push_back(ClassificationTreeBuilder(data, m.params, data.n_features(), nullptr).build(all_rows(data)));
    return m;
}

TrainedModel train_random_forest(const Dataset& data, const ModelParams& params) {
    require_params(params);
    require_trainable(data, "random forest");
    if (params.n_trees < 1) throw Error(ErrorCode::InvalidArgument, "random forest needs at least one tree");
    if (auto m = degenerate_model(data, params, Algo::RandomForest)) return *m;
    TrainedModel m = model_shell(data, params, Algo::RandomForest);

    const auto mtry = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(data.n_features()))));
    const auto n_trees = static_cast<std::size_t>(params.n_trees);
    m.trees.resize(n_trees);

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t t = next.fetch_add(1); t < n_trees; t = next.fetch_add(1)) {
            Rng rng = Rng::derive(params.seed, t);
            std::vector<std::size_t> sample(data.size());
            for (auto& r : sample) r = rng.index(data.size());
            m.trees[t] = ClassificationTreeBuilder(data, m.params, mtry, &rng).build(std::move(sample));
        }
    };
    const std::size_t n_threads =
        std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::min<std::size_t>(n_trees, 16));
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < n_threads; ++i) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    return m;
}

TrainedModel train_knn(const Dataset& data, const ModelParams& params) {
    require_params(params);
    require_trainable(data, "knn");
    if (auto d = degenerate_model(data, params, Algo::Knn)) return *d;
    if (data.size() < static_cast<std::size_t>(params.k_neighbors)) {
        throw Error(ErrorCode::InsufficientRows, "knn needs at least k=" + std::to_string(params.k_neighbors) +
                                                     " rows, got " + std::to_string(data.size()));
    }
    TrainedModel m = model_shell(data, params, Algo::Knn);
    const std::size_t n = data.size();
    const std::size_t f = data.n_features();
    m.knn.means.assign(f, 0.0);
    m.knn.stds.assign(f, 0.0);
    for (std::size_t j = 0; j < f; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += data.at(i, j);
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) ss += (data.at(i, j) - mean) * (data.at(i, j) - mean);
        m.knn.means[j] = mean;
        m.knn.stds[j] = std::sqrt(ss / static_cast<double>(n));
    }
    m.knn.rows.resize(n * f);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < f; ++j) {
            const double sd = m.knn.stds[j];
            m.knn.rows[i * f + j] = sd > 0.0 ? (data.at(i, j) - m.knn.means[j]) / sd : 0.0;
        }
    }
    m.knn.labels = data.labels();
    return m;
}

TrainedModel train_gradboost(const Dataset& data, const ModelParams& params) {
    require_params(params);
    require_trainable(data, "gradient boosting");
    if (auto m = degenerate_model(data, params, Algo::GradBoost)) return *m;
    TrainedModel m = model_shell(data, params, Algo::GradBoost);

    const std::size_t n = data.size();
    const double p1 = static_cast<double>(data.count(1)) / static_cast<double>(n);
    m.base_score = std::log(p1 / (1.0 - p1));

    std::vector<double> margin(n, m.base_score);
    std::vector<double> grad(n);
    std::vector<double> hess(n);
    for (int round = 0; round < params.n_trees; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(margin[i]);
            grad[i] = p - static_cast<double>(data.label(i));
            hess[i] = p * (1.0 - p);
        }
        Tree tree = RegressionTreeBuilder(data, m.params, grad, hess).build(all_rows(data));
        for (std::size_t i = 0; i < n; ++i) margin[i] += params.learning_rate * tree.leaf_for(data.row(i)).value;
        m.trees.push_back(std::move(tree));
    }
    return m;
}

TrainedModel train(const Dataset& data, const ModelParams& params) {
    switch (params.algo) {
        case Algo::Cart: return train_cart(data, params);
        case Algo::RandomForest: return train_random_forest(data, params);
        case Algo::Knn: return train_knn(data, params);
        case Algo::GradBoost: return train_gradboost(data, params);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown algorithm");
}

// Prediction ----------------------------------------------------------------

Prediction predict(const TrainedModel& model, std::span<const double> x) {
    check_width(model, x.size());
    if (model.constant_class) {
        const int c = *model.constant_class;
        return {c, static_cast<double>(c)};
    }

    double score = 0.0;
    switch (model.algo) {
        case Algo::Cart: {
            const TreeNode& leaf = model.trees.front().leaf_for(x);
            score = static_cast<double>(leaf.count1) / static_cast<double>(leaf.count0 + leaf.count1);
            break;
        }
        case Algo::RandomForest: {
            std::size_t votes = 0;
            for (const Tree& t : model.trees) {
                const TreeNode& leaf = t.leaf_for(x);
                if (leaf.count1 >= leaf.count0) ++votes;
            }
            score = static_cast<double>(votes) / static_cast<double>(model.trees.size());
            break;
        }
        case Algo::Knn: {
            const std::size_t f = model.n_features();
            const std::size_t n = model.knn.labels.size();
            const auto k = static_cast<std::size_t>(model.params.k_neighbors);
            std::vector<double> q(f);
            for (std::size_t j = 0; j < f; ++j) {
                const double sd = model.knn.stds[j];
                q[j] = sd > 0.0 ? (x[j] - model.knn.means[j]) / sd : 0.0;
            }
            std::vector<std::pair<double, std::size_t>> dist(n);
            for (std::size_t i = 0; i < n; ++i) {
                dist[i] = {squared_distance(q, std::span<const double>(model.knn.rows.data() + i * f, f)), i};
            }
            std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
            std::size_t ones = 0;
            for (std::size_t i = 0; i < k; ++i) ones += model.knn.labels[dist[i].second] == 1 ? 1 : 0;
            score = static_cast<double>(ones) / static_cast<double>(k);
            if (2 * ones == k && model.knn.labels[dist[0].second] == 0) {
                // Tied vote goes to the nearest neighbour's class; keep the
                // score just under the threshold so label and score agree.
                score = std::nextafter(0.5, 0.0);
            }
            break;
        }
        case Algo::GradBoost:
            score = sigmoid(boosted_margin(model, x, model.trees.size()));
            break;
    }
    return {score >= 0.5 ? 1 : 0, score};
}

Prediction predict(const TrainedModel& model, const FeatureVector& fv) {
    check_width(model, kFeatureCount);
    const auto& names = editex::feature_names();
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        if (model.feature_names[i] != names[i]) {
            throw Error(ErrorCode::SchemaMismatch, "model feature '" + model.feature_names[i] +
                                                       "' does not match '" + std::string(names[i]) + "'");
        }
    }
    const auto values = fv.to_array();
    return predict(model, std::span<const double>(values));
}

std::vector<double> boosting_loss_curve(const TrainedModel& model, const Dataset& data) {
    if (model.algo != Algo::GradBoost) {
        throw Error(ErrorCode::InvalidArgument, "loss curve needs a boosted model");
    }
    std::vector<double> curve;
    for (std::size_t rounds = 0; rounds <= model.trees.size(); ++rounds) {
        double loss = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double z = boosted_margin(model, data.row(i), rounds);
            // log(1 + exp(-y'z)) with y' in {-1, +1}
            const double yz = data.label(i) == 1 ? z : -z;
            loss += yz > 0 ? std::log1p(std::exp(-yz)) : -yz + std::log1p(std::exp(yz));
        }
        curve.push_back(loss / static_cast<double>(data.size()));
    }
    return curve;
}

// SMOTE ---------------------------------------------------------------------

Dataset smote(const Dataset& data, int k, std::uint64_t seed) {
    const std::size_t ones = data.count(1);
    const std::size_t zeros = data.size() - ones;
    if (ones == zeros) return data;
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "smote: k must be positive");

    const int minority = ones < zeros ? 1 : 0;
    const std::size_t need = (ones < zeros ? zeros : ones) - (ones < zeros ? ones : zeros);
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.label(i) == minority) pool.push_back(i);
    }
    if (pool.size() < 2 || static_cast<std::size_t>(k) > pool.size() - 1) {
        throw Error(ErrorCode::TooFewMinoritySamples,
                    "smote: minority class has " + std::to_string(pool.size()) + " rows, k=" + std::to_string(k));
    }

    const auto kk = static_cast<std::size_t>(k);
    std::vector<std::vector<std::size_t>> neighbours(pool.size());
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t a = 0; a < pool.size(); ++a) {
        dist.clear();
        for (std::size_t b = 0; b < pool.size(); ++b) {
            if (a != b) dist.emplace_back(squared_distance(data.row(pool[a]), data.row(pool[b])), b);
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
        for (std::size_t i = 0; i < kk; ++i) neighbours[a].push_back(dist[i].second);
    }

    Dataset out = data;
    Rng rng(seed);
    std::vector<double> synth(data.n_features());
    for (std::size_t s = 0; s < need; ++s) {
        const std::size_t a = rng.index(pool.size());
        const std::size_t b = neighbours[a][rng.index(kk)];
        const double lambda = rng.uniform_closed01();
        const auto xa = data.row(pool[a]);
        const auto xb = data.row(pool[b]);
        for (std::size_t j = 0; j < synth.size(); ++j) synth[j] = xa[j] + lambda * (xb[j] - xa[j]);
        out.add_row(synth, minority, data.timestamp(pool[a]));
    }
    return out;
}

}  // namespace editex::ml
