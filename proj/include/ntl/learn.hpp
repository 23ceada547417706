#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ntl/core.hpp"
#include "ntl/rng.hpp"

namespace ntl {

// ---------------------------------------------------------------------------
// Standardization
// ---------------------------------------------------------------------------

// Column-wise z-scoring parameters, fitted on training rows only. Population
// standard deviation; zero-variance columns are flagged and map to zero.
struct StandardizationParams {
    std::vector<double> means;
    std::vector<double> stds;

    bool operator==(const StandardizationParams&) const = default;
};

inline StandardizationParams fit_standardizer(const DataMatrix& matrix) {
    if (matrix.rows == 0) throw Error(ErrorCode::empty_result, "cannot standardize an empty matrix");
    StandardizationParams params;
    params.means.assign(matrix.cols, 0.0);
    params.stds.assign(matrix.cols, 0.0);
    const double n = static_cast<double>(matrix.rows);
    for (std::size_t r = 0; r < matrix.rows; ++r)
        for (std::size_t c = 0; c < matrix.cols; ++c) params.means[c] += matrix.at(r, c);
    for (auto& m : params.means) m /= n;
    for (std::size_t r = 0; r < matrix.rows; ++r)
        for (std::size_t c = 0; c < matrix.cols; ++c) {
            const double d = matrix.at(r, c) - params.means[c];
            params.stds[c] += d * d;
        }
    for (auto& s : params.stds) s = std::sqrt(s / n);
    return params;
}

inline DataMatrix apply_standardizer(const StandardizationParams& params, const DataMatrix& matrix) {
    if (matrix.cols != params.means.size())
        throw Error(ErrorCode::schema_mismatch, "standardizer fitted on a different column count");
    DataMatrix out(matrix.rows, matrix.cols);
    for (std::size_t r = 0; r < matrix.rows; ++r)
        for (std::size_t c = 0; c < matrix.cols; ++c) {
            const double s = params.stds[c];
            out.at(r, c) = s > 0.0 ? (matrix.at(r, c) - params.means[c]) / s : 0.0;
        }
    return out;
}

// ---------------------------------------------------------------------------
// Hyperparameters and the model interface
// ---------------------------------------------------------------------------

enum class ModelKind { decision_tree, random_forest, gradient_boosted_tree, linear_svm };

inline const char* model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::decision_tree: return "dt";
        case ModelKind::random_forest: return "rf";
        case ModelKind::gradient_boosted_tree: return "gbt";
        case ModelKind::linear_svm: return "lsvm";
    }
    return "?";
}

// Named hyperparameter values; each model reads what it needs and falls back
// to its documented default.
struct HyperparameterSet {
    std::vector<std::pair<std::string, double>> values;

    double get(const std::string& name, double fallback) const {
        for (const auto& [k, v] : values)
            if (k == name) return v;
        return fallback;
    }

    void set(const std::string& name, double value) {
        for (auto& [k, v] : values)
            if (k == name) {
                v = value;
                return;
            }
        values.emplace_back(name, value);
    }

    std::string describe() const {
        std::string out;
        for (const auto& [k, v] : values) {
            if (!out.empty()) out += ' ';
            out += k + "=" + [&] {
                char buf[32];
                const int len = std::snprintf(buf, sizeof buf, "%g", v);
                return std::string(buf, static_cast<std::size_t>(len));
            }();
        }
        return out;
    }
};

// A fitted classifier exposing a real-valued decision score per sample;
// higher means more NTL-like.
class Model {
public:
    virtual ~Model() = default;
    virtual ModelKind kind() const = 0;
    virtual double decision_score(std::span<const double> row) const = 0;
    // Operating point for confusion-based scoring: 0.5 for probability-like
    // scores, 0 for the SVM margin.
    virtual double default_threshold() const = 0;
    // Versioned structured text dump for debugging; not a stable API.
    virtual void dump(std::ostream& out) const = 0;
};

inline std::vector<double> score_rows(const Model& model, const DataMatrix& matrix) {
    std::vector<double> scores(matrix.rows);
    for (std::size_t r = 0; r < matrix.rows; ++r) scores[r] = model.decision_score(matrix.row(r));
    return scores;
}

// ---------------------------------------------------------------------------
// Tree machinery
// ---------------------------------------------------------------------------

// One node of a binary tree; feature < 0 marks a leaf. Leaf value is the
// positive fraction for classification trees and the fitted response for
// regression trees.
struct TreeNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;
    std::int64_t sample_count = 0;

    bool is_leaf() const { return feature < 0; }
};

inline double tree_predict(const std::vector<TreeNode>& nodes, std::span<const double> row) {
    std::int32_t at = 0;
    while (!nodes[at].is_leaf())
        at = row[static_cast<std::size_t>(nodes[at].feature)] < nodes[at].threshold
                 ? nodes[at].left
                 : nodes[at].right;
    return nodes[at].value;
}

struct TreeBuildConfig {
    int max_depth = 8;
    std::int64_t min_samples_split = 2;
    std::int64_t min_samples_leaf = 1;
    double max_features_fraction = 1.0;
};

namespace detail {

// Gini on binary labels with integer sample weights (bootstrap multiplicity).
struct GiniCriterion {
    std::span<const int> labels;
    std::span<const std::int64_t> weights;

    struct Accum {
        std::int64_t w = 0;
        std::int64_t pos = 0;
    };

    Accum node_total(std::span<const std::int32_t> ids) const {
        Accum a;
        for (const auto id : ids) {
            a.w += weights[id];
            if (labels[id] == 1) a.pos += weights[id];
        }
        return a;
    }
    void add(Accum& a, std::int32_t id) const {
        a.w += weights[id];
        if (labels[id] == 1) a.pos += weights[id];
    }
    static Accum minus(const Accum& total, const Accum& left) {
        return {total.w - left.w, total.pos - left.pos};
    }
    static std::int64_t weight(const Accum& a) { return a.w; }
    // Weighted Gini contribution: w * 2p(1-p) = 2 * pos * neg / w.
    static double impurity(const Accum& a) {
        return 2.0 * static_cast<double>(a.pos) *
               static_cast<double>(a.w - a.pos) / static_cast<double>(a.w);
    }
    static bool pure(const Accum& a) { return a.pos == 0 || a.pos == a.w; }
    double leaf_value(std::span<const std::int32_t> ids) const {
        const Accum a = node_total(ids);
        return static_cast<double>(a.pos) / static_cast<double>(a.w);
    }
};

// Squared-error splits on real targets; leaf values take one Newton step
// (sum of gradients over sum of hessians) for the boosting stages.
struct NewtonRegressionCriterion {
    std::span<const double> targets;
    std::span<const double> hessians;

    struct Accum {
        std::int64_t w = 0;
        double sum = 0.0;
        double sum_sq = 0.0;
    };

    Accum node_total(std::span<const std::int32_t> ids) const {
        Accum a;
        for (const auto id : ids) {
            a.w += 1;
            a.sum += targets[id];
            a.sum_sq += targets[id] * targets[id];
        }
        return a;
    }
    void add(Accum& a, std::int32_t id) const {
        a.w += 1;
        a.sum += targets[id];
        a.sum_sq += targets[id] * targets[id];
    }
    static Accum minus(const Accum& total, const Accum& left) {
        return {total.w - left.w, total.sum - left.sum, total.sum_sq - left.sum_sq};
    }
    static std::int64_t weight(const Accum& a) { return a.w; }
    // Within-node SSE up to the node-constant sum of squares.
    static double impurity(const Accum& a) {
        return -(a.sum * a.sum) / static_cast<double>(a.w);
    }
    static bool pure(const Accum& a) {
        return a.sum_sq - a.sum * a.sum / static_cast<double>(a.w) <= 0.0;
    }
    double leaf_value(std::span<const std::int32_t> ids) const {
        double grad = 0.0, hess = 0.0;
        for (const auto id : ids) {
            grad += targets[id];
            hess += hessians[id];
        }
        return hess > 1e-12 ? grad / hess : 0.0;
    }
};

// CART grower over presorted per-feature index arrays. Splits search
// midpoints between distinct consecutive values; ties between equally good
// splits resolve to the lowest feature index, then the lowest threshold
// (candidate features are scanned in ascending order and only strict
// improvements are accepted).
template <typename Criterion>
class TreeGrower {
public:
    TreeGrower(const DataMatrix& x, const Criterion& criterion, const TreeBuildConfig& config,
               Rng& rng)
        : x_(x), criterion_(criterion), config_(config), rng_(rng) {}

    std::vector<TreeNode> grow(std::vector<std::int32_t> samples) {
        samples_ = std::move(samples);
        const std::size_t m = samples_.size();
        const std::size_t f_count = x_.cols;
        orders_.assign(f_count * m, 0);
        for (std::size_t f = 0; f < f_count; ++f) {
            auto slice = order_slice(f, 0, m);
            std::copy(samples_.begin(), samples_.end(), slice.begin());
            std::sort(slice.begin(), slice.end(), [&](std::int32_t a, std::int32_t b) {
                const double va = x_.at(a, f), vb = x_.at(b, f);
                return va < vb || (va == vb && a < b);
            });
        }
        buffer_.assign(m, 0);
        goes_left_.assign(x_.rows, 0);
        feature_scratch_.resize(f_count);
        nodes_.clear();
        build_node(0, m, 0);
        return std::move(nodes_);
    }

private:
    std::span<std::int32_t> order_slice(std::size_t f, std::size_t lo, std::size_t hi) {
        return {orders_.data() + f * samples_.size() + lo, hi - lo};
    }
    std::span<const std::int32_t> node_ids(std::size_t lo, std::size_t hi) {
        // With no features there are no order arrays; the node is the root.
        if (x_.cols == 0) return {samples_.data() + lo, hi - lo};
        return order_slice(0, lo, hi);
    }

    std::int32_t make_leaf(std::size_t lo, std::size_t hi, const typename Criterion::Accum& total) {
        TreeNode node;
        node.value = criterion_.leaf_value(node_ids(lo, hi));
        node.sample_count = Criterion::weight(total);
        nodes_.push_back(node);
        return static_cast<std::int32_t>(nodes_.size() - 1);
    }

    std::int32_t build_node(std::size_t lo, std::size_t hi, int depth) {
        const auto total = criterion_.node_total(node_ids(lo, hi));
        const std::size_t f_count = x_.cols;
        if (depth >= config_.max_depth || Criterion::weight(total) < config_.min_samples_split ||
            Criterion::pure(total) || f_count == 0 || hi - lo < 2)
            return make_leaf(lo, hi, total);

        // Candidate features, ascending. No RNG draw when all are in play.
        std::size_t k = static_cast<std::size_t>(
            std::ceil(config_.max_features_fraction * static_cast<double>(f_count)));
        k = std::clamp<std::size_t>(k, 1, f_count);
        std::iota(feature_scratch_.begin(), feature_scratch_.end(), 0);
        if (k < f_count) {
            for (std::size_t i = 0; i < k; ++i) {
                const std::size_t j = i + static_cast<std::size_t>(rng_.below(f_count - i));
                std::swap(feature_scratch_[i], feature_scratch_[j]);
            }
            std::sort(feature_scratch_.begin(), feature_scratch_.begin() + static_cast<std::ptrdiff_t>(k));
        }

        double best_score = std::numeric_limits<double>::infinity();
        std::size_t best_feature = 0;
        double best_threshold = 0.0;
        bool found = false;
        for (std::size_t ci = 0; ci < k; ++ci) {
            const std::size_t f = feature_scratch_[ci];
            const auto slice = order_slice(f, lo, hi);
            typename Criterion::Accum left;
            for (std::size_t i = 0; i + 1 < slice.size(); ++i) {
                criterion_.add(left, slice[i]);
                const double v = x_.at(slice[i], f);
                const double v_next = x_.at(slice[i + 1], f);
                if (v == v_next) continue;
                const auto right = Criterion::minus(total, left);
                if (Criterion::weight(left) < config_.min_samples_leaf ||
                    Criterion::weight(right) < config_.min_samples_leaf)
                    continue;
                const double score = Criterion::impurity(left) + Criterion::impurity(right);
                if (score < best_score) {
                    best_score = score;
                    best_feature = f;
                    best_threshold = 0.5 * (v + v_next);
                    found = true;
                }
            }
        }
        if (!found) return make_leaf(lo, hi, total);

        // Stable partition of every feature's order slice keeps each child
        // presorted.
        std::size_t left_count = 0;
        for (const auto id : order_slice(best_feature, lo, hi)) {
            const bool is_left = x_.at(id, best_feature) < best_threshold;
            goes_left_[id] = is_left ? 1 : 0;
            if (is_left) ++left_count;
        }
        for (std::size_t f = 0; f < f_count; ++f) {
            const auto slice = order_slice(f, lo, hi);
            std::size_t l = 0, r = left_count;
            for (const auto id : slice) buffer_[goes_left_[id] ? l++ : r++] = id;
            std::copy(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(slice.size()),
                      slice.begin());
        }

        const std::int32_t index = static_cast<std::int32_t>(nodes_.size());
        nodes_.emplace_back();
        nodes_[index].feature = static_cast<std::int32_t>(best_feature);
        nodes_[index].threshold = best_threshold;
        nodes_[index].sample_count = Criterion::weight(total);
        const std::int32_t left_child = build_node(lo, lo + left_count, depth + 1);
        const std::int32_t right_child = build_node(lo + left_count, hi, depth + 1);
        nodes_[index].left = left_child;
        nodes_[index].right = right_child;
        return index;
    }

    const DataMatrix& x_;
    Criterion criterion_;
    TreeBuildConfig config_;
    Rng& rng_;
    std::vector<std::int32_t> samples_;
    std::vector<std::int32_t> orders_;
    std::vector<std::int32_t> buffer_;
    std::vector<char> goes_left_;
    std::vector<std::size_t> feature_scratch_;
    std::vector<TreeNode> nodes_;
};

inline void check_training_input(const DataMatrix& x, const std::vector<int>& y) {
    if (x.rows == 0 || x.rows != y.size())
        throw Error(ErrorCode::schema_mismatch, "training matrix and labels disagree");
}

inline bool single_class(const std::vector<int>& y) {
    return std::all_of(y.begin(), y.end(), [&](int v) { return v == y.front(); });
}

inline void dump_tree(std::ostream& out, const std::vector<TreeNode>& nodes) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& n = nodes[i];
        if (n.is_leaf())
            out << i << " leaf value " << n.value << " count " << n.sample_count << '\n';
        else
            out << i << " split f" << n.feature << " < " << n.threshold << " -> " << n.left << ' '
                << n.right << '\n';
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Decision tree
// ---------------------------------------------------------------------------

class DecisionTreeModel final : public Model {
public:
    DecisionTreeModel(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

    ModelKind kind() const override { return ModelKind::decision_tree; }
    double decision_score(std::span<const double> row) const override {
        return tree_predict(nodes_, row);
    }
    double default_threshold() const override { return 0.5; }
    void dump(std::ostream& out) const override {
        out << "ntl-model dt v1 nodes " << nodes_.size() << '\n';
        detail::dump_tree(out, nodes_);
    }

    const std::vector<TreeNode>& nodes() const { return nodes_; }

private:
    std::vector<TreeNode> nodes_;
};

namespace detail {

inline TreeBuildConfig tree_config_from(const HyperparameterSet& hp) {
    TreeBuildConfig config;
    config.max_depth = static_cast<int>(hp.get("max_depth", 8));
    config.min_samples_split = static_cast<std::int64_t>(hp.get("min_samples_split", 2));
    config.min_samples_leaf = static_cast<std::int64_t>(hp.get("min_samples_leaf", 1));
    config.max_features_fraction = hp.get("max_features_fraction", 1.0);
    if (config.min_samples_split < 2 || config.min_samples_leaf < 1 ||
        config.max_features_fraction <= 0.0 || config.max_features_fraction > 1.0 ||
        config.max_depth < 0)
        throw Error(ErrorCode::invalid_config, "bad tree hyperparameters");
    return config;
}

inline std::vector<TreeNode> grow_classification_tree(const DataMatrix& x,
                                                      const std::vector<int>& y,
                                                      const std::vector<std::int64_t>& weights,
                                                      const TreeBuildConfig& config, Rng& rng) {
    std::vector<std::int32_t> samples;
    samples.reserve(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i)
        if (weights[i] > 0) samples.push_back(static_cast<std::int32_t>(i));
    GiniCriterion criterion{y, weights};
    TreeGrower<GiniCriterion> grower(x, criterion, config, rng);
    return grower.grow(std::move(samples));
}

}  // namespace detail

// CART with Gini impurity and exhaustive midpoint threshold search over a
// per-node random feature subset. Single-class input yields a constant-score
// model rather than an error.
inline std::unique_ptr<DecisionTreeModel> train_decision_tree(const DataMatrix& x,
                                                              const std::vector<int>& y,
                                                              const HyperparameterSet& hp,
                                                              std::uint64_t seed) {
    detail::check_training_input(x, y);
    const auto config = detail::tree_config_from(hp);
    Rng rng(derive_seed(seed, "tree", 0));
    std::vector<std::int64_t> weights(x.rows, 1);
    auto nodes = detail::grow_classification_tree(x, y, weights, config, rng);
    return std::make_unique<DecisionTreeModel>(std::move(nodes));
}

// ---------------------------------------------------------------------------
// Random forest
// ---------------------------------------------------------------------------

class RandomForestModel final : public Model {
public:
    explicit RandomForestModel(std::vector<std::vector<TreeNode>> trees)
        : trees_(std::move(trees)) {}

    ModelKind kind() const override { return ModelKind::random_forest; }
    double decision_score(std::span<const double> row) const override {
        double acc = 0.0;
        for (const auto& tree : trees_) acc += tree_predict(tree, row);
        return acc / static_cast<double>(trees_.size());
    }
    double default_threshold() const override { return 0.5; }
    void dump(std::ostream& out) const override {
        out << "ntl-model rf v1 trees " << trees_.size() << '\n';
        for (const auto& tree : trees_) detail::dump_tree(out, tree);
    }

    std::size_t tree_count() const { return trees_.size(); }

private:
    std::vector<std::vector<TreeNode>> trees_;
};

// Bagged CART ensemble: every tree trains on a bootstrap resample of size n
// (when bootstrap is on) with per-node feature subsampling; the score is the
// mean leaf fraction. Tree t draws from the derived stream (seed, "tree", t),
// so a one-tree forest without bagging reproduces the decision tree exactly.
inline std::unique_ptr<RandomForestModel> train_random_forest(const DataMatrix& x,
                                                              const std::vector<int>& y,
                                                              const HyperparameterSet& hp,
                                                              std::uint64_t seed) {
    detail::check_training_input(x, y);
    const auto config = detail::tree_config_from(hp);
    const int n_estimators = static_cast<int>(hp.get("n_estimators", 100));
    const bool bootstrap = hp.get("bootstrap", 1) != 0;
    if (n_estimators < 1) throw Error(ErrorCode::invalid_config, "n_estimators must be >= 1");

    std::vector<std::vector<TreeNode>> trees;
    trees.reserve(static_cast<std::size_t>(n_estimators));
    for (int t = 0; t < n_estimators; ++t) {
        Rng rng(derive_seed(seed, "tree", static_cast<std::uint64_t>(t)));
        std::vector<std::int64_t> weights;
        if (bootstrap) {
            weights.assign(x.rows, 0);
            for (std::size_t i = 0; i < x.rows; ++i) ++weights[rng.below(x.rows)];
        } else {
            weights.assign(x.rows, 1);
        }
        trees.push_back(detail::grow_classification_tree(x, y, weights, config, rng));
    }
    return std::make_unique<RandomForestModel>(std::move(trees));
}

// ---------------------------------------------------------------------------
// Gradient-boosted trees
// ---------------------------------------------------------------------------

class GbtModel final : public Model {
public:
    GbtModel(double prior_logit, double learning_rate, std::vector<std::vector<TreeNode>> trees)
        : prior_logit_(prior_logit), learning_rate_(learning_rate), trees_(std::move(trees)) {}

    ModelKind kind() const override { return ModelKind::gradient_boosted_tree; }
    double decision_score(std::span<const double> row) const override {
        double logit = prior_logit_;
        for (const auto& tree : trees_) logit += learning_rate_ * tree_predict(tree, row);
        return 1.0 / (1.0 + std::exp(-logit));
    }
    double default_threshold() const override { return 0.5; }
    void dump(std::ostream& out) const override {
        out << "ntl-model gbt v1 prior " << prior_logit_ << " lr " << learning_rate_ << " trees "
            << trees_.size() << '\n';
        for (const auto& tree : trees_) detail::dump_tree(out, tree);
    }

private:
    double prior_logit_;
    double learning_rate_;
    std::vector<std::vector<TreeNode>> trees_;
};

class ConstantModel final : public Model {
public:
    ConstantModel(ModelKind kind, double score, double threshold)
        : kind_(kind), score_(score), threshold_(threshold) {}

    ModelKind kind() const override { return kind_; }
    double decision_score(std::span<const double>) const override { return score_; }
    double default_threshold() const override { return threshold_; }
    void dump(std::ostream& out) const override {
        out << "ntl-model constant v1 kind " << model_kind_name(kind_) << " score " << score_
            << '\n';
    }

private:
    ModelKind kind_;
    double score_;
    double threshold_;
};

// Stagewise additive logistic boosting: start from the prior log-odds, fit a
// squared-error regression tree to the gradient residuals y - sigmoid(F) each
// stage, set leaf values by one Newton step, and step by the learning rate.
inline std::unique_ptr<Model> train_gbt(const DataMatrix& x, const std::vector<int>& y,
                                        const HyperparameterSet& hp, std::uint64_t seed) {
    detail::check_training_input(x, y);
    (void)seed;  // deterministic: all features, no resampling
    const int n_estimators = static_cast<int>(hp.get("n_estimators", 100));
    const double learning_rate = hp.get("learning_rate", 0.1);
    if (n_estimators < 0 || learning_rate < 0.0)
        throw Error(ErrorCode::invalid_config, "bad boosting hyperparameters");
    TreeBuildConfig config;
    config.max_depth = static_cast<int>(hp.get("max_depth", 3));
    config.min_samples_split = 2;
    config.min_samples_leaf = 1;
    config.max_features_fraction = 1.0;

    const double base_rate =
        static_cast<double>(std::count(y.begin(), y.end(), 1)) / static_cast<double>(y.size());
    if (detail::single_class(y))
        return std::make_unique<ConstantModel>(ModelKind::gradient_boosted_tree, base_rate, 0.5);

    const double prior_logit = std::log(base_rate / (1.0 - base_rate));
    std::vector<double> logits(x.rows, prior_logit);
    std::vector<double> residuals(x.rows), hessians(x.rows);
    std::vector<std::int32_t> all_samples(x.rows);
    std::iota(all_samples.begin(), all_samples.end(), 0);

    std::vector<std::vector<TreeNode>> trees;
    trees.reserve(static_cast<std::size_t>(n_estimators));
    Rng rng(0);  // grower takes full feature sets; never draws
    for (int stage = 0; stage < n_estimators; ++stage) {
        for (std::size_t i = 0; i < x.rows; ++i) {
            const double p = 1.0 / (1.0 + std::exp(-logits[i]));
            residuals[i] = static_cast<double>(y[i]) - p;
            hessians[i] = p * (1.0 - p);
        }
        detail::NewtonRegressionCriterion criterion{residuals, hessians};
        detail::TreeGrower<detail::NewtonRegressionCriterion> grower(x, criterion, config, rng);
        auto tree = grower.grow(all_samples);
        for (std::size_t i = 0; i < x.rows; ++i)
            logits[i] += learning_rate * tree_predict(tree, x.row(i));
        trees.push_back(std::move(tree));
    }
    return std::make_unique<GbtModel>(prior_logit, learning_rate, std::move(trees));
}

// ---------------------------------------------------------------------------
// Linear SVM (Pegasos)
// ---------------------------------------------------------------------------

class LinearSvmModel final : public Model {
public:
    LinearSvmModel(std::vector<double> w, double b, std::vector<double> epoch_objectives)
        : w_(std::move(w)), b_(b), epoch_objectives_(std::move(epoch_objectives)) {}

    ModelKind kind() const override { return ModelKind::linear_svm; }
    double decision_score(std::span<const double> row) const override {
        double acc = b_;
        for (std::size_t i = 0; i < w_.size(); ++i) acc += w_[i] * row[i];
        return acc;
    }
    double default_threshold() const override { return 0.0; }
    void dump(std::ostream& out) const override {
        out << "ntl-model lsvm v1 bias " << b_ << " weights";
        for (const double w : w_) out << ' ' << w;
        out << '\n';
    }

    const std::vector<double>& weights() const { return w_; }
    double bias() const { return b_; }
    // Regularized hinge objective of the averaged iterate, recorded at the
    // end of every epoch.
    const std::vector<double>& epoch_objectives() const { return epoch_objectives_; }

private:
    std::vector<double> w_;
    double b_;
    std::vector<double> epoch_objectives_;
};

// L2-regularized hinge loss by epoch-wise Pegasos subgradient steps with
// learning rate 1/(lambda*t) and a fresh seeded shuffle per epoch. The
// returned model averages the per-step iterates, which also makes the
// recorded per-epoch objective trace well behaved.
inline std::unique_ptr<Model> train_linear_svm(const DataMatrix& x, const std::vector<int>& y,
                                               const HyperparameterSet& hp, std::uint64_t seed) {
    detail::check_training_input(x, y);
    const double lambda = hp.get("lambda", 0.01);
    const int epochs = static_cast<int>(hp.get("epochs", 100));
    if (lambda <= 0.0 || epochs < 0)
        throw Error(ErrorCode::invalid_config, "bad svm hyperparameters");
    if (detail::single_class(y))
        return std::make_unique<ConstantModel>(ModelKind::linear_svm,
                                               y.front() == 1 ? 1.0 : -1.0, 0.0);

    const std::size_t n = x.rows, f = x.cols;
    std::vector<double> signed_y(n);
    for (std::size_t i = 0; i < n; ++i) signed_y[i] = y[i] == 1 ? 1.0 : -1.0;

    std::vector<double> w(f, 0.0), w_avg(f, 0.0);
    double b = 0.0, b_avg = 0.0;
    std::uint64_t steps = 0;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, "svm"));

    const auto objective = [&](const std::vector<double>& weights, double bias) {
        double norm_sq = 0.0;
        for (const double v : weights) norm_sq += v * v;
        double hinge = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double margin = bias;
            const auto row = x.row(i);
            for (std::size_t j = 0; j < f; ++j) margin += weights[j] * row[j];
            hinge += std::max(0.0, 1.0 - signed_y[i] * margin);
        }
        return 0.5 * lambda * norm_sq + hinge / static_cast<double>(n);
    };

    std::vector<double> epoch_objectives;
    epoch_objectives.reserve(static_cast<std::size_t>(epochs));
    for (int epoch = 0; epoch < epochs; ++epoch) {
        rng.shuffle(order);
        for (const std::size_t i : order) {
            ++steps;
            const double eta = 1.0 / (lambda * static_cast<double>(steps));
            const auto row = x.row(i);
            double margin = b;
            for (std::size_t j = 0; j < f; ++j) margin += w[j] * row[j];
            const double scale = 1.0 - eta * lambda;
            for (auto& v : w) v *= scale;
            if (signed_y[i] * margin < 1.0) {
                const double step = eta * signed_y[i];
                for (std::size_t j = 0; j < f; ++j) w[j] += step * row[j];
                b += step;
            }
            // Running average of the iterates.
            const double blend = 1.0 / static_cast<double>(steps);
            for (std::size_t j = 0; j < f; ++j) w_avg[j] += (w[j] - w_avg[j]) * blend;
            b_avg += (b - b_avg) * blend;
        }
        epoch_objectives.push_back(objective(w_avg, b_avg));
    }
    return std::make_unique<LinearSvmModel>(std::move(w_avg), b_avg, std::move(epoch_objectives));
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

inline std::unique_ptr<Model> train_model(ModelKind kind, const DataMatrix& x,
                                          const std::vector<int>& y, const HyperparameterSet& hp,
                                          std::uint64_t seed) {
    switch (kind) {
        case ModelKind::decision_tree: return train_decision_tree(x, y, hp, seed);
        case ModelKind::random_forest: return train_random_forest(x, y, hp, seed);
        case ModelKind::gradient_boosted_tree: return train_gbt(x, y, hp, seed);
        case ModelKind::linear_svm: return train_linear_svm(x, y, hp, seed);
    }
    throw Error(ErrorCode::invalid_config, "unknown model kind");
}

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

struct ConfusionCounts {
    std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::int64_t total() const { return tp + fp + tn + fn; }
};

// Predict positive iff score >= threshold.
inline ConfusionCounts confusion_at_threshold(std::span<const double> scores,
                                              std::span<const int> labels, double threshold) {
    if (scores.size() != labels.size())
        throw Error(ErrorCode::schema_mismatch, "scores and labels disagree");
    ConfusionCounts counts;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] >= threshold;
        const bool actual = labels[i] == 1;
        if (predicted && actual) ++counts.tp;
        else if (predicted && !actual) ++counts.fp;
        else if (!predicted && actual) ++counts.fn;
        else ++counts.tn;
    }
    return counts;
}

// The paper-style AUC: (recall + specificity) / 2 at one operating point.
// Exactly 0.5 for any constant classifier, whatever the class balance.
inline double balanced_auc(const ConfusionCounts& counts) {
    if (counts.tp + counts.fn == 0 || counts.tn + counts.fp == 0)
        throw Error(ErrorCode::undefined_class_rate, "a class is absent from the labels");
    const double recall =
        static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fn);
    const double specificity =
        static_cast<double>(counts.tn) / static_cast<double>(counts.tn + counts.fp);
    return 0.5 * (recall + specificity);
}

inline double accuracy(const ConfusionCounts& counts) {
    return static_cast<double>(counts.tp + counts.tn) / static_cast<double>(counts.total());
}

// Rank-based ROC-AUC: the fraction of (positive, negative) pairs where the
// positive outscores the negative, ties counted one half. Diagnostic
// companion to balanced_auc, not the benchmark metric.
inline double roc_auc_rank(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw Error(ErrorCode::schema_mismatch, "scores and labels disagree");
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Average ranks over tied score groups.
    std::vector<double> ranks(scores.size());
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && scores[idx[j + 1]] == scores[idx[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = avg_rank;
        i = j + 1;
    }

    double positive_rank_sum = 0.0;
    std::int64_t n_pos = 0;
    for (std::size_t t = 0; t < labels.size(); ++t)
        if (labels[t] == 1) {
            positive_rank_sum += ranks[t];
            ++n_pos;
        }
    const std::int64_t n_neg = static_cast<std::int64_t>(labels.size()) - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw Error(ErrorCode::single_class_target, "ROC-AUC needs both classes");
    return (positive_rank_sum - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1)) /
           (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace ntl
