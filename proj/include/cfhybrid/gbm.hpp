/*
 * Copyright 2026 The cfhybrid Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CFHYBRID_GBM_HPP
#define CFHYBRID_GBM_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "json.hpp"

#include "cfhybrid/evaluation.hpp"
#include "cfhybrid/predictor.hpp"
#include "cfhybrid/random.hpp"
#include "cfhybrid/tabular.hpp"

namespace cfhybrid {

struct GbmConfig {
    int n_trees = 200;
    int max_depth = 3;
    double learning_rate = 0.1;
    double l2_leaf_penalty = 1.0;
    int min_samples_leaf = 5;
    std::uint64_t seed = 42;

    void validate() const {
        if (n_trees < 0) fail(ErrorKind::invalid_argument, "n_trees must be >= 0");
        if (max_depth < 1 || max_depth > 16) fail(ErrorKind::invalid_argument, "max_depth must be in [1,16]");
        if (!(learning_rate > 0.0 && learning_rate <= 1.0))
            fail(ErrorKind::invalid_argument, "learning_rate must be in (0,1]");
        if (!(l2_leaf_penalty >= 0.0)) fail(ErrorKind::invalid_argument, "l2_leaf_penalty must be >= 0");
        if (min_samples_leaf < 1) fail(ErrorKind::invalid_argument, "min_samples_leaf must be >= 1");
    }
};

/// Internal nodes send x to `left` when x[feature] < threshold, or, for
/// equality splits, when x[feature] == threshold. Leaves have feature == -1.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    bool equals = false;
    int left = -1;
    int right = -1;
    double value = 0.0;
    double gain = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;

    double predict(const Instance& x) const {
        std::size_t k = 0;
        while (!nodes[k].is_leaf()) {
            const auto& n = nodes[k];
            const double v = x[static_cast<std::size_t>(n.feature)];
            const bool go_left = n.equals ? (v == n.threshold) : (v < n.threshold);
            k = static_cast<std::size_t>(go_left ? n.left : n.right);
        }
        return nodes[k].value;
    }
};

inline double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

class GbmModel final : public Predictor {
public:
    GbmModel() = default;
    GbmModel(double base_score, std::vector<Tree> trees, std::vector<std::string> feature_names,
             std::string schema_fingerprint)
        : base_score_(base_score),
          trees_(std::move(trees)),
          feature_names_(std::move(feature_names)),
          fingerprint_(std::move(schema_fingerprint)) {
        for (const auto& t : trees_) {
            if (t.nodes.empty()) fail(ErrorKind::data, "model contains an empty tree");
            for (const auto& n : t.nodes) {
                if (n.is_leaf()) continue;
                if (n.feature >= static_cast<int>(feature_names_.size()))
                    fail(ErrorKind::data, "split references unknown feature");
                const auto size = static_cast<int>(t.nodes.size());
                if (n.left <= 0 || n.right <= 0 || n.left >= size || n.right >= size)
                    fail(ErrorKind::data, "split references unknown child");
            }
        }
    }

    std::size_t num_classes() const override { return 2; }
    std::size_t num_features() const { return feature_names_.size(); }
    double base_score() const { return base_score_; }
    const std::vector<Tree>& trees() const { return trees_; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    const std::string& schema_fingerprint() const { return fingerprint_; }

    /// Logit using the first `limit` trees.
    double raw_score(const Instance& x, std::size_t limit = static_cast<std::size_t>(-1)) const {
        if (x.size() != num_features())
            fail(ErrorKind::data, "instance has " + std::to_string(x.size()) + " values, model expects " +
                                      std::to_string(num_features()));
        double z = base_score_;
        const auto n = std::min(limit, trees_.size());
        for (std::size_t t = 0; t < n; ++t) z += trees_[t].predict(x);
        return z;
    }

    void predict_batch(std::span<const Instance> xs, std::vector<double>& out) const override {
        out.resize(xs.size() * 2);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double p1 = sigmoid(raw_score(xs[i]));
            out[2 * i] = 1.0 - p1;
            out[2 * i + 1] = p1;
        }
    }

    void check_schema(const FeatureSchema& schema) const {
        if (schema.fingerprint() != fingerprint_)
            fail(ErrorKind::data, "model was trained on a different feature schema");
    }

private:
    double base_score_ = 0.0;
    std::vector<Tree> trees_;
    std::vector<std::string> feature_names_;
    std::string fingerprint_;
};

namespace detail {

struct SplitCandidate {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
    bool equals = false;
};

struct NodeStats {
    double g = 0, h = 0;
    std::size_t n = 0;
};

inline double leaf_objective(double g, double h, double lambda) {
    const double d = h + lambda;
    return d > 0 ? g * g / d : 0.0;
}

}  // namespace detail

/// Gradient boosting on logistic loss with Newton leaf values
/// -sum(g) / (sum(h) + lambda), shrunk by the learning rate. Splits are chosen
/// level by level with exact greedy search.
inline GbmModel train_gbm(const Dataset& data, const GbmConfig& config) {
    config.validate();
    if (!data.has_labels()) fail(ErrorKind::invalid_argument, "training requires labels");
    const auto& schema = data.schema();
    const std::size_t n = data.size();
    const std::size_t p = schema.size();
    const auto& y = data.labels();
    std::size_t n_pos = 0;
    for (int v : y) {
        if (v != 0 && v != 1) fail(ErrorKind::invalid_argument, "training supports binary labels only");
        n_pos += static_cast<std::size_t>(v);
    }
    if (n_pos == 0 || n_pos == n) fail(ErrorKind::invalid_argument, "degenerate labels");
    if (n < 2 * static_cast<std::size_t>(config.min_samples_leaf))
        fail(ErrorKind::invalid_argument, "too few rows for min_samples_leaf");

    const double prior = static_cast<double>(n_pos) / static_cast<double>(n);
    const double base = std::log(prior / (1.0 - prior));
    const auto min_leaf = static_cast<std::size_t>(config.min_samples_leaf);
    const double lambda = config.l2_leaf_penalty;

    std::vector<std::vector<std::size_t>> sorted(p);
    for (std::size_t j = 0; j < p; ++j) {
        if (schema[j].kind == FeatureKind::categorical) continue;
        auto& o = sorted[j];
        o.resize(n);
        std::iota(o.begin(), o.end(), std::size_t{0});
        std::stable_sort(o.begin(), o.end(), [&](auto a, auto b) { return data.row(a)[j] < data.row(b)[j]; });
    }

    std::vector<double> F(n, base), g(n), h(n);
    std::vector<int> node_of(n);
    std::vector<Tree> trees;
    trees.reserve(static_cast<std::size_t>(config.n_trees));

    for (int t = 0; t < config.n_trees; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            const double pi = sigmoid(F[i]);
            g[i] = pi - y[i];
            h[i] = std::max(pi * (1.0 - pi), 1e-16);
        }
        Tree tree;
        tree.nodes.emplace_back();
        std::fill(node_of.begin(), node_of.end(), 0);
        std::vector<int> frontier{0};

        for (int depth = 0; depth < config.max_depth && !frontier.empty(); ++depth) {
            const auto n_nodes = tree.nodes.size();
            std::vector<detail::NodeStats> total(n_nodes);
            std::vector<bool> open(n_nodes, false);
            for (int k : frontier) open[static_cast<std::size_t>(k)] = true;
            for (std::size_t i = 0; i < n; ++i) {
                auto& s = total[static_cast<std::size_t>(node_of[i])];
                s.g += g[i];
                s.h += h[i];
                ++s.n;
            }
            std::vector<detail::SplitCandidate> best(n_nodes);
            auto consider = [&](std::size_t k, double gl, double hl, std::size_t nl, int feature, double thr, bool eq) {
                const auto& tot = total[k];
                const std::size_t nr = tot.n - nl;
                if (nl < min_leaf || nr < min_leaf) return;
                const double gain = 0.5 * (detail::leaf_objective(gl, hl, lambda) +
                                           detail::leaf_objective(tot.g - gl, tot.h - hl, lambda) -
                                           detail::leaf_objective(tot.g, tot.h, lambda));
                if (gain > best[k].gain + 1e-12) best[k] = {gain, feature, thr, eq};
            };

            for (std::size_t j = 0; j < p; ++j) {
                if (schema[j].kind == FeatureKind::categorical) {
                    const auto& values = schema[j].values;
                    std::vector<detail::NodeStats> per(n_nodes * values.size());
                    for (std::size_t i = 0; i < n; ++i) {
                        const auto k = static_cast<std::size_t>(node_of[i]);
                        if (!open[k]) continue;
                        const auto c = static_cast<std::size_t>(
                            std::lower_bound(values.begin(), values.end(), data.row(i)[j]) - values.begin());
                        auto& s = per[k * values.size() + c];
                        s.g += g[i];
                        s.h += h[i];
                        ++s.n;
                    }
                    for (int k : frontier)
                        for (std::size_t c = 0; c < values.size(); ++c) {
                            const auto& s = per[static_cast<std::size_t>(k) * values.size() + c];
                            consider(static_cast<std::size_t>(k), s.g, s.h, s.n, static_cast<int>(j), values[c], true);
                        }
                    continue;
                }
                std::vector<detail::NodeStats> left(n_nodes);
                std::vector<double> prev(n_nodes, 0.0);
                std::vector<bool> seen(n_nodes, false);
                for (std::size_t i : sorted[j]) {
                    const auto k = static_cast<std::size_t>(node_of[i]);
                    if (!open[k]) continue;
                    const double v = data.row(i)[j];
                    if (seen[k] && v != prev[k]) {
                        double thr = prev[k] + (v - prev[k]) / 2.0;
                        if (!(thr > prev[k])) thr = v;
                        consider(k, left[k].g, left[k].h, left[k].n, static_cast<int>(j), thr, false);
                    }
                    left[k].g += g[i];
                    left[k].h += h[i];
                    ++left[k].n;
                    prev[k] = v;
                    seen[k] = true;
                }
            }

            std::vector<int> next;
            std::vector<int> child_left(n_nodes, -1);
            for (int k : frontier) {
                const auto& b = best[static_cast<std::size_t>(k)];
                if (b.feature < 0) continue;
                const int l = static_cast<int>(tree.nodes.size());
                tree.nodes.emplace_back();
                tree.nodes.emplace_back();
                auto& node = tree.nodes[static_cast<std::size_t>(k)];
                node.feature = b.feature;
                node.threshold = b.threshold;
                node.equals = b.equals;
                node.gain = b.gain;
                node.left = l;
                node.right = l + 1;
                child_left[static_cast<std::size_t>(k)] = l;
                next.push_back(l);
                next.push_back(l + 1);
            }
            for (std::size_t i = 0; i < n; ++i) {
                const auto k = static_cast<std::size_t>(node_of[i]);
                if (k >= n_nodes || child_left[k] < 0) continue;
                const auto& node = tree.nodes[k];
                const double v = data.row(i)[static_cast<std::size_t>(node.feature)];
                const bool go_left = node.equals ? (v == node.threshold) : (v < node.threshold);
                node_of[i] = go_left ? node.left : node.right;
            }
            frontier = std::move(next);
        }

        std::vector<detail::NodeStats> leaf(tree.nodes.size());
        for (std::size_t i = 0; i < n; ++i) {
            auto& s = leaf[static_cast<std::size_t>(node_of[i])];
            s.g += g[i];
            s.h += h[i];
        }
        for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
            auto& node = tree.nodes[k];
            if (!node.is_leaf()) continue;
            const double d = leaf[k].h + lambda;
            node.value = d > 0 ? -config.learning_rate * leaf[k].g / d : 0.0;
        }
        for (std::size_t i = 0; i < n; ++i) F[i] += tree.nodes[static_cast<std::size_t>(node_of[i])].value;
        trees.push_back(std::move(tree));
    }

    std::vector<std::string> names;
    for (const auto& f : schema.features()) names.push_back(f.name);
    return GbmModel(base, std::move(trees), std::move(names), schema.fingerprint());
}

/// Total split gain per feature, normalised to sum to one. All zeros when the
/// model has no splits.
inline std::vector<double> feature_importance(const GbmModel& model) {
    std::vector<double> imp(model.num_features(), 0.0);
    for (const auto& t : model.trees())
        for (const auto& n : t.nodes)
            if (!n.is_leaf()) imp[static_cast<std::size_t>(n.feature)] += n.gain;
    const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
    if (total > 0)
        for (auto& v : imp) v /= total;
    return imp;
}

/// Mean logistic loss of the model on the dataset using its first `limit` trees.
inline double logistic_loss(const GbmModel& model, const Dataset& data,
                            std::size_t limit = static_cast<std::size_t>(-1)) {
    double loss = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double z = model.raw_score(data.row(i), limit);
        // log(1 + exp(-z)) for y=1, log(1 + exp(z)) for y=0, computed stably
        const double s = data.labels()[i] == 1 ? -z : z;
        loss += s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
    }
    return loss / static_cast<double>(data.size());
}

struct CrossValidation {
    std::vector<int> fold_of;
    std::vector<double> aurocs;

    double mean() const {
        return aurocs.empty() ? 0.0 : std::accumulate(aurocs.begin(), aurocs.end(), 0.0) / aurocs.size();
    }
};

inline CrossValidation cross_validate(const Dataset& data, const GbmConfig& config, int folds) {
    if (!data.has_labels()) fail(ErrorKind::invalid_argument, "cross-validation requires labels");
    CrossValidation cv;
    cv.fold_of = stratified_folds(data.labels(), folds, config.seed);
    for (int f = 0; f < folds; ++f) {
        bool pos = false, neg = false;
        for (std::size_t i = 0; i < data.size(); ++i)
            if (cv.fold_of[i] == f) (data.labels()[i] == 1 ? pos : neg) = true;
        if (!pos || !neg) fail(ErrorKind::invalid_argument, "fold " + std::to_string(f) + " has a single class");
    }
    for (int f = 0; f < folds; ++f) {
        std::vector<std::size_t> train, test;
        for (std::size_t i = 0; i < data.size(); ++i) (cv.fold_of[i] == f ? test : train).push_back(i);
        const auto model = train_gbm(data.subset(train), config);
        const auto held = data.subset(test);
        const auto scores = model.class_probabilities(held.rows(), 1);
        cv.aurocs.push_back(auroc(scores, held.labels()));
    }
    return cv;
}

inline nlohmann::json model_to_json(const GbmModel& model) {
    using nlohmann::json;
    json trees = json::array();
    for (const auto& t : model.trees()) {
        json nodes = json::array();
        for (const auto& n : t.nodes) {
            if (n.is_leaf()) {
                nodes.push_back({{"value", n.value}});
            } else {
                nodes.push_back({{"feature", n.feature},
                                 {"threshold", n.threshold},
                                 {"equals", n.equals},
                                 {"left", n.left},
                                 {"right", n.right},
                                 {"gain", n.gain}});
            }
        }
        trees.push_back({{"nodes", nodes}});
    }
    return {{"version", 1},
            {"base_score", model.base_score()},
            {"feature_names", model.feature_names()},
            {"schema_fingerprint", model.schema_fingerprint()},
            {"trees", trees}};
}

inline GbmModel model_from_json(const nlohmann::json& j) {
    try {
        if (j.at("version").get<int>() != 1) fail(ErrorKind::data, "unsupported model version");
        std::vector<Tree> trees;
        for (const auto& tj : j.at("trees")) {
            Tree t;
            for (const auto& nj : tj.at("nodes")) {
                TreeNode n;
                if (nj.contains("feature")) {
                    n.feature = nj.at("feature").get<int>();
                    n.threshold = nj.at("threshold").get<double>();
                    n.equals = nj.value("equals", false);
                    n.left = nj.at("left").get<int>();
                    n.right = nj.at("right").get<int>();
                    n.gain = nj.value("gain", 0.0);
                } else {
                    n.value = nj.at("value").get<double>();
                }
                t.nodes.push_back(n);
            }
            trees.push_back(std::move(t));
        }
        return GbmModel(j.at("base_score").get<double>(), std::move(trees),
                        j.at("feature_names").get<std::vector<std::string>>(),
                        j.at("schema_fingerprint").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::data, std::string("malformed model: ") + e.what());
    }
}

}  // namespace cfhybrid

#endif  // CFHYBRID_GBM_HPP
