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

#ifndef CFHYBRID_CF_CORE_HPP
#define CFHYBRID_CF_CORE_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"

#include "cfhybrid/predictor.hpp"
#include "cfhybrid/tabular.hpp"

namespace cfhybrid {

enum class Stage { none, enumeration, nice, moc };

inline std::string_view to_string(Stage s) {
    switch (s) {
        case Stage::none: return "none";
        case Stage::enumeration: return "enumeration";
        case Stage::nice: return "nice";
        case Stage::moc: return "moc";
    }
    return "none";
}

/// One counterfactual question about a single instance.
struct CfQuery {
    Instance x0;
    std::size_t target_class = 1;
    double p_min = 0.0;
    double p_max = 1.0;
    std::vector<std::size_t> fixed;  // feature indices that must not change
    std::size_t k = 5;
    double alpha = 1.0;  // sparsity penalty
    double beta = 1.0;   // probability-shift reward
    std::size_t m_max = 16;
    std::uint64_t seed = 0;
    double epsilon = kDefaultEpsilon;

    bool is_fixed(std::size_t j) const { return std::binary_search(fixed.begin(), fixed.end(), j); }
    bool in_band(double p) const { return p >= p_min && p <= p_max; }
};

/// Checks the query against the schema and sorts/deduplicates the fixed set.
/// Throws ErrorKind::constraint for band or weight violations.
inline void normalize_query(CfQuery& q, const FeatureSchema& schema, std::size_t num_classes = 2) {
    check_instance(schema, q.x0);
    if (!(q.p_min >= 0.0 && q.p_min < q.p_max && q.p_max <= 1.0))
        fail(ErrorKind::constraint, "probability band must satisfy 0 <= p_min < p_max <= 1");
    if (!(q.alpha > 0.0)) fail(ErrorKind::constraint, "alpha must be > 0");
    if (!(q.beta > 0.0)) fail(ErrorKind::constraint, "beta must be > 0");
    if (q.k == 0) fail(ErrorKind::constraint, "k must be positive");
    if (q.target_class >= num_classes) fail(ErrorKind::constraint, "target class out of range");
    if (!(q.epsilon >= 0.0)) fail(ErrorKind::constraint, "epsilon must be >= 0");
    std::sort(q.fixed.begin(), q.fixed.end());
    q.fixed.erase(std::unique(q.fixed.begin(), q.fixed.end()), q.fixed.end());
    if (!q.fixed.empty() && q.fixed.back() >= schema.size()) fail(ErrorKind::constraint, "fixed feature out of range");
}

/// Adds every feature the schema marks non-actionable to the fixed set.
inline void fix_non_actionable(CfQuery& q, const FeatureSchema& schema) {
    for (std::size_t j = 0; j < schema.size(); ++j)
        if (!schema[j].actionable) q.fixed.push_back(j);
    std::sort(q.fixed.begin(), q.fixed.end());
    q.fixed.erase(std::unique(q.fixed.begin(), q.fixed.end()), q.fixed.end());
}

/// Features neither fixed by the query nor marked non-actionable by the schema.
inline std::vector<bool> actionable_mask(const CfQuery& q, const FeatureSchema& schema) {
    std::vector<bool> mask(schema.size());
    for (std::size_t j = 0; j < schema.size(); ++j) mask[j] = schema[j].actionable && !q.is_fixed(j);
    return mask;
}

struct Counterfactual {
    Instance x_prime;
    std::vector<std::size_t> changed;  // {j : x_prime[j] != x0[j]}, ascending
    double p_target = 0.0;
    double score = 0.0;
    Stage stage = Stage::none;
    double distance = 0.0;  // Gower distance to x0
};

inline std::vector<std::size_t> changed_features(const Instance& x0, const Instance& x) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < x0.size(); ++j)
        if (x[j] != x0[j]) out.push_back(j);
    return out;
}

/// alpha * |S| - beta * |p - p0|; lower is better.
inline double composite_score(std::size_t n_changed, double p, double p0, double alpha, double beta) {
    return alpha * static_cast<double>(n_changed) - beta * std::abs(p - p0);
}

inline double score(const Instance& candidate, const CfQuery& q, const Predictor& f) {
    const double p = f.probability(candidate, q.target_class);
    const double p0 = f.probability(q.x0, q.target_class);
    return composite_score(changed_features(q.x0, candidate).size(), p, p0, q.alpha, q.beta);
}

/// Total order for ranked output: score, then fewer changes, then smaller
/// distance, then lexicographically smaller changed set.
inline bool ranks_before(const Counterfactual& a, const Counterfactual& b) {
    if (a.score != b.score) return a.score < b.score;
    if (a.changed.size() != b.changed.size()) return a.changed.size() < b.changed.size();
    const double da = distance_rank_key(a.distance), db = distance_rank_key(b.distance);
    if (da != db) return da < db;
    return a.changed < b.changed;
}

enum class ViolationKind { fixed_feature_modified, probability_out_of_band, non_actionable_modified };

inline std::string_view to_string(ViolationKind v) {
    switch (v) {
        case ViolationKind::fixed_feature_modified: return "fixed feature modified";
        case ViolationKind::probability_out_of_band: return "probability out of band";
        case ViolationKind::non_actionable_modified: return "non-actionable feature modified";
    }
    return "";
}

struct Violation {
    ViolationKind kind;
    std::optional<std::size_t> feature;
    std::string message;
};

namespace detail {
inline bool drifted(const FeatureSpec& f, double a, double b, double eps) {
    if (f.kind == FeatureKind::numeric) return !(std::abs(a - b) <= eps);
    return a != b;
}
}  // namespace detail

/// Post-hoc constraint check. Reports every violation found:
///   fixed features drifted beyond epsilon (exact match for non-numeric),
///   target probability outside [p_min, p_max],
///   changes to schema-non-actionable features outside the query's fixed set.
inline std::vector<Violation> validate(const Instance& candidate, const CfQuery& q, const Predictor& f,
                                       const FeatureSchema& schema, double epsilon = kDefaultEpsilon) {
    std::vector<Violation> out;
    if (candidate.size() != schema.size() || q.x0.size() != schema.size()) {
        out.push_back({ViolationKind::non_actionable_modified, std::nullopt, "instance does not match schema"});
        return out;
    }
    for (std::size_t j : q.fixed) {
        if (j < schema.size() && detail::drifted(schema[j], candidate[j], q.x0[j], epsilon))
            out.push_back({ViolationKind::fixed_feature_modified, j, "fixed feature modified: " + schema[j].name});
    }
    const double p = f.probability(candidate, q.target_class);
    if (!q.in_band(p))
        out.push_back({ViolationKind::probability_out_of_band, std::nullopt,
                       "target probability " + format_double(p) + " outside [" + format_double(q.p_min) + ", " +
                           format_double(q.p_max) + "]"});
    for (std::size_t j = 0; j < schema.size(); ++j) {
        if (schema[j].actionable || q.is_fixed(j)) continue;
        if (detail::drifted(schema[j], candidate[j], q.x0[j], epsilon))
            out.push_back({ViolationKind::non_actionable_modified, j, "non-actionable feature modified: " + schema[j].name});
    }
    return out;
}

inline Counterfactual make_counterfactual(Instance x, const CfQuery& q, double p, double p0, Stage stage,
                                          const FeatureSchema& schema) {
    Counterfactual cf;
    cf.changed = changed_features(q.x0, x);
    cf.p_target = p;
    cf.score = composite_score(cf.changed.size(), p, p0, q.alpha, q.beta);
    cf.stage = stage;
    cf.distance = gower_distance(q.x0, x, schema);
    cf.x_prime = std::move(x);
    return cf;
}

inline nlohmann::json to_json(const Counterfactual& cf, const Instance& x0, double p_origin,
                              const FeatureSchema& schema) {
    using nlohmann::json;
    json changes = json::array();
    for (auto j : cf.changed) {
        const auto& f = schema[j];
        auto cell = [&](double v) { return f.token_coded() ? json(f.format(v)) : json(v); };
        changes.push_back({{"feature", f.name}, {"from", cell(x0[j])}, {"to", cell(cf.x_prime[j])}});
    }
    return {{"stage", to_string(cf.stage)},
            {"score", cf.score},
            {"p_origin", p_origin},
            {"p_target", cf.p_target},
            {"distance", cf.distance},
            {"changes", changes}};
}

}  // namespace cfhybrid

#endif  // CFHYBRID_CF_CORE_HPP
