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

#ifndef CFHYBRID_TABULAR_HPP
#define CFHYBRID_TABULAR_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cfhybrid/common.hpp"

namespace cfhybrid {

enum class FeatureKind { numeric, binary, categorical };

inline std::string_view to_string(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::numeric: return "numeric";
        case FeatureKind::binary: return "binary";
        case FeatureKind::categorical: return "categorical";
    }
    return "numeric";
}

inline FeatureKind parse_feature_kind(std::string_view s) {
    if (s == "numeric") return FeatureKind::numeric;
    if (s == "binary") return FeatureKind::binary;
    if (s == "categorical") return FeatureKind::categorical;
    fail(ErrorKind::data, "unknown feature kind '" + std::string(s) + "'");
}

/// Cells are stored as doubles. Token-coded columns (string categories) hold
/// the index of the token in `tokens`; everything else holds the value itself.
struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::numeric;
    bool actionable = true;
    double min = 0.0;           // numeric observed domain
    double max = 0.0;
    std::vector<double> values; // binary / categorical observed value set, ascending
    std::vector<std::string> tokens;

    bool token_coded() const { return !tokens.empty(); }
    double range() const { return max - min; }

    bool admits(double cell) const {
        if (kind == FeatureKind::numeric) return std::isfinite(cell);
        return std::binary_search(values.begin(), values.end(), cell);
    }

    /// The two values of a two-element observed domain, if it has exactly two.
    std::optional<std::pair<double, double>> two_values() const {
        if (kind == FeatureKind::numeric) {
            if (min < max) return std::pair{min, max};
            return std::nullopt;
        }
        if (values.size() == 2) return std::pair{values[0], values[1]};
        return std::nullopt;
    }

    std::string format(double cell) const {
        if (token_coded()) {
            auto idx = static_cast<std::size_t>(cell);
            if (cell >= 0 && idx < tokens.size() && static_cast<double>(idx) == cell) return tokens[idx];
        }
        return format_double(cell);
    }

    /// Inverse of format(); returns nullopt when the text is not a valid cell.
    std::optional<double> parse(std::string_view text) const {
        if (token_coded()) {
            for (std::size_t i = 0; i < tokens.size(); ++i)
                if (tokens[i] == text) return static_cast<double>(i);
            return std::nullopt;
        }
        return parse_double(text);
    }
};

class FeatureSchema {
public:
    FeatureSchema() = default;

    explicit FeatureSchema(std::vector<FeatureSpec> features) : features_(std::move(features)) {
        for (std::size_t j = 0; j < features_.size(); ++j) {
            auto& f = features_[j];
            if (f.name.empty()) fail(ErrorKind::data, "feature " + std::to_string(j) + " has an empty name");
            if (!index_.emplace(f.name, j).second) fail(ErrorKind::data, "duplicate feature name '" + f.name + "'");
            std::sort(f.values.begin(), f.values.end());
            f.values.erase(std::unique(f.values.begin(), f.values.end()), f.values.end());
            switch (f.kind) {
                case FeatureKind::numeric:
                    if (!(f.min <= f.max) || !std::isfinite(f.min) || !std::isfinite(f.max))
                        fail(ErrorKind::data, "numeric feature '" + f.name + "' needs finite min <= max");
                    break;
                case FeatureKind::binary:
                    if (f.values.size() != 2)
                        fail(ErrorKind::data, "binary feature '" + f.name + "' must have exactly two values");
                    break;
                case FeatureKind::categorical:
                    if (f.values.empty()) fail(ErrorKind::data, "categorical feature '" + f.name + "' has no values");
                    if (f.values.size() == 2)
                        fail(ErrorKind::data, "feature '" + f.name + "' has two values and must be binary");
                    break;
            }
            if (f.token_coded()) {
                if (f.kind == FeatureKind::numeric)
                    fail(ErrorKind::data, "numeric feature '" + f.name + "' cannot be token coded");
                for (double v : f.values) {
                    if (v < 0 || v >= static_cast<double>(f.tokens.size()) || v != std::floor(v))
                        fail(ErrorKind::data, "feature '" + f.name + "' references an unknown token");
                }
            }
        }
    }

    std::size_t size() const { return features_.size(); }
    const FeatureSpec& operator[](std::size_t j) const { return features_[j]; }
    const std::vector<FeatureSpec>& features() const { return features_; }

    std::optional<std::size_t> index_of(std::string_view name) const {
        auto it = index_.find(std::string(name));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t require_index(std::string_view name) const {
        auto idx = index_of(name);
        if (!idx) fail(ErrorKind::invalid_argument, "unknown feature '" + std::string(name) + "'");
        return *idx;
    }

    /// Stable identity of names, kinds and token tables.
    std::string fingerprint() const {
        std::uint64_t h = fnv1a("cfhybrid-schema");
        for (const auto& f : features_) {
            h = fnv1a(f.name, h);
            h = fnv1a(to_string(f.kind), h);
            for (const auto& t : f.tokens) h = fnv1a(t, fnv1a("\x1f", h));
            h = fnv1a("\x1e", h);
        }
        return hex64(h);
    }

private:
    std::vector<FeatureSpec> features_;
    std::unordered_map<std::string, std::size_t> index_;
};

using Instance = std::vector<double>;

inline void check_instance(const FeatureSchema& schema, const Instance& x) {
    if (x.size() != schema.size())
        fail(ErrorKind::data, "instance has " + std::to_string(x.size()) + " values, schema expects " +
                                  std::to_string(schema.size()));
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (!schema[j].admits(x[j]))
            fail(ErrorKind::data, "value " + format_double(x[j]) + " is outside the domain of '" + schema[j].name + "'");
    }
}

class Dataset {
public:
    Dataset() = default;

    Dataset(FeatureSchema schema, std::vector<Instance> rows, std::vector<int> labels = {}, int num_classes = 2)
        : schema_(std::move(schema)), rows_(std::move(rows)), labels_(std::move(labels)), num_classes_(num_classes) {
        for (const auto& r : rows_) check_instance(schema_, r);
        if (!labels_.empty()) {
            if (labels_.size() != rows_.size())
                fail(ErrorKind::data, "label count does not match row count");
            for (int y : labels_)
                if (y < 0 || y >= num_classes_) fail(ErrorKind::data, "label " + std::to_string(y) + " out of range");
        }
    }

    const FeatureSchema& schema() const { return schema_; }
    const std::vector<Instance>& rows() const { return rows_; }
    const Instance& row(std::size_t i) const { return rows_[i]; }
    const std::vector<int>& labels() const { return labels_; }
    bool has_labels() const { return !labels_.empty(); }
    int num_classes() const { return num_classes_; }
    std::size_t size() const { return rows_.size(); }
    bool empty() const { return rows_.empty(); }

    Dataset subset(std::span<const std::size_t> idx) const {
        std::vector<Instance> rows;
        std::vector<int> labels;
        rows.reserve(idx.size());
        for (auto i : idx) {
            rows.push_back(rows_.at(i));
            if (has_labels()) labels.push_back(labels_[i]);
        }
        Dataset out;
        out.schema_ = schema_;
        out.rows_ = std::move(rows);
        out.labels_ = std::move(labels);
        out.num_classes_ = num_classes_;
        return out;
    }

private:
    FeatureSchema schema_;
    std::vector<Instance> rows_;
    std::vector<int> labels_;
    int num_classes_ = 2;
};

/// Builds a FeatureSpec from observed cells: exactly two distinct values gives
/// a binary feature; otherwise token-coded columns are categorical and the
/// rest numeric.
inline FeatureSpec infer_feature(std::string name, std::span<const double> cells,
                                 std::vector<std::string> tokens = {}, bool actionable = true) {
    FeatureSpec f;
    f.name = std::move(name);
    f.actionable = actionable;
    f.tokens = std::move(tokens);
    std::set<double> distinct(cells.begin(), cells.end());
    if (distinct.size() == 2) {
        f.kind = FeatureKind::binary;
    } else if (f.token_coded()) {
        f.kind = FeatureKind::categorical;
    } else {
        f.kind = FeatureKind::numeric;
    }
    if (f.kind == FeatureKind::numeric) {
        if (!distinct.empty()) {
            f.min = *distinct.begin();
            f.max = *distinct.rbegin();
        }
    } else {
        f.values.assign(distinct.begin(), distinct.end());
    }
    return f;
}

/// Binary actionable features: distinct-value count over the dataset is
/// exactly two and `actionable[j]` holds.
inline std::vector<std::size_t> identify_binary_features(const Dataset& dataset, const std::vector<bool>& actionable) {
    if (dataset.empty()) fail(ErrorKind::data, "no data");
    const auto p = dataset.schema().size();
    if (actionable.size() != p) fail(ErrorKind::invalid_argument, "actionable mask size mismatch");
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < p; ++j) {
        if (!actionable[j]) continue;
        const double first = dataset.row(0)[j];
        std::optional<double> second;
        bool more = false;
        for (const auto& r : dataset.rows()) {
            const double v = r[j];
            if (v == first) continue;
            if (!second) {
                second = v;
            } else if (v != *second) {
                more = true;
                break;
            }
        }
        if (second && !more) out.push_back(j);
    }
    return out;
}

inline std::vector<std::size_t> identify_binary_features(const Dataset& dataset) {
    std::vector<bool> actionable(dataset.schema().size());
    for (std::size_t j = 0; j < actionable.size(); ++j) actionable[j] = dataset.schema()[j].actionable;
    return identify_binary_features(dataset, actionable);
}

/// Gower distance over all p features: range-normalised absolute difference
/// for numeric features (clamped to 1, zero-range columns contribute 0) and a
/// mismatch indicator otherwise.
inline double gower_distance(const Instance& a, const Instance& b, const FeatureSchema& schema) {
    const auto p = schema.size();
    if (a.size() != p || b.size() != p) fail(ErrorKind::data, "gower: instance does not match schema");
    if (p == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        const auto& f = schema[j];
        if (f.kind == FeatureKind::numeric) {
            const double range = f.range();
            if (range > 0) sum += std::min(1.0, std::abs(a[j] - b[j]) / range);
        } else if (a[j] != b[j]) {
            sum += 1.0;
        }
    }
    return sum / static_cast<double>(p);
}

/// Distance rounded to 1e-12 for ranking, so that distances equal up to
/// summation-order rounding compare as ties.
inline double distance_rank_key(double d) { return std::round(d * 1e12); }

}  // namespace cfhybrid

#endif  // CFHYBRID_TABULAR_HPP
