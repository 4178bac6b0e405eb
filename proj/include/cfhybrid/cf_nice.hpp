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

#ifndef CFHYBRID_CF_NICE_HPP
#define CFHYBRID_CF_NICE_HPP

#include <algorithm>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "cfhybrid/cf_core.hpp"

namespace cfhybrid {

/// Rows of `data` that agree with x0 on every fixed feature: exactly for
/// binary/categorical features, within epsilon for numeric ones.
inline std::vector<std::size_t> restrict_pool(const Dataset& data, const Instance& x0, std::span<const std::size_t> fixed,
                                              double epsilon = kDefaultEpsilon) {
    const auto& schema = data.schema();
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& r = data.row(i);
        bool keep = true;
        for (std::size_t j : fixed)
            if (detail::drifted(schema[j], r[j], x0[j], epsilon)) {
                keep = false;
                break;
            }
        if (keep) pool.push_back(i);
    }
    return pool;
}

struct NiceResult {
    std::size_t pool_size = 0;
    std::uint64_t candidates_evaluated = 0;
    std::vector<Counterfactual> counterfactuals;  // empty: NICE exhausted
    std::vector<std::size_t> source_rows;         // training row behind each counterfactual
};

/// Nearest training rows whose predicted target probability lies in the band.
/// Candidates are deduplicated on feature values (first row wins) and ranked
/// by Gower distance, then number of changed features, then row order.
inline NiceResult nice_search(const CfQuery& q, const Predictor& f, const Dataset& data, Deadline deadline = {}) {
    const auto& schema = data.schema();
    NiceResult out;
    const auto pool = restrict_pool(data, q.x0, q.fixed, q.epsilon);
    out.pool_size = pool.size();
    if (pool.empty()) return out;

    std::vector<Instance> rows;
    rows.reserve(pool.size());
    for (auto i : pool) rows.push_back(data.row(i));
    deadline.check("nice");
    const auto probs = f.class_probabilities(rows, q.target_class);
    out.candidates_evaluated = rows.size();
    const double p0 = f.probability(q.x0, q.target_class);

    struct Entry {
        std::size_t row;
        std::size_t pos;
        double distance;  // rank key
        std::size_t n_changed;
    };
    std::vector<Entry> entries;
    std::map<Instance, bool> seen;
    for (std::size_t k = 0; k < pool.size(); ++k) {
        if (!q.in_band(probs[k])) continue;
        if (!seen.emplace(rows[k], true).second) continue;
        const double d = distance_rank_key(gower_distance(q.x0, rows[k], schema));
        entries.push_back({pool[k], k, d, changed_features(q.x0, rows[k]).size()});
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        if (a.n_changed != b.n_changed) return a.n_changed < b.n_changed;
        return a.row < b.row;
    });
    for (const auto& e : entries) {
        if (out.counterfactuals.size() >= q.k) break;
        auto cf = make_counterfactual(rows[e.pos], q, probs[e.pos], p0, Stage::nice, schema);
        if (!validate(cf.x_prime, q, f, schema, q.epsilon).empty()) continue;
        out.counterfactuals.push_back(std::move(cf));
        out.source_rows.push_back(e.row);
    }
    return out;
}

}  // namespace cfhybrid

#endif  // CFHYBRID_CF_NICE_HPP
