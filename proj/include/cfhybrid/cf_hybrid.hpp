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

#ifndef CFHYBRID_CF_HYBRID_HPP
#define CFHYBRID_CF_HYBRID_HPP

#include <chrono>
#include <vector>

#include "json.hpp"

#include "cfhybrid/cf_enum.hpp"
#include "cfhybrid/cf_moc.hpp"
#include "cfhybrid/cf_nice.hpp"

namespace cfhybrid {

struct StageTiming {
    bool invoked = false;
    std::uint64_t evaluations = 0;
    double elapsed_ms = 0.0;
};

struct HybridReport {
    Stage stage_used = Stage::none;
    std::size_t m = 0;
    std::vector<std::size_t> binary_features;
    bool enumeration_gate = false;
    std::uint64_t candidates_evaluated = 0;
    double p_origin = 0.0;
    std::vector<Counterfactual> counterfactuals;
    StageTiming enumeration, nice, moc;
    std::size_t nice_pool_size = 0;
};

struct HybridOptions {
    MocConfig moc;            // seed is overwritten with the query seed
    unsigned threads = 1;     // enumeration workers
    std::optional<std::chrono::milliseconds> stage_budget;
    Deadline deadline;        // whole-call budget
};

namespace detail {
template <typename Fn>
auto timed(StageTiming& t, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    t.invoked = true;
    auto out = fn();
    t.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return out;
}

inline Deadline stage_deadline(const HybridOptions& o) {
    return Deadline::earliest(o.deadline, o.stage_budget ? Deadline(*o.stage_budget) : Deadline());
}
}  // namespace detail

/// Enumeration over binary actionable features when the gate is open; NICE
/// on the fixed-feature-restricted training pool otherwise or when
/// enumeration finds nothing; MOC when NICE finds nothing. Features the
/// schema marks non-actionable are treated as fixed.
inline HybridReport generate(CfQuery q, const Predictor& f, const Dataset& data, const HybridOptions& opts = {}) {
    const auto& schema = data.schema();
    fix_non_actionable(q, schema);
    normalize_query(q, schema, f.num_classes());

    HybridReport report;
    report.p_origin = f.probability(q.x0, q.target_class);
    const auto actionable = actionable_mask(q, schema);
    for (auto j : identify_binary_features(data, actionable))
        if (schema[j].kind == FeatureKind::binary) report.binary_features.push_back(j);
    report.m = report.binary_features.size();
    report.enumeration_gate = enumeration_gate(report.m, q.m_max);

    auto finish = [&](Stage stage, std::vector<Counterfactual> cfs) {
        for (const auto& cf : cfs)
            if (!validate(cf.x_prime, q, f, schema, q.epsilon).empty())
                fail(ErrorKind::data, "internal: returned counterfactual failed validation");
        report.stage_used = cfs.empty() ? Stage::none : stage;
        report.counterfactuals = std::move(cfs);
        report.candidates_evaluated =
            report.enumeration.evaluations + report.nice.evaluations + report.moc.evaluations;
        return report;
    };

    if (report.enumeration_gate) {
        EnumOptions eo;
        eo.threads = opts.threads;
        eo.deadline = detail::stage_deadline(opts);
        auto res = detail::timed(report.enumeration,
                                 [&] { return enumerate(q, f, schema, report.binary_features, eo); });
        report.enumeration.evaluations = res->candidates_evaluated;
        if (!res->valid.empty()) return finish(Stage::enumeration, std::move(res->valid));
    }

    auto nice = detail::timed(report.nice, [&] { return nice_search(q, f, data, detail::stage_deadline(opts)); });
    report.nice.evaluations = nice.candidates_evaluated;
    report.nice_pool_size = nice.pool_size;
    if (!nice.counterfactuals.empty()) return finish(Stage::nice, std::move(nice.counterfactuals));

    bool any_actionable = false;
    for (bool a : actionable) any_actionable = any_actionable || a;
    if (!any_actionable) return finish(Stage::none, {});
    MocConfig mc = opts.moc;
    mc.seed = q.seed;
    auto moc = detail::timed(report.moc, [&] { return moc_search(q, f, schema, mc, detail::stage_deadline(opts)); });
    report.moc.evaluations = moc.evaluations;
    return finish(Stage::moc, std::move(moc.counterfactuals));
}

/// HybridReport as JSON. Elapsed times are optional so that reports written
/// to disk stay byte-reproducible.
inline nlohmann::json to_json(const HybridReport& r, const Instance& x0, const FeatureSchema& schema,
                              bool include_elapsed = false) {
    using nlohmann::json;
    json cfs = json::array();
    for (const auto& cf : r.counterfactuals) cfs.push_back(to_json(cf, x0, r.p_origin, schema));
    auto timing = [&](const StageTiming& t) {
        json j = {{"invoked", t.invoked}, {"evaluations", t.evaluations}};
        if (include_elapsed) j["elapsed_ms"] = t.elapsed_ms;
        return j;
    };
    json binary = json::array();
    for (auto j : r.binary_features) binary.push_back(schema[j].name);
    return {{"stage_used", to_string(r.stage_used)},
            {"m", r.m},
            {"binary_features", binary},
            {"enumeration_gate", r.enumeration_gate},
            {"candidates_evaluated", r.candidates_evaluated},
            {"nice_pool_size", r.nice_pool_size},
            {"p_origin", r.p_origin},
            {"counterfactuals", cfs},
            {"stages", {{"enumeration", timing(r.enumeration)}, {"nice", timing(r.nice)}, {"moc", timing(r.moc)}}}};
}

}  // namespace cfhybrid

#endif  // CFHYBRID_CF_HYBRID_HPP
