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

#ifndef CFHYBRID_COHORT_HPP
#define CFHYBRID_COHORT_HPP

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "cfhybrid/random.hpp"
#include "cfhybrid/tabular.hpp"

namespace cfhybrid::cohort {

struct Event {
    int offset = 0;  // days relative to the index date
    std::string code;
    std::optional<double> value;
};

struct EventTimeline {
    std::string patient_id;
    int index_date = 0;  // days since 1970-01-01
    double age = 0.0;
    std::string sex;  // "F" or "M"
    int eci = 0;
    std::vector<Event> events;  // ascending offset
};

enum class CodeKind { diagnosis, medication, lab };
enum class Aggregation { count, last_value, presence };  // declaration order is lexicographic

inline std::string_view to_string(Aggregation a) {
    switch (a) {
        case Aggregation::count: return "count";
        case Aggregation::last_value: return "last_value";
        case Aggregation::presence: return "presence";
    }
    return "";
}

struct CodeSpec {
    std::string code;
    CodeKind kind;
};

struct Window {
    int start;  // inclusive
    int end;    // exclusive
    friend auto operator<=>(const Window&, const Window&) = default;
};

/// Fixed-window featurisation: one column per (code, window, aggregation).
struct WindowSpec {
    std::vector<Window> windows;
    std::vector<CodeSpec> codes;
    std::map<CodeKind, std::vector<Aggregation>> aggregations;

    void validate() const {
        if (windows.empty()) fail(ErrorKind::invalid_argument, "window spec has no windows");
        for (const auto& w : windows)
            if (!(w.start < w.end)) fail(ErrorKind::invalid_argument, "window start must precede end");
    }

    static WindowSpec standard() {
        WindowSpec s;
        s.windows = {{-365, 0}, {0, 180}};
        for (const char* c : {"HTN", "CKD", "DM", "CAD", "HFpEF"}) s.codes.push_back({c, CodeKind::diagnosis});
        for (const char* c : {"loop-diuretic", "ACE-inhibitor"}) s.codes.push_back({c, CodeKind::medication});
        for (const char* c : {"creatinine", "A1c"}) s.codes.push_back({c, CodeKind::lab});
        s.aggregations[CodeKind::diagnosis] = {Aggregation::presence};
        s.aggregations[CodeKind::medication] = {Aggregation::presence, Aggregation::count};
        s.aggregations[CodeKind::lab] = {Aggregation::presence, Aggregation::last_value};
        return s;
    }

    struct Column {
        std::string name;
        std::string code;
        Window window;
        Aggregation aggregation;
    };

    /// Event columns ordered by (code, window, aggregation).
    std::vector<Column> columns() const {
        auto codes_sorted = codes;
        std::sort(codes_sorted.begin(), codes_sorted.end(), [](auto& a, auto& b) { return a.code < b.code; });
        auto wins = windows;
        std::sort(wins.begin(), wins.end());
        std::vector<Column> out;
        for (const auto& c : codes_sorted) {
            auto aggs = aggregations.count(c.kind) ? aggregations.at(c.kind) : std::vector<Aggregation>{};
            std::sort(aggs.begin(), aggs.end());
            aggs.erase(std::unique(aggs.begin(), aggs.end()), aggs.end());
            for (const auto& w : wins)
                for (auto a : aggs)
                    out.push_back({c.code + "@" + std::to_string(w.start) + ":" + std::to_string(w.end) + "." +
                                       std::string(to_string(a)),
                                   c.code, w, a});
        }
        return out;
    }
};

inline const std::vector<std::string>& static_columns() {
    static const std::vector<std::string> cols{"age", "sex", "eci"};
    return cols;
}

inline const std::vector<std::string>& sex_tokens() {
    static const std::vector<std::string> tokens{"F", "M"};
    return tokens;
}

/// Featurises one timeline; static fields age, sex (token index), eci last.
inline Instance featurize(const EventTimeline& t, const WindowSpec& spec) {
    spec.validate();
    Instance x;
    for (const auto& col : spec.columns()) {
        double count = 0;
        std::optional<double> last;
        int last_offset = 0;
        for (const auto& e : t.events) {
            if (e.code != col.code || e.offset < col.window.start || e.offset >= col.window.end) continue;
            ++count;
            if (e.value && (!last || e.offset >= last_offset)) {
                last = e.value;
                last_offset = e.offset;
            }
        }
        switch (col.aggregation) {
            case Aggregation::presence: x.push_back(count > 0 ? 1.0 : 0.0); break;
            case Aggregation::count: x.push_back(count); break;
            case Aggregation::last_value: x.push_back(last.value_or(0.0)); break;
        }
    }
    x.push_back(t.age);
    const auto& tok = sex_tokens();
    const auto it = std::find(tok.begin(), tok.end(), t.sex);
    if (it == tok.end()) fail(ErrorKind::data, "patient " + t.patient_id + ": sex must be F or M");
    x.push_back(static_cast<double>(it - tok.begin()));
    x.push_back(static_cast<double>(t.eci));
    return x;
}

/// Feature names in featurize() order.
inline std::vector<std::string> feature_names(const WindowSpec& spec) {
    std::vector<std::string> names;
    for (const auto& c : spec.columns()) names.push_back(c.name);
    for (const auto& s : static_columns()) names.push_back(s);
    return names;
}

/// Featurises a cohort into a Dataset whose schema domains are observed from
/// the result. Age and sex are marked non-actionable.
inline Dataset featurize_cohort(std::span<const EventTimeline> timelines, const WindowSpec& spec,
                                std::vector<int> labels = {}) {
    const auto names = feature_names(spec);
    std::vector<Instance> rows;
    rows.reserve(timelines.size());
    for (const auto& t : timelines) rows.push_back(featurize(t, spec));
    std::vector<FeatureSpec> specs;
    std::vector<double> column(rows.size());
    for (std::size_t j = 0; j < names.size(); ++j) {
        for (std::size_t i = 0; i < rows.size(); ++i) column[i] = rows[i][j];
        const bool is_sex = names[j] == "sex";
        const bool actionable = names[j] != "age" && !is_sex;
        specs.push_back(infer_feature(names[j], column, is_sex ? sex_tokens() : std::vector<std::string>{}, actionable));
        if (is_sex && specs.back().kind == FeatureKind::categorical && specs.back().values.size() == 1) {
            // single-sex cohort: keep both tokens in the domain
            specs.back().values = {0.0, 1.0};
            specs.back().kind = FeatureKind::binary;
        }
    }
    return Dataset(FeatureSchema(std::move(specs)), std::move(rows), std::move(labels));
}

// ---------------------------------------------------------------------------
// Synthetic cohort generation

struct CohortConfig {
    std::size_t n = 2744;
    double intercept = -6.2;
    /// Log-odds added when the code occurs before the index date.
    std::map<std::string, double> coefficients{{"HTN", 4.0},          {"CKD", 1.0},          {"DM", 1.0},
                                               {"CAD", 0.3},          {"HFpEF", 0.3},        {"loop-diuretic", 0.2},
                                               {"ACE-inhibitor", -0.2}};
    double noise = 0.3;  // sd of Gaussian noise on the logit
    std::uint64_t seed = 7;
};

struct Cohort {
    std::vector<EventTimeline> timelines;
    std::vector<int> labels;
};

inline constexpr int kFirstIndexDate = 18327;  // 2020-03-06
inline constexpr int kLastIndexDate = 19150;   // 2022-06-07

/// Draws timelines whose static fields follow age ~ N(70.1, 13.9), 46.4%
/// female and ECI ~ N(6.19, 2.98), with comorbidity, medication and lab
/// events before and after the index date. Labels are
/// Bernoulli(sigmoid(intercept + sum of coefficients of codes present before
/// the index date + noise)).
inline Cohort generate_cohort(const CohortConfig& cfg) {
    if (cfg.n < 20) fail(ErrorKind::invalid_argument, "cohort size must be >= 20");
    Rng rng(cfg.seed);
    Cohort out;
    out.timelines.reserve(cfg.n);
    out.labels.reserve(cfg.n);

    struct Base {
        const char* code;
        double prevalence;
    };
    static constexpr Base kDiagnoses[] = {{"HTN", 0.55}, {"CKD", 0.35}, {"DM", 0.35}, {"CAD", 0.35}, {"HFpEF", 0.5}};

    for (std::size_t i = 0; i < cfg.n; ++i) {
        EventTimeline t;
        t.patient_id = "P" + std::to_string(100000 + i);
        t.index_date = kFirstIndexDate + static_cast<int>(rng.index(kLastIndexDate - kFirstIndexDate + 1));
        t.age = std::clamp(std::round(rng.normal(70.1, 13.9)), 20.0, 100.0);
        t.sex = rng.bernoulli(0.464) ? "F" : "M";
        t.eci = static_cast<int>(std::max(0.0, std::round(rng.normal(6.19, 2.98))));
        const double burden = 0.5 + 0.5 * static_cast<double>(t.eci) / 6.19;

        std::map<std::string, bool> pre;
        auto add_events = [&](const std::string& code, int count, int lo, int hi, auto value) {
            for (int k = 0; k < count; ++k) {
                Event e{lo + static_cast<int>(rng.index(static_cast<std::uint64_t>(hi - lo))), code, value()};
                t.events.push_back(std::move(e));
            }
        };
        auto no_value = [] { return std::optional<double>{}; };

        for (const auto& d : kDiagnoses) {
            const bool has = rng.bernoulli(std::clamp(d.prevalence * burden, 0.02, 0.95));
            pre[d.code] = has;
            if (has) add_events(d.code, 1 + rng.poisson(1.5), -365, 0, no_value);
        }
        const double p_loop = pre["HFpEF"] ? 0.65 : 0.35;
        const double p_ace = pre["HTN"] ? 0.55 : 0.25;
        for (auto [code, prob] : {std::pair<const char*, double>{"loop-diuretic", p_loop}, {"ACE-inhibitor", p_ace}}) {
            const bool has = rng.bernoulli(prob);
            pre[code] = has;
            if (has) {
                add_events(code, 1 + rng.poisson(2.0), -365, 0, no_value);
                if (rng.bernoulli(0.7)) add_events(code, 1 + rng.poisson(1.0), 0, 180, no_value);
            }
        }
        const double creat_mean = pre["CKD"] ? 1.7 : 1.0;
        auto creat = [&] { return std::optional<double>(std::max(0.3, std::round(rng.normal(creat_mean, 0.2) * 10) / 10)); };
        const double a1c_mean = pre["DM"] ? 8.1 : 5.6;
        auto a1c = [&] { return std::optional<double>(std::max(4.0, std::round(rng.normal(a1c_mean, 0.5) * 10) / 10)); };
        pre["creatinine"] = rng.bernoulli(0.85);
        if (pre["creatinine"]) add_events("creatinine", 1 + rng.poisson(1.0), -365, 0, creat);
        if (rng.bernoulli(0.6)) add_events("creatinine", 1 + rng.poisson(0.5), 0, 180, creat);
        pre["A1c"] = rng.bernoulli(pre["DM"] ? 0.9 : 0.6);
        if (pre["A1c"]) add_events("A1c", 1 + rng.poisson(0.5), -365, 0, a1c);
        if (rng.bernoulli(0.4)) add_events("A1c", 1, 0, 180, a1c);

        std::stable_sort(t.events.begin(), t.events.end(), [](auto& a, auto& b) { return a.offset < b.offset; });

        double logit = cfg.intercept;
        for (const auto& [code, coef] : cfg.coefficients) {
            auto it = pre.find(code);
            if (it != pre.end() && it->second) logit += coef;
        }
        if (cfg.noise > 0) logit += rng.normal(0.0, cfg.noise);
        const double p = 1.0 / (1.0 + std::exp(-logit));
        out.labels.push_back(rng.bernoulli(p) ? 1 : 0);
        out.timelines.push_back(std::move(t));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Case-control matching

struct MatchConfig {
    int ratio = 6;
    int age_bin = 10;  // years per age group
    int eci_band = 2;  // ECI points per band
};

struct MatchResult {
    std::vector<std::vector<std::size_t>> controls;  // per case, indices into the pool
    std::vector<std::size_t> under_matched;          // cases with fewer than `ratio` controls

    std::size_t matched_count() const {
        std::size_t n = 0;
        for (const auto& c : controls) n += c.size();
        return n;
    }
};

/// Greedy matching without replacement. Each case, in order, takes up to
/// `ratio` unused pool members with the same age group, sex and ECI band,
/// nearest in index date first, ties by pool order.
inline MatchResult match_controls(std::span<const EventTimeline> cases, std::span<const EventTimeline> pool,
                                  const MatchConfig& cfg = {}) {
    if (cfg.ratio < 1) fail(ErrorKind::invalid_argument, "matching ratio must be >= 1");
    if (cfg.age_bin < 1 || cfg.eci_band < 1) fail(ErrorKind::invalid_argument, "bin widths must be >= 1");
    auto key = [&](const EventTimeline& t) {
        const auto age_group = static_cast<long>(std::floor(t.age / cfg.age_bin));
        return std::to_string(age_group) + "|" + t.sex + "|" + std::to_string(t.eci / cfg.eci_band);
    };
    std::unordered_map<std::string, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < pool.size(); ++i) strata[key(pool[i])].push_back(i);
    std::vector<bool> used(pool.size(), false);
    MatchResult r;
    r.controls.resize(cases.size());
    for (std::size_t c = 0; c < cases.size(); ++c) {
        auto it = strata.find(key(cases[c]));
        if (it != strata.end()) {
            std::vector<std::size_t> cand;
            for (auto i : it->second)
                if (!used[i]) cand.push_back(i);
            std::stable_sort(cand.begin(), cand.end(), [&](auto a, auto b) {
                return std::abs(pool[a].index_date - cases[c].index_date) <
                       std::abs(pool[b].index_date - cases[c].index_date);
            });
            for (std::size_t k = 0; k < cand.size() && r.controls[c].size() < static_cast<std::size_t>(cfg.ratio); ++k) {
                used[cand[k]] = true;
                r.controls[c].push_back(cand[k]);
            }
        }
        if (r.controls[c].size() < static_cast<std::size_t>(cfg.ratio)) r.under_matched.push_back(c);
    }
    return r;
}

// ---------------------------------------------------------------------------
// JSON-lines timeline format

inline nlohmann::json to_json(const EventTimeline& t) {
    nlohmann::json events = nlohmann::json::array();
    for (const auto& e : t.events) {
        nlohmann::json j = {{"offset", e.offset}, {"code", e.code}};
        if (e.value) j["value"] = *e.value;
        events.push_back(std::move(j));
    }
    return {{"patient_id", t.patient_id},
            {"index_date", t.index_date},
            {"static", {{"age", t.age}, {"sex", t.sex}, {"eci", t.eci}}},
            {"events", events}};
}

inline EventTimeline timeline_from_json(const nlohmann::json& j) {
    try {
        EventTimeline t;
        t.patient_id = j.at("patient_id").is_string() ? j.at("patient_id").get<std::string>() : j.at("patient_id").dump();
        t.index_date = j.at("index_date").get<int>();
        const auto& s = j.at("static");
        t.age = s.at("age").get<double>();
        t.sex = s.at("sex").get<std::string>();
        t.eci = s.at("eci").get<int>();
        if (t.eci < 0) fail(ErrorKind::data, "patient " + t.patient_id + ": ECI must be >= 0");
        for (const auto& e : j.value("events", nlohmann::json::array())) {
            Event ev{e.at("offset").get<int>(), e.at("code").get<std::string>(), std::nullopt};
            if (e.contains("value") && !e.at("value").is_null()) ev.value = e.at("value").get<double>();
            t.events.push_back(std::move(ev));
        }
        std::stable_sort(t.events.begin(), t.events.end(), [](auto& a, auto& b) { return a.offset < b.offset; });
        return t;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::data, std::string("malformed timeline: ") + e.what());
    }
}

inline void write_jsonl(std::ostream& out, std::span<const EventTimeline> timelines) {
    for (const auto& t : timelines) out << to_json(t).dump() << '\n';
}

inline std::vector<EventTimeline> read_jsonl(std::istream& in) {
    std::vector<EventTimeline> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(timeline_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::data, "timeline line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace cfhybrid::cohort

#endif  // CFHYBRID_COHORT_HPP
