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

#ifndef CFHYBRID_CF_MOC_HPP
#define CFHYBRID_CF_MOC_HPP

#include <algorithm>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <span>
#include <vector>

#include "cfhybrid/cf_core.hpp"
#include "cfhybrid/random.hpp"

namespace cfhybrid {

struct MocConfig {
    std::size_t population = 40;
    std::size_t generations = 60;
    double mutation_rate = 0.1;       // per actionable feature
    double crossover_rate = 0.9;
    double init_mutation_rate = 0.2;  // used to spread the initial population around x0
    std::uint64_t seed = 0;

    void validate() const {
        if (population < 4 || population % 2 != 0) fail(ErrorKind::invalid_argument, "population must be even and >= 4");
        if (generations < 1) fail(ErrorKind::invalid_argument, "generations must be >= 1");
        for (double r : {mutation_rate, crossover_rate, init_mutation_rate})
            if (!(r >= 0.0 && r <= 1.0)) fail(ErrorKind::invalid_argument, "rates must be in [0,1]");
    }
};

/// All three objectives are minimised.
struct Objectives {
    double proximity = 0.0;  // Gower distance to x0
    double sparsity = 0.0;   // number of changed features
    double prob_gap = 0.0;   // distance of the target probability from the band, 0 inside

    double operator[](std::size_t i) const { return i == 0 ? proximity : (i == 1 ? sparsity : prob_gap); }
    friend bool operator==(const Objectives&, const Objectives&) = default;
};

inline bool dominates(const Objectives& a, const Objectives& b) {
    bool strict = false;
    for (std::size_t i = 0; i < 3; ++i) {
        if (a[i] > b[i]) return false;
        if (a[i] < b[i]) strict = true;
    }
    return strict;
}

inline double probability_gap(double p, double p_min, double p_max) {
    return std::max({0.0, p_min - p, p - p_max});
}

struct MocIndividual {
    Instance genome;
    Objectives objectives;
    double p_target = 0.0;
};

/// Fronts of the fast non-dominated sort; front 0 is the Pareto front.
inline std::vector<std::vector<std::size_t>> non_dominated_sort(std::span<const Objectives> pts) {
    const auto n = pts.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> count(n, 0);
    std::vector<std::vector<std::size_t>> fronts(1);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            if (dominates(pts[a], pts[b])) {
                dominated[a].push_back(b);
                ++count[b];
            } else if (dominates(pts[b], pts[a])) {
                dominated[b].push_back(a);
                ++count[a];
            }
        }
    }
    for (std::size_t a = 0; a < n; ++a)
        if (count[a] == 0) fronts[0].push_back(a);
    while (!fronts.back().empty()) {
        std::vector<std::size_t> next;
        for (auto a : fronts.back())
            for (auto b : dominated[a])
                if (--count[b] == 0) next.push_back(b);
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(next));
    }
    fronts.pop_back();
    return fronts;
}

inline std::vector<std::size_t> pareto_front_indices(std::span<const Objectives> pts) {
    if (pts.empty()) return {};
    return non_dominated_sort(pts).front();
}

inline std::vector<MocIndividual> pareto_front(std::span<const MocIndividual> individuals) {
    std::vector<Objectives> pts;
    for (const auto& ind : individuals) pts.push_back(ind.objectives);
    std::vector<MocIndividual> out;
    for (auto i : pareto_front_indices(pts)) out.push_back(individuals[i]);
    return out;
}

/// Crowding distance of each member of `front` (same order). Boundary points get +inf.
inline std::vector<double> crowding_distance(std::span<const Objectives> pts, std::span<const std::size_t> front) {
    const auto n = front.size();
    std::vector<double> dist(n, 0.0);
    if (n <= 2) {
        std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
        return dist;
    }
    std::vector<std::size_t> order(n);
    for (std::size_t obj = 0; obj < 3; ++obj) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](auto a, auto b) { return pts[front[a]][obj] < pts[front[b]][obj]; });
        const double lo = pts[front[order.front()]][obj];
        const double hi = pts[front[order.back()]][obj];
        dist[order.front()] = dist[order.back()] = std::numeric_limits<double>::infinity();
        if (hi <= lo) continue;
        for (std::size_t k = 1; k + 1 < n; ++k)
            dist[order[k]] += (pts[front[order[k + 1]]][obj] - pts[front[order[k - 1]]][obj]) / (hi - lo);
    }
    return dist;
}

struct MocTrace {
    std::size_t generation;
    double best_gap;
    std::size_t front_size;
};

struct MocResult {
    std::vector<Counterfactual> counterfactuals;  // empty: MOC exhausted
    std::vector<MocIndividual> final_population;
    std::vector<MocTrace> trace;  // generation 0 is the initial population
    std::uint64_t evaluations = 0;
};

inline void write_moc_trace_csv(std::ostream& out, const std::vector<MocTrace>& trace) {
    out << "generation,best_prob_gap,front_size\n";
    for (const auto& t : trace) out << t.generation << ',' << format_double(t.best_gap) << ',' << t.front_size << '\n';
}

namespace detail {

class MocRun {
public:
    MocRun(const CfQuery& q, const Predictor& f, const FeatureSchema& schema, const MocConfig& cfg)
        : q_(q), f_(f), schema_(schema), cfg_(cfg), rng_(cfg.seed) {
        const auto mask = actionable_mask(q, schema);
        for (std::size_t j = 0; j < mask.size(); ++j)
            if (mask[j]) actionable_.push_back(j);
        if (actionable_.empty()) fail(ErrorKind::invalid_argument, "moc: no actionable features");
    }

    MocResult run(const Deadline& deadline) {
        MocResult result;
        std::vector<MocIndividual> pop;
        pop.push_back({q_.x0, {}, 0.0});
        while (pop.size() < cfg_.population) {
            Instance g = q_.x0;
            mutate(g, cfg_.init_mutation_rate);
            pop.push_back({std::move(g), {}, 0.0});
        }
        evaluate(pop, result.evaluations);
        result.trace.push_back(summarize(0, pop));

        for (std::size_t gen = 1; gen <= cfg_.generations; ++gen) {
            deadline.check("moc");
            std::vector<Objectives> pts;
            for (const auto& ind : pop) pts.push_back(ind.objectives);
            const auto fronts = non_dominated_sort(pts);
            std::vector<std::size_t> rank(pop.size());
            std::vector<double> crowd(pop.size());
            for (std::size_t r = 0; r < fronts.size(); ++r) {
                const auto cd = crowding_distance(pts, fronts[r]);
                for (std::size_t k = 0; k < fronts[r].size(); ++k) {
                    rank[fronts[r][k]] = r;
                    crowd[fronts[r][k]] = cd[k];
                }
            }
            auto tournament = [&] {
                const auto a = static_cast<std::size_t>(rng_.index(pop.size()));
                const auto b = static_cast<std::size_t>(rng_.index(pop.size()));
                if (rank[a] != rank[b]) return rank[a] < rank[b] ? a : b;
                if (crowd[a] != crowd[b]) return crowd[a] > crowd[b] ? a : b;
                return std::min(a, b);
            };

            std::vector<MocIndividual> offspring;
            while (offspring.size() < cfg_.population) {
                Instance c1 = pop[tournament()].genome;
                Instance c2 = pop[tournament()].genome;
                if (rng_.bernoulli(cfg_.crossover_rate)) {
                    for (auto j : actionable_)
                        if (rng_.bernoulli(0.5)) std::swap(c1[j], c2[j]);
                }
                mutate(c1, cfg_.mutation_rate);
                mutate(c2, cfg_.mutation_rate);
                offspring.push_back({std::move(c1), {}, 0.0});
                offspring.push_back({std::move(c2), {}, 0.0});
            }
            evaluate(offspring, result.evaluations);
            pop.insert(pop.end(), std::make_move_iterator(offspring.begin()), std::make_move_iterator(offspring.end()));
            pop = survivors(std::move(pop));
            result.trace.push_back(summarize(gen, pop));
        }

        result.final_population = pop;
        result.counterfactuals = extract(pop);
        return result;
    }

private:
    void mutate(Instance& g, double rate) {
        for (auto j : actionable_) {
            if (!rng_.bernoulli(rate)) continue;
            const auto& f = schema_[j];
            switch (f.kind) {
                case FeatureKind::binary:
                    g[j] = g[j] == f.values[0] ? f.values[1] : f.values[0];
                    break;
                case FeatureKind::categorical:
                    g[j] = f.values[static_cast<std::size_t>(rng_.index(f.values.size()))];
                    break;
                case FeatureKind::numeric:
                    if (f.range() > 0) g[j] = std::clamp(g[j] + rng_.normal(0.0, 0.1 * f.range()), f.min, f.max);
                    break;
            }
        }
        for (auto j : q_.fixed) g[j] = q_.x0[j];
    }

    void evaluate(std::vector<MocIndividual>& inds, std::uint64_t& counter) {
        std::vector<Instance> genomes;
        genomes.reserve(inds.size());
        for (const auto& ind : inds) genomes.push_back(ind.genome);
        const auto probs = f_.class_probabilities(genomes, q_.target_class);
        counter += genomes.size();
        for (std::size_t i = 0; i < inds.size(); ++i) {
            auto& ind = inds[i];
            ind.p_target = probs[i];
            ind.objectives.proximity = gower_distance(q_.x0, ind.genome, schema_);
            ind.objectives.sparsity = static_cast<double>(changed_features(q_.x0, ind.genome).size());
            ind.objectives.prob_gap = probability_gap(probs[i], q_.p_min, q_.p_max);
        }
    }

    /// (mu + mu) NSGA-II truncation. The last admitted front is cut by
    /// descending crowding distance, ties by smaller prob_gap, then position.
    std::vector<MocIndividual> survivors(std::vector<MocIndividual> pool) const {
        std::vector<Objectives> pts;
        for (const auto& ind : pool) pts.push_back(ind.objectives);
        std::vector<MocIndividual> next;
        for (const auto& front : non_dominated_sort(pts)) {
            if (next.size() + front.size() <= cfg_.population) {
                for (auto i : front) next.push_back(pool[i]);
                continue;
            }
            const auto cd = crowding_distance(pts, front);
            std::vector<std::size_t> order(front.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
                if (cd[a] != cd[b]) return cd[a] > cd[b];
                if (pts[front[a]].prob_gap != pts[front[b]].prob_gap)
                    return pts[front[a]].prob_gap < pts[front[b]].prob_gap;
                return front[a] < front[b];
            });
            for (std::size_t k = 0; next.size() < cfg_.population; ++k) next.push_back(pool[front[order[k]]]);
            break;
        }
        return next;
    }

    MocTrace summarize(std::size_t gen, const std::vector<MocIndividual>& pop) const {
        double best = std::numeric_limits<double>::infinity();
        std::vector<Objectives> pts;
        for (const auto& ind : pop) {
            best = std::min(best, ind.objectives.prob_gap);
            pts.push_back(ind.objectives);
        }
        return {gen, best, pareto_front_indices(pts).size()};
    }

    std::vector<Counterfactual> extract(const std::vector<MocIndividual>& pop) const {
        const double p0 = f_.probability(q_.x0, q_.target_class);
        std::vector<MocIndividual> feasible;
        std::set<Instance> seen;
        for (const auto& ind : pop) {
            if (!q_.in_band(ind.p_target)) continue;
            if (!validate(ind.genome, q_, f_, schema_, q_.epsilon).empty()) continue;
            if (!seen.insert(ind.genome).second) continue;
            feasible.push_back(ind);
        }
        std::vector<Counterfactual> out;
        for (auto& ind : pareto_front(feasible))
            out.push_back(make_counterfactual(std::move(ind.genome), q_, ind.p_target, p0, Stage::moc, schema_));
        std::sort(out.begin(), out.end(), ranks_before);
        if (out.size() > q_.k) out.resize(q_.k);
        return out;
    }

    const CfQuery& q_;
    const Predictor& f_;
    const FeatureSchema& schema_;
    const MocConfig& cfg_;
    Rng rng_;
    std::vector<std::size_t> actionable_;
};

}  // namespace detail

/// Multi-objective genetic search (proximity, sparsity, probability gap) over
/// variants of x0 with fixed features held at their original values. The
/// final population is filtered by the band and validated; the returned
/// counterfactuals are the Pareto front of the survivors ranked by score.
inline MocResult moc_search(const CfQuery& q, const Predictor& f, const FeatureSchema& schema, const MocConfig& config,
                            Deadline deadline = {}) {
    config.validate();
    detail::MocRun run(q, f, schema, config);
    return run.run(deadline);
}

}  // namespace cfhybrid

#endif  // CFHYBRID_CF_MOC_HPP
