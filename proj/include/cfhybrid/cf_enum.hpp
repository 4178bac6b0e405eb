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

#ifndef CFHYBRID_CF_ENUM_HPP
#define CFHYBRID_CF_ENUM_HPP

#include <algorithm>
#include <atomic>
#include <bit>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "cfhybrid/cf_core.hpp"

namespace cfhybrid {

/// Largest m for which 2^m - 1 <= 2^20.
inline constexpr std::size_t kMaxEnumerationBits = 20;

/// Whether exhaustive enumeration runs for m binary actionable features:
/// 0 < m <= m_max and 2^m - 1 <= 2^20 (i.e. m <= 20).
inline bool enumeration_gate(std::size_t m, std::size_t m_max) {
    return m > 0 && m <= m_max && m <= kMaxEnumerationBits;
}

/// Copy of x0 with every feature in `subset` swapped to the other value of its
/// two-element observed domain.
inline Instance toggle(const Instance& x0, std::span<const std::size_t> subset, const FeatureSchema& schema,
                       std::span<const std::size_t> fixed = {}) {
    Instance x = x0;
    for (std::size_t j : subset) {
        if (j >= schema.size()) fail(ErrorKind::invalid_argument, "toggle: feature index out of range");
        const auto& f = schema[j];
        if (f.kind != FeatureKind::binary) fail(ErrorKind::invalid_argument, "toggle: '" + f.name + "' is not binary");
        if (std::find(fixed.begin(), fixed.end(), j) != fixed.end())
            fail(ErrorKind::invalid_argument, "toggle: '" + f.name + "' is fixed");
        const auto [lo, hi] = *f.two_values();
        if (x0[j] == lo) x[j] = hi;
        else if (x0[j] == hi) x[j] = lo;
        else fail(ErrorKind::data, "toggle: value of '" + f.name + "' is outside its domain");
    }
    return x;
}

struct EnumResult {
    std::size_t m = 0;
    std::uint64_t candidates_evaluated = 0;
    std::uint64_t n_valid = 0;
    std::vector<Counterfactual> valid;  // top min(k, n_valid), best first
    bool exhausted = false;             // every non-empty subset was visited
};

struct EnumOptions {
    unsigned threads = 1;
    std::size_t block_size = 1024;
    Deadline deadline;
};

namespace detail {

struct EnumHit {
    std::uint32_t mask;
    double p;
};

inline std::vector<std::size_t> mask_features(std::uint32_t mask, std::span<const std::size_t> binary) {
    std::vector<std::size_t> out;
    for (std::size_t b = 0; b < binary.size(); ++b)
        if (mask & (std::uint32_t{1} << b)) out.push_back(binary[b]);
    return out;
}

}  // namespace detail

/// Exhaustive search over non-empty subsets of `binary` (sorted feature
/// indices, all binary and actionable). Subsets are visited as ascending
/// bitmasks; candidates outside the probability band are discarded before
/// scoring. Returns nullopt when the enumeration gate is closed.
inline std::optional<EnumResult> enumerate(const CfQuery& q, const Predictor& f, const FeatureSchema& schema,
                                           std::span<const std::size_t> binary, const EnumOptions& opts = {}) {
    const std::size_t m = binary.size();
    if (!enumeration_gate(m, q.m_max)) return std::nullopt;
    if (!std::is_sorted(binary.begin(), binary.end()) ||
        std::adjacent_find(binary.begin(), binary.end()) != binary.end())
        fail(ErrorKind::invalid_argument, "binary feature set must be sorted and unique");
    // Domain checks up front so workers cannot throw on malformed input.
    (void)toggle(q.x0, binary, schema, q.fixed);

    const double p0 = f.probability(q.x0, q.target_class);
    const std::uint64_t total = (std::uint64_t{1} << m) - 1;
    const std::size_t block = std::max<std::size_t>(1, opts.block_size);
    const std::uint64_t n_blocks = (total + block - 1) / block;

    std::vector<std::pair<double, double>> flip(m);
    for (std::size_t b = 0; b < m; ++b) {
        const auto [lo, hi] = *schema[binary[b]].two_values();
        flip[b] = {q.x0[binary[b]], q.x0[binary[b]] == lo ? hi : lo};
    }

    std::atomic<std::uint64_t> next_block{0};
    std::atomic<std::uint64_t> evaluated{0};
    std::vector<std::vector<detail::EnumHit>> hits;
    std::mutex hits_mutex;
    std::exception_ptr error;

    auto worker = [&] {
        std::vector<detail::EnumHit> local;
        std::vector<Instance> batch;
        std::vector<double> probs;
        try {
            for (;;) {
                const std::uint64_t b = next_block.fetch_add(1);
                if (b >= n_blocks) break;
                opts.deadline.check("enumeration");
                const std::uint64_t first = 1 + b * block;
                const std::uint64_t last = std::min(total, first + block - 1);
                batch.assign(static_cast<std::size_t>(last - first + 1), q.x0);
                for (std::uint64_t mask = first; mask <= last; ++mask) {
                    auto& x = batch[static_cast<std::size_t>(mask - first)];
                    for (std::size_t bit = 0; bit < m; ++bit)
                        if (mask & (std::uint64_t{1} << bit)) x[binary[bit]] = flip[bit].second;
                }
                f.predict_batch(batch, probs);
                const auto c = f.num_classes();
                for (std::size_t i = 0; i < batch.size(); ++i) {
                    const double p = probs[i * c + q.target_class];
                    if (q.in_band(p)) local.push_back({static_cast<std::uint32_t>(first + i), p});
                }
                evaluated += batch.size();
            }
        } catch (...) {
            std::lock_guard lock(hits_mutex);
            if (!error) error = std::current_exception();
        }
        std::lock_guard lock(hits_mutex);
        hits.push_back(std::move(local));
    };

    const unsigned n_threads = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(n_blocks)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);

    std::vector<detail::EnumHit> all;
    for (auto& h : hits) all.insert(all.end(), h.begin(), h.end());

    struct Ranked {
        std::uint32_t mask;
        double p;
        double score;
        int size;
        double distance;
    };
    std::vector<Ranked> ranked;
    ranked.reserve(all.size());
    for (const auto& h : all) {
        const int size = std::popcount(h.mask);
        Instance x = q.x0;
        for (std::size_t bit = 0; bit < m; ++bit)
            if (h.mask & (std::uint32_t{1} << bit)) x[binary[bit]] = flip[bit].second;
        ranked.push_back({h.mask, h.p, composite_score(static_cast<std::size_t>(size), h.p, p0, q.alpha, q.beta), size,
                          gower_distance(q.x0, x, schema)});
    }
    auto before = [&](const Ranked& a, const Ranked& b) {
        if (a.score != b.score) return a.score < b.score;
        if (a.size != b.size) return a.size < b.size;
        if (a.distance != b.distance) return a.distance < b.distance;
        return detail::mask_features(a.mask, binary) < detail::mask_features(b.mask, binary);
    };
    const auto keep = std::min<std::size_t>(q.k, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(), before);

    EnumResult result;
    result.m = m;
    result.candidates_evaluated = evaluated.load();
    result.n_valid = ranked.size();
    result.exhausted = result.candidates_evaluated == total;
    for (std::size_t i = 0; i < keep; ++i) {
        const auto& r = ranked[i];
        Counterfactual cf;
        cf.x_prime = q.x0;
        for (std::size_t bit = 0; bit < m; ++bit)
            if (r.mask & (std::uint32_t{1} << bit)) cf.x_prime[binary[bit]] = flip[bit].second;
        cf.changed = detail::mask_features(r.mask, binary);
        cf.p_target = r.p;
        cf.score = r.score;
        cf.stage = Stage::enumeration;
        cf.distance = r.distance;
        result.valid.push_back(std::move(cf));
    }
    return result;
}

/// Binary set taken from the schema: binary-kind features that are actionable
/// and not fixed by the query.
inline std::vector<std::size_t> schema_binary_features(const CfQuery& q, const FeatureSchema& schema) {
    std::vector<std::size_t> out;
    const auto mask = actionable_mask(q, schema);
    for (std::size_t j = 0; j < schema.size(); ++j)
        if (mask[j] && schema[j].kind == FeatureKind::binary) out.push_back(j);
    return out;
}

inline std::optional<EnumResult> enumerate(const CfQuery& q, const Predictor& f, const FeatureSchema& schema,
                                           const EnumOptions& opts = {}) {
    const auto binary = schema_binary_features(q, schema);
    return enumerate(q, f, schema, binary, opts);
}

}  // namespace cfhybrid

#endif  // CFHYBRID_CF_ENUM_HPP
