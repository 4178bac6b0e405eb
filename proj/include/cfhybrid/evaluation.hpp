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

#ifndef CFHYBRID_EVALUATION_HPP
#define CFHYBRID_EVALUATION_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "cfhybrid/random.hpp"

namespace cfhybrid {

namespace detail {

inline void check_scored(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) fail(ErrorKind::invalid_argument, "scores and labels differ in length");
    bool pos = false, neg = false;
    for (int y : labels) {
        if (y == 1) pos = true;
        else if (y == 0) neg = true;
        else fail(ErrorKind::invalid_argument, "labels must be 0/1");
    }
    if (!pos || !neg) fail(ErrorKind::invalid_argument, "both classes must be present");
}

}  // namespace detail

/// Mann-Whitney AUROC, ties counted as one half. O(n log n) via midranks.
inline double auroc(std::span<const double> scores, std::span<const int> labels) {
    detail::check_scored(scores, labels);
    const auto n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
    double rank_sum_pos = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]] == 1) {
                rank_sum_pos += midrank;
                ++n_pos;
            }
        i = j;
    }
    const double np = static_cast<double>(n_pos);
    const double nn = static_cast<double>(n - n_pos);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

struct RocPoint {
    double fpr;
    double tpr;
    double threshold;  // instances with score >= threshold are called positive
};

/// ROC curve from (0,0) to (1,1), one point per distinct score. The first
/// point carries an infinite threshold.
inline std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
    detail::check_scored(scores, labels);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
    double P = 0, N = 0;
    for (int y : labels) (y == 1 ? P : N) += 1;
    std::vector<RocPoint> pts{{0.0, 0.0, std::numeric_limits<double>::infinity()}};
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            (labels[order[i]] == 1 ? tp : fp) += 1;
            ++i;
        }
        pts.push_back({fp / N, tp / P, s});
    }
    return pts;
}

/// Percentile interval of AUROC over stratified bootstrap resamples. Each
/// resample draws from a seed derived from (seed, resample index).
inline std::pair<double, double> bootstrap_ci(std::span<const double> scores, std::span<const int> labels,
                                              int n_boot = 1000, double level = 0.95, std::uint64_t seed = 0) {
    detail::check_scored(scores, labels);
    if (n_boot < 100) fail(ErrorKind::invalid_argument, "n_boot must be >= 100");
    if (!(level > 0.0 && level < 1.0)) fail(ErrorKind::invalid_argument, "level must be in (0,1)");
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
    std::vector<double> stats(static_cast<std::size_t>(n_boot));
    std::vector<double> s(scores.size());
    std::vector<int> y(scores.size());
    for (int b = 0; b < n_boot; ++b) {
        Rng rng(seed ^ mix_seed(static_cast<std::uint64_t>(b) + 1));
        std::size_t k = 0;
        for (std::size_t i = 0; i < pos.size(); ++i, ++k) {
            s[k] = scores[pos[rng.index(pos.size())]];
            y[k] = 1;
        }
        for (std::size_t i = 0; i < neg.size(); ++i, ++k) {
            s[k] = scores[neg[rng.index(neg.size())]];
            y[k] = 0;
        }
        stats[static_cast<std::size_t>(b)] = auroc(s, y);
    }
    std::sort(stats.begin(), stats.end());
    auto quantile = [&](double q) {
        const double h = q * static_cast<double>(stats.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const auto hi = std::min(lo + 1, stats.size() - 1);
        return stats[lo] + (h - static_cast<double>(lo)) * (stats[hi] - stats[lo]);
    };
    const double alpha = 1.0 - level;
    return {quantile(alpha / 2.0), quantile(1.0 - alpha / 2.0)};
}

struct OperatingPoint {
    double threshold;
    double sensitivity;
    double specificity;
    double youden() const { return sensitivity + specificity - 1.0; }
};

/// Youden-optimal threshold over {0, 1} and the midpoints of adjacent distinct
/// scores; ties go to the smallest threshold.
inline OperatingPoint youden_threshold(std::span<const double> scores, std::span<const int> labels) {
    detail::check_scored(scores, labels);
    std::vector<double> pos, neg;
    for (std::size_t i = 0; i < scores.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(scores[i]);
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());
    std::vector<double> distinct(scores.begin(), scores.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<double> candidates{0.0, 1.0};
    for (std::size_t i = 1; i < distinct.size(); ++i) candidates.push_back(0.5 * (distinct[i - 1] + distinct[i]));
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    const double P = static_cast<double>(pos.size());
    const double N = static_cast<double>(neg.size());
    OperatingPoint best{0, 0, 0};
    double best_j = -std::numeric_limits<double>::infinity();
    for (double t : candidates) {
        // positives called positive: score >= t; negatives called negative: score < t
        const auto tp = static_cast<double>(pos.end() - std::lower_bound(pos.begin(), pos.end(), t));
        const auto tn = static_cast<double>(std::lower_bound(neg.begin(), neg.end(), t) - neg.begin());
        const double sens = tp / P;
        const double spec = tn / N;
        const double j = sens + spec - 1.0;
        if (j > best_j) {
            best_j = j;
            best = {t, sens, spec};
        }
    }
    return best;
}

struct EvalReport {
    double auroc = 0;
    double ci_low = 0;
    double ci_high = 0;
    double ci_level = 0.95;
    int n_boot = 0;
    OperatingPoint operating{0.5, 0, 0};
    std::vector<RocPoint> roc;
    std::size_t n = 0;
    std::size_t n_positive = 0;
    std::string split;  // which rows the report was computed on
};

/// AUROC, bootstrap interval and Youden operating point in one pass. The
/// interval is widened to contain the point estimate when the percentile
/// bounds fall on one side of it.
inline EvalReport evaluate_scores(std::span<const double> scores, std::span<const int> labels, int n_boot = 1000,
                                  double level = 0.95, std::uint64_t seed = 0) {
    EvalReport r;
    r.auroc = auroc(scores, labels);
    std::tie(r.ci_low, r.ci_high) = bootstrap_ci(scores, labels, n_boot, level, seed);
    r.ci_low = std::min(r.ci_low, r.auroc);
    r.ci_high = std::max(r.ci_high, r.auroc);
    r.ci_level = level;
    r.n_boot = n_boot;
    r.operating = youden_threshold(scores, labels);
    r.roc = roc_curve(scores, labels);
    r.n = scores.size();
    r.n_positive = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    return r;
}

inline nlohmann::json to_json(const EvalReport& r) {
    nlohmann::json roc = nlohmann::json::array();
    for (const auto& p : r.roc)
        roc.push_back({{"fpr", p.fpr}, {"tpr", p.tpr},
                       {"threshold", std::isfinite(p.threshold) ? nlohmann::json(p.threshold) : nlohmann::json()}});
    return {{"auroc", r.auroc},
            {"ci_low", r.ci_low},
            {"ci_high", r.ci_high},
            {"ci_level", r.ci_level},
            {"n_boot", r.n_boot},
            {"threshold", r.operating.threshold},
            {"sensitivity", r.operating.sensitivity},
            {"specificity", r.operating.specificity},
            {"youden_j", r.operating.youden()},
            {"n", r.n},
            {"n_positive", r.n_positive},
            {"split", r.split},
            {"roc_points", roc}};
}

inline EvalReport eval_report_from_json(const nlohmann::json& j) {
    EvalReport r;
    r.auroc = j.at("auroc").get<double>();
    r.ci_low = j.at("ci_low").get<double>();
    r.ci_high = j.at("ci_high").get<double>();
    r.ci_level = j.value("ci_level", 0.95);
    r.n_boot = j.value("n_boot", 0);
    r.operating = {j.at("threshold").get<double>(), j.at("sensitivity").get<double>(),
                   j.at("specificity").get<double>()};
    r.n = j.value("n", std::size_t{0});
    r.n_positive = j.value("n_positive", std::size_t{0});
    r.split = j.value("split", std::string{});
    if (j.contains("roc_points"))
        for (const auto& p : j.at("roc_points"))
            r.roc.push_back({p.at("fpr").get<double>(), p.at("tpr").get<double>(),
                             p.at("threshold").is_null() ? std::numeric_limits<double>::infinity()
                                                         : p.at("threshold").get<double>()});
    return r;
}

inline void write_roc_csv(std::ostream& out, const std::vector<RocPoint>& roc) {
    out << "fpr,tpr,threshold\n";
    for (const auto& p : roc)
        out << format_double(p.fpr) << ',' << format_double(p.tpr) << ','
            << (std::isfinite(p.threshold) ? format_double(p.threshold) : std::string("inf")) << '\n';
}

}  // namespace cfhybrid

#endif  // CFHYBRID_EVALUATION_HPP
