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

#include <gtest/gtest.h>

#include <sstream>

#include "cfhybrid.hpp"
#include "oracles.hpp"

using namespace cfhybrid;

namespace {

struct Scored {
    std::vector<double> scores;
    std::vector<int> labels;
};

Scored random_scored(Rng& rng, std::size_t n, double shift, int levels = 0) {
    Scored s;
    while (s.labels.size() < n) {
        const int y = rng.bernoulli(0.4);
        double v = std::clamp(rng.normal(0.5 + (y ? shift : -shift), 0.2), 0.0, 1.0);
        if (levels > 0) v = std::round(v * levels) / levels;
        s.scores.push_back(v);
        s.labels.push_back(y);
    }
    s.labels[0] = 1;
    s.labels[1] = 0;
    return s;
}

}  // namespace

TEST(Auroc, WorkedExamples) {
    EXPECT_EQ(auroc(std::vector<double>{0.2, 0.8, 0.4, 0.6}, std::vector<int>{0, 1, 0, 1}), 1.0);
    EXPECT_EQ(auroc(std::vector<double>{0.5, 0.5, 0.5}, std::vector<int>{0, 1, 1}), 0.5);
    EXPECT_EQ(auroc(std::vector<double>{0.9, 0.1}, std::vector<int>{0, 1}), 0.0);
}

TEST(Auroc, RejectsBadInput) {
    EXPECT_THROW(auroc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), Error);
    EXPECT_THROW(auroc(std::vector<double>{0.1}, std::vector<int>{1, 0}), Error);
    EXPECT_THROW(auroc(std::vector<double>{0.1, 0.2}, std::vector<int>{2, 0}), Error);
}

TEST(Auroc, MatchesPairCountAndIsAntisymmetric) {
    Rng rng(1);
    for (int t = 0; t < 100; ++t) {
        auto s = random_scored(rng, 10 + rng.index(80), 0.1, t % 2 ? 10 : 0);
        const double a = auroc(s.scores, s.labels);
        EXPECT_NEAR(a, oracle::auroc_pairs(s.scores, s.labels), 1e-12);
        std::vector<double> neg(s.scores);
        for (auto& v : neg) v = -v;
        EXPECT_NEAR(auroc(neg, s.labels), 1.0 - a, 1e-12);
    }
}

TEST(RocCurve, StartsAtOriginEndsAtOne) {
    Rng rng(2);
    auto s = random_scored(rng, 200, 0.1, 20);
    const auto roc = roc_curve(s.scores, s.labels);
    ASSERT_GE(roc.size(), 2u);
    EXPECT_EQ(roc.front().fpr, 0.0);
    EXPECT_EQ(roc.front().tpr, 0.0);
    EXPECT_TRUE(std::isinf(roc.front().threshold));
    EXPECT_EQ(roc.back().fpr, 1.0);
    EXPECT_EQ(roc.back().tpr, 1.0);
    double area = 0;
    for (std::size_t i = 1; i < roc.size(); ++i) {
        EXPECT_GE(roc[i].fpr, roc[i - 1].fpr);
        EXPECT_GE(roc[i].tpr, roc[i - 1].tpr);
        EXPECT_LT(roc[i].threshold, roc[i - 1].threshold);
        area += (roc[i].fpr - roc[i - 1].fpr) * (roc[i].tpr + roc[i - 1].tpr) / 2;
    }
    EXPECT_NEAR(area, auroc(s.scores, s.labels), 1e-12);
}

TEST(RocCurve, CsvFormat) {
    std::ostringstream out;
    write_roc_csv(out, roc_curve(std::vector<double>{0.2, 0.8}, std::vector<int>{0, 1}));
    EXPECT_EQ(out.str(), "fpr,tpr,threshold\n0,0,inf\n0,1,0.8\n1,1,0.2\n");
}

TEST(Bootstrap, PerfectSeparationGivesDegenerateInterval) {
    std::vector<double> s{0.1, 0.2, 0.3, 0.7, 0.8, 0.9};
    std::vector<int> y{0, 0, 0, 1, 1, 1};
    const auto [lo, hi] = bootstrap_ci(s, y, 200, 0.95, 3);
    EXPECT_EQ(lo, 1.0);
    EXPECT_EQ(hi, 1.0);
}

TEST(Bootstrap, DeterministicAndBracketsEstimate) {
    Rng rng(4);
    auto s = random_scored(rng, 300, 0.1);
    const auto a = bootstrap_ci(s.scores, s.labels, 500, 0.95, 7);
    const auto b = bootstrap_ci(s.scores, s.labels, 500, 0.95, 7);
    EXPECT_EQ(a, b);
    EXPECT_LT(a.first, a.second);
    const auto r = evaluate_scores(s.scores, s.labels, 500, 0.95, 7);
    EXPECT_LE(r.ci_low, r.auroc);
    EXPECT_GE(r.ci_high, r.auroc);
    const auto narrow = bootstrap_ci(s.scores, s.labels, 500, 0.5, 7);
    EXPECT_GE(narrow.first, a.first);
    EXPECT_LE(narrow.second, a.second);
    EXPECT_THROW(bootstrap_ci(s.scores, s.labels, 10), Error);
    EXPECT_THROW(bootstrap_ci(s.scores, s.labels, 500, 1.0), Error);
}

TEST(Bootstrap, MoreDataNarrowsInterval) {
    double width_n = 0, width_2n = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(100 + seed);
        auto s = random_scored(rng, 120, 0.1);
        auto d = s;
        d.scores.insert(d.scores.end(), s.scores.begin(), s.scores.end());
        d.labels.insert(d.labels.end(), s.labels.begin(), s.labels.end());
        const auto a = bootstrap_ci(s.scores, s.labels, 300, 0.95, seed);
        const auto b = bootstrap_ci(d.scores, d.labels, 300, 0.95, seed);
        width_n += a.second - a.first;
        width_2n += b.second - b.first;
    }
    EXPECT_LT(width_2n, width_n);
}

TEST(Youden, MidpointOfSeparatedScores) {
    std::vector<double> s{0.1, 0.4, 0.6, 0.9};
    std::vector<int> y{0, 0, 1, 1};
    const auto op = youden_threshold(s, y);
    EXPECT_EQ(op.threshold, 0.5);
    EXPECT_EQ(op.youden(), 1.0);
}

TEST(Youden, ConstantScoresGiveZero) {
    std::vector<double> s{0.3, 0.3, 0.3, 0.3};
    std::vector<int> y{0, 1, 0, 1};
    const auto op = youden_threshold(s, y);
    EXPECT_EQ(op.youden(), 0.0);
    EXPECT_EQ(op.threshold, 0.0);
}

TEST(Youden, MatchesBruteForce) {
    Rng rng(5);
    for (int t = 0; t < 100; ++t) {
        auto s = random_scored(rng, 5 + rng.index(100), 0.08, t % 3 ? 0 : 8);
        EXPECT_EQ(youden_threshold(s.scores, s.labels).youden(), oracle::youden_max(s.scores, s.labels));
    }
}

TEST(EvalReport, JsonRoundTrip) {
    Rng rng(6);
    auto s = random_scored(rng, 100, 0.1, 10);
    auto r = evaluate_scores(s.scores, s.labels, 200, 0.9, 1);
    r.split = "test";
    const auto j = to_json(r);
    EXPECT_TRUE(j["roc_points"][0]["threshold"].is_null());
    const auto back = eval_report_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(to_json(back), j);
    EXPECT_EQ(back.n, 100u);
    EXPECT_EQ(back.split, "test");
}
