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

#include "cfhybrid.hpp"
#include "fixtures.hpp"

using namespace cfhybrid;
using namespace fixtures;

namespace {

bool has(const std::vector<Violation>& v, ViolationKind k) {
    return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.kind == k; });
}

}  // namespace

TEST(Score, WorkedExamples) {
    EXPECT_EQ(composite_score(0, 0.3, 0.3, 1, 1), 0.0);
    EXPECT_NEAR(composite_score(2, 0.15, 0.72, 1, 1), 1.43, 1e-12);
    EXPECT_EQ(composite_score(3, 0.1, 0.9, 2, 0), 6.0);
    auto f = logistic_predictor({1.0, 1.0}, -1.0);
    CfQuery q;
    q.x0 = {1, 1};
    EXPECT_EQ(score(q.x0, q, f), 0.0);
}

TEST(Score, RankingOrderBreaksTies) {
    Counterfactual a, b;
    a.score = b.score = 1.0;
    a.changed = {0, 1};
    b.changed = {2};
    EXPECT_TRUE(ranks_before(b, a));
    a.changed = {3};
    a.distance = 0.1;
    b.distance = 0.2;
    EXPECT_TRUE(ranks_before(a, b));
    b.distance = 0.1;
    EXPECT_TRUE(ranks_before(b, a));
    EXPECT_FALSE(ranks_before(a, a));
}

TEST(Query, NormalizeRejectsBadBandsAndWeights) {
    FeatureSchema s({binary("a"), binary("b")});
    auto check = [&](auto mutate) {
        CfQuery q;
        q.x0 = {0, 1};
        mutate(q);
        try {
            normalize_query(q, s);
            return false;
        } catch (const Error& e) {
            return e.kind() == ErrorKind::constraint;
        }
    };
    EXPECT_TRUE(check([](CfQuery& q) { q.p_min = 0.6, q.p_max = 0.2; }));
    EXPECT_TRUE(check([](CfQuery& q) { q.p_min = 0.4, q.p_max = 0.4; }));
    EXPECT_TRUE(check([](CfQuery& q) { q.p_max = 1.5; }));
    EXPECT_TRUE(check([](CfQuery& q) { q.alpha = 0; }));
    EXPECT_TRUE(check([](CfQuery& q) { q.beta = -1; }));
    EXPECT_TRUE(check([](CfQuery& q) { q.k = 0; }));
    EXPECT_TRUE(check([](CfQuery& q) { q.target_class = 2; }));
    EXPECT_TRUE(check([](CfQuery& q) { q.fixed = {5}; }));
    CfQuery ok;
    ok.x0 = {0, 1};
    ok.fixed = {1, 0, 1};
    normalize_query(ok, s);
    EXPECT_EQ(ok.fixed, (std::vector<std::size_t>{0, 1}));
    ok.x0 = {0, 2};
    EXPECT_THROW(normalize_query(ok, s), Error);
}

TEST(Query, NonActionableFeaturesBecomeFixed) {
    FeatureSchema s({numeric("age", 0, 100, false), binary("a"), binary("sex", 0, 1, false)});
    CfQuery q;
    q.x0 = {50, 0, 1};
    q.fixed = {1};
    fix_non_actionable(q, s);
    EXPECT_EQ(q.fixed, (std::vector<std::size_t>{0, 1, 2}));
    q.fixed = {};
    EXPECT_EQ(actionable_mask(q, s), (std::vector<bool>{false, true, false}));
}

TEST(Validate, EpsilonToleranceOnFixedNumericFeature) {
    FeatureSchema s({numeric("age", 0, 100), binary("a")});
    auto f = FunctionPredictor([](const Instance&) { return 0.2; });
    CfQuery q;
    q.x0 = {50, 1};
    q.p_max = 0.4;
    q.fixed = {0};
    EXPECT_TRUE(validate({50 + 1e-9, 0}, q, f, s).empty());
    const auto v = validate({50 + 1e-6, 0}, q, f, s);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].kind, ViolationKind::fixed_feature_modified);
    EXPECT_EQ(v[0].feature, 0u);
    EXPECT_NE(v[0].message.find("fixed feature modified"), std::string::npos);
}

TEST(Validate, ClosedProbabilityBand) {
    FeatureSchema s({binary("a")});
    double p = 0.25;
    auto f = FunctionPredictor([&](const Instance&) { return p; });
    CfQuery q;
    q.x0 = {0};
    q.p_min = 0.25;
    q.p_max = 0.5;
    EXPECT_TRUE(validate({1}, q, f, s).empty());
    p = 0.5;
    EXPECT_TRUE(validate({1}, q, f, s).empty());
    p = 0.5000001;
    EXPECT_TRUE(has(validate({1}, q, f, s), ViolationKind::probability_out_of_band));
    p = 0.2;
    EXPECT_TRUE(has(validate({1}, q, f, s), ViolationKind::probability_out_of_band));
}

TEST(Validate, NonActionableChangesAreReported) {
    FeatureSchema s({binary("sex", 0, 1, false), binary("a"), categorical("c", {0, 1, 2})});
    auto f = FunctionPredictor([](const Instance&) { return 0.1; });
    CfQuery q;
    q.x0 = {0, 0, 2};
    q.p_max = 0.4;
    EXPECT_TRUE(has(validate({1, 0, 2}, q, f, s), ViolationKind::non_actionable_modified));
    q.fixed = {2};
    const auto v = validate({1, 1, 1}, q, f, s);
    EXPECT_TRUE(has(v, ViolationKind::non_actionable_modified));
    EXPECT_TRUE(has(v, ViolationKind::fixed_feature_modified));
    EXPECT_EQ(v.size(), 2u);
}

TEST(Counterfactual, JsonListsChanges) {
    FeatureSchema s({binary("a"), numeric("n", 0, 10)});
    CfQuery q;
    q.x0 = {0, 5};
    auto cf = make_counterfactual({1, 5}, q, 0.1, 0.7, Stage::enumeration, s);
    EXPECT_EQ(cf.changed, (std::vector<std::size_t>{0}));
    EXPECT_NEAR(cf.score, 1 - 0.6, 1e-12);
    EXPECT_EQ(cf.distance, 0.5);
    const auto j = to_json(cf, q.x0, 0.7, s);
    EXPECT_EQ(j["stage"], "enumeration");
    ASSERT_EQ(j["changes"].size(), 1u);
    EXPECT_EQ(j["changes"][0]["feature"], "a");
    EXPECT_EQ(j["changes"][0]["from"], 0.0);
    EXPECT_EQ(j["changes"][0]["to"], 1.0);
}
