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
#include "oracles.hpp"

using namespace cfhybrid;
using namespace fixtures;

namespace {

Dataset column_dataset(std::vector<std::vector<double>> columns) {
    std::vector<FeatureSpec> specs;
    for (std::size_t j = 0; j < columns.size(); ++j) specs.push_back(infer_feature("c" + std::to_string(j), columns[j]));
    std::vector<Instance> rows(columns[0].size(), Instance(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j)
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i][j] = columns[j][i];
    return Dataset(FeatureSchema(specs), rows);
}

}  // namespace

TEST(Schema, RejectsMalformedFeatures) {
    EXPECT_THROW(FeatureSchema({numeric("a", 0, 1), numeric("a", 0, 1)}), Error);
    EXPECT_THROW(FeatureSchema({numeric("", 0, 1)}), Error);
    EXPECT_THROW(FeatureSchema({numeric("a", 2, 1)}), Error);
    EXPECT_THROW(FeatureSchema({categorical("c", {0, 1, 2, 3}), binary("b", 0, 0)}), Error);
    EXPECT_THROW(FeatureSchema({categorical("c", {0, 1})}), Error);
    EXPECT_NO_THROW(FeatureSchema({categorical("c", {0, 1, 2}), binary("b"), numeric("n", 0, 0)}));
}

TEST(Schema, IndexAndFingerprint) {
    FeatureSchema s({numeric("age", 0, 100), binary("htn")});
    EXPECT_EQ(s.require_index("htn"), 1u);
    EXPECT_FALSE(s.index_of("nope").has_value());
    EXPECT_THROW(s.require_index("nope"), Error);
    FeatureSchema same({numeric("age", 10, 90), binary("htn")});
    FeatureSchema other({numeric("age", 0, 100), numeric("htn", 0, 1)});
    EXPECT_EQ(s.fingerprint(), same.fingerprint());
    EXPECT_NE(s.fingerprint(), other.fingerprint());
}

TEST(Dataset, ChecksCellsAndLabels) {
    FeatureSchema s({binary("b"), categorical("c", {0, 1, 2})});
    EXPECT_NO_THROW(Dataset(s, {{0, 2}, {1, 0}}, {0, 1}));
    EXPECT_THROW(Dataset(s, {{0.5, 2}}), Error);
    EXPECT_THROW(Dataset(s, {{0, 3}}), Error);
    EXPECT_THROW(Dataset(s, {{0, 1}}, {0, 1}), Error);
    EXPECT_THROW(Dataset(s, {{0, 1}}, {2}), Error);
    Dataset d(s, {{0, 2}, {1, 0}, {1, 1}}, {0, 1, 1});
    const std::vector<std::size_t> idx{2, 0};
    auto sub = d.subset(idx);
    ASSERT_EQ(sub.size(), 2u);
    EXPECT_EQ(sub.row(0), (Instance{1, 1}));
    EXPECT_EQ(sub.labels(), (std::vector<int>{1, 0}));
}

TEST(InferFeature, KindsFromDistinctValues) {
    const std::vector<double> two{0, 1, 1, 0};
    const std::vector<double> three{0, 1, 2};
    const std::vector<double> one{1, 1};
    EXPECT_EQ(infer_feature("a", two).kind, FeatureKind::binary);
    EXPECT_EQ(infer_feature("a", three).kind, FeatureKind::numeric);
    EXPECT_EQ(infer_feature("a", three, {"x", "y", "z"}).kind, FeatureKind::categorical);
    const auto c = infer_feature("a", one);
    EXPECT_EQ(c.kind, FeatureKind::numeric);
    EXPECT_EQ(c.range(), 0.0);
}

TEST(BinaryFeatures, TwoDistinctActionableValuesOnly) {
    auto d = column_dataset({{0, 1, 0, 1}, {0, 1, 2, 1}, {1, 1, 1, 1}, {5, 7, 5, 5}});
    EXPECT_EQ(identify_binary_features(d), (std::vector<std::size_t>{0, 3}));
    EXPECT_EQ(identify_binary_features(d, {false, true, true, true}), (std::vector<std::size_t>{3}));
    EXPECT_THROW(identify_binary_features(d, {true}), Error);
    EXPECT_THROW(identify_binary_features(Dataset(d.schema(), {})), Error);
}

TEST(BinaryFeatures, ResultIsSortedSubsetOfActionable) {
    Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        auto d = random_dataset(rng, 20, 8);
        std::vector<bool> mask(8);
        for (auto&& m : mask) m = rng.bernoulli(0.7);
        const auto b = identify_binary_features(d, mask);
        EXPECT_TRUE(std::is_sorted(b.begin(), b.end()));
        for (std::size_t j = 0; j < 8; ++j) {
            std::set<double> distinct;
            for (const auto& r : d.rows()) distinct.insert(r[j]);
            const bool expected = mask[j] && distinct.size() == 2;
            EXPECT_EQ(std::find(b.begin(), b.end(), j) != b.end(), expected);
        }
    }
}

TEST(Gower, HandComputedExamples) {
    FeatureSchema s({binary("a"), binary("b"), binary("c"), binary("d")});
    EXPECT_EQ(gower_distance({0, 1, 0, 1}, {0, 1, 0, 1}, s), 0.0);
    EXPECT_EQ(gower_distance({0, 1, 0, 1}, {1, 1, 0, 1}, s), 0.25);
    FeatureSchema m({numeric("n", 0, 10), binary("b"), categorical("c", {0, 1, 2}), numeric("k", 0, 1)});
    EXPECT_DOUBLE_EQ(gower_distance({2, 0, 1, 0.5}, {7, 0, 1, 0.5}, m), 0.125);
    EXPECT_DOUBLE_EQ(oracle::gower({2, 0, 1, 0.5}, {7, 0, 1, 0.5}, m), 0.125);
}

TEST(Gower, ZeroRangeAndClamping) {
    FeatureSchema s({numeric("flat", 3, 3), numeric("n", 0, 10)});
    EXPECT_EQ(gower_distance({3, 0}, {3, 0}, s), 0.0);
    EXPECT_EQ(gower_distance({3, -50}, {3, 50}, s), 0.5);
    EXPECT_THROW(gower_distance({3}, {3, 0}, s), Error);
}

TEST(Gower, MatchesScalarOracleOnRandomPairs) {
    Rng rng(2);
    for (int t = 0; t < 500; ++t) {
        auto s = random_schema(rng, 1 + rng.index(10));
        auto a = random_instance(s, rng, false);
        auto b = random_instance(s, rng, false);
        EXPECT_NEAR(gower_distance(a, b, s), oracle::gower(a, b, s), 1e-15);
    }
}
