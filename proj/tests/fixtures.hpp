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

#ifndef CFHYBRID_TESTS_FIXTURES_HPP
#define CFHYBRID_TESTS_FIXTURES_HPP

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "cfhybrid.hpp"

namespace fixtures {

using namespace cfhybrid;

inline FeatureSpec numeric(std::string name, double lo, double hi, bool actionable = true) {
    FeatureSpec f;
    f.name = std::move(name);
    f.kind = FeatureKind::numeric;
    f.min = lo;
    f.max = hi;
    f.actionable = actionable;
    return f;
}

inline FeatureSpec binary(std::string name, double a = 0, double b = 1, bool actionable = true) {
    FeatureSpec f;
    f.name = std::move(name);
    f.kind = FeatureKind::binary;
    f.values = {a, b};
    f.actionable = actionable;
    return f;
}

inline FeatureSpec categorical(std::string name, std::vector<double> values, bool actionable = true) {
    FeatureSpec f;
    f.name = std::move(name);
    f.kind = FeatureKind::categorical;
    f.values = std::move(values);
    f.actionable = actionable;
    return f;
}

inline FeatureSchema all_binary_schema(std::size_t m) {
    std::vector<FeatureSpec> fs;
    for (std::size_t j = 0; j < m; ++j) fs.push_back(binary("b" + std::to_string(j)));
    return FeatureSchema(fs);
}

/// Mixed schema with small integer domains so that distance ties occur.
inline FeatureSchema random_schema(Rng& rng, std::size_t p) {
    std::vector<FeatureSpec> fs;
    for (std::size_t j = 0; j < p; ++j) {
        const auto name = "f" + std::to_string(j);
        switch (rng.index(3)) {
            case 0: {
                const double lo = static_cast<double>(rng.index(5));
                fs.push_back(numeric(name, lo, lo + 1 + static_cast<double>(rng.index(6))));
                break;
            }
            case 1: {
                const double a = static_cast<double>(rng.index(3));
                fs.push_back(binary(name, a, a + 1 + static_cast<double>(rng.index(2))));
                break;
            }
            default: {
                std::vector<double> vals;
                const auto c = 3 + rng.index(3);
                for (std::size_t v = 0; v < c; ++v) vals.push_back(static_cast<double>(v));
                fs.push_back(categorical(name, vals));
            }
        }
    }
    return FeatureSchema(fs);
}

inline Instance random_instance(const FeatureSchema& schema, Rng& rng, bool integer_numeric = true) {
    Instance x(schema.size());
    for (std::size_t j = 0; j < schema.size(); ++j) {
        const auto& f = schema[j];
        if (f.kind == FeatureKind::numeric) {
            x[j] = integer_numeric ? f.min + static_cast<double>(rng.index(static_cast<std::uint64_t>(f.range()) + 1))
                                   : f.min + rng.uniform() * f.range();
        } else {
            x[j] = f.values[rng.index(f.values.size())];
        }
    }
    return x;
}

inline Dataset random_dataset(Rng& rng, std::size_t n, std::size_t p) {
    auto schema = random_schema(rng, p);
    std::vector<Instance> rows;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) {
        rows.push_back(random_instance(schema, rng));
        labels.push_back(static_cast<int>(rng.index(2)));
    }
    return Dataset(std::move(schema), std::move(rows), std::move(labels));
}

/// Pseudo-random lookup table: every distinct instance gets its own fixed
/// probability derived from a hash of its cells and a salt.
inline FunctionPredictor lookup_table_predictor(std::uint64_t salt) {
    return FunctionPredictor([salt](const Instance& x) {
        std::uint64_t h = mix_seed(salt);
        for (double v : x) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, sizeof bits);
            h = mix_seed(h ^ bits);
        }
        return static_cast<double>(h >> 11) * 0x1.0p-53;
    });
}

inline FunctionPredictor logistic_predictor(std::vector<double> w, double bias) {
    return FunctionPredictor([w = std::move(w), bias](const Instance& x) {
        double z = bias;
        for (std::size_t j = 0; j < w.size(); ++j) z += w[j] * x[j];
        return 1.0 / (1.0 + std::exp(-z));
    });
}

}  // namespace fixtures

#endif  // CFHYBRID_TESTS_FIXTURES_HPP
