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

#ifndef CFHYBRID_RANDOM_HPP
#define CFHYBRID_RANDOM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "cfhybrid/common.hpp"

namespace cfhybrid {

/// mt19937_64 plus distribution helpers whose output does not depend on the
/// standard library implementation, so seeded runs reproduce across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    std::uint64_t index(std::uint64_t n) {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(engine_()) * n) >> 64);
    }

    bool bernoulli(double p) { return uniform() < p; }

    double normal(double mean = 0.0, double sd = 1.0) {
        if (spare_) {
            const double z = *spare_;
            spare_.reset();
            return mean + sd * z;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
        return mean + sd * r * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Poisson draw by inversion; intended for small means.
    int poisson(double mean) {
        const double limit = std::exp(-mean);
        double prod = uniform();
        int k = 0;
        while (prod > limit) {
            prod *= uniform();
            ++k;
        }
        return k;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

/// Stratified fold id per row: each class is shuffled and dealt round-robin.
inline std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, std::uint64_t seed) {
    if (folds < 2) fail(ErrorKind::invalid_argument, "folds must be >= 2");
    if (labels.size() < static_cast<std::size_t>(folds)) fail(ErrorKind::invalid_argument, "fewer rows than folds");
    int num_classes = 0;
    for (int y : labels) num_classes = std::max(num_classes, y + 1);
    std::vector<int> fold(labels.size(), -1);
    Rng rng(seed);
    int offset = 0;
    for (int c = 0; c < num_classes; ++c) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == c) idx.push_back(i);
        rng.shuffle(idx);
        for (std::size_t k = 0; k < idx.size(); ++k)
            fold[idx[k]] = static_cast<int>((k + static_cast<std::size_t>(offset)) % static_cast<std::size_t>(folds));
        offset = static_cast<int>((idx.size() + static_cast<std::size_t>(offset)) % static_cast<std::size_t>(folds));
    }
    return fold;
}

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Stratified train/test split; each class contributes round(test_fraction * n_c) test rows.
inline Split stratified_split(const std::vector<int>& labels, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) fail(ErrorKind::invalid_argument, "test fraction must be in (0,1)");
    int num_classes = 0;
    for (int y : labels) num_classes = std::max(num_classes, y + 1);
    Rng rng(seed);
    std::vector<bool> is_test(labels.size(), false);
    for (int c = 0; c < num_classes; ++c) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == c) idx.push_back(i);
        rng.shuffle(idx);
        const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(idx.size())));
        for (std::size_t k = 0; k < n_test; ++k) is_test[idx[k]] = true;
    }
    Split s;
    for (std::size_t i = 0; i < labels.size(); ++i) (is_test[i] ? s.test : s.train).push_back(i);
    return s;
}

}  // namespace cfhybrid

#endif  // CFHYBRID_RANDOM_HPP
