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

#ifndef CFHYBRID_PREDICTOR_HPP
#define CFHYBRID_PREDICTOR_HPP

#include <atomic>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "cfhybrid/tabular.hpp"

namespace cfhybrid {

/// Black-box classifier contract: probabilities over C classes for a batch of
/// instances. Implementations must be safe for concurrent const calls.
class Predictor {
public:
    virtual ~Predictor() = default;

    virtual std::size_t num_classes() const = 0;

    /// Writes xs.size() * num_classes() probabilities, row-major, into `out`.
    virtual void predict_batch(std::span<const Instance> xs, std::vector<double>& out) const = 0;

    std::vector<double> predict_proba(const Instance& x) const {
        std::vector<double> out;
        predict_batch(std::span<const Instance>(&x, 1), out);
        return out;
    }

    double probability(const Instance& x, std::size_t cls) const { return predict_proba(x).at(cls); }

    /// Probability of class `cls` for every instance of the batch.
    std::vector<double> class_probabilities(std::span<const Instance> xs, std::size_t cls) const {
        std::vector<double> all;
        predict_batch(xs, all);
        const auto c = num_classes();
        std::vector<double> out(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) out[i] = all[i * c + cls];
        return out;
    }
};

/// Binary predictor defined by a function returning P(class 1 | x).
class FunctionPredictor final : public Predictor {
public:
    explicit FunctionPredictor(std::function<double(const Instance&)> positive) : positive_(std::move(positive)) {}

    std::size_t num_classes() const override { return 2; }

    void predict_batch(std::span<const Instance> xs, std::vector<double>& out) const override {
        out.resize(xs.size() * 2);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double p = positive_(xs[i]);
            out[2 * i] = 1.0 - p;
            out[2 * i + 1] = p;
        }
    }

private:
    std::function<double(const Instance&)> positive_;
};

/// Wraps a predictor and counts the instances it scores.
class CountingPredictor final : public Predictor {
public:
    explicit CountingPredictor(const Predictor& inner) : inner_(inner) {}

    std::size_t num_classes() const override { return inner_.num_classes(); }

    void predict_batch(std::span<const Instance> xs, std::vector<double>& out) const override {
        calls_ += xs.size();
        inner_.predict_batch(xs, out);
    }

    std::uint64_t calls() const { return calls_.load(); }

private:
    const Predictor& inner_;
    mutable std::atomic<std::uint64_t> calls_{0};
};

}  // namespace cfhybrid

#endif  // CFHYBRID_PREDICTOR_HPP
