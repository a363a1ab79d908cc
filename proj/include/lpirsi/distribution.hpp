#pragma once

#include <random>
#include <vector>

#include "lpirsi/errors.hpp"
#include "lpirsi/rational.hpp"

namespace lpirsi {

/// An exact finite distribution: outcomes paired with rational probabilities
/// that sum to exactly 1. Sampling inverts the cumulative distribution
/// against one 64-bit uniform draw, so results are deterministic per seed.
template <typename T>
struct Distribution {
    std::vector<T> support;
    std::vector<Rational> probs;

    void push(T outcome, Rational p) {
        support.push_back(std::move(outcome));
        probs.push_back(std::move(p));
    }

    Rational total() const {
        Rational sum = 0;
        for (const auto& p : probs) sum += p;
        return sum;
    }

    void check() const {
        for (const auto& p : probs)
            if (p < 0) throw DomainError("negative probability");
        if (total() != 1) throw DomainError("probabilities must sum to exactly 1");
    }

    Rational prob_of(const T& outcome) const {
        for (std::size_t i = 0; i < support.size(); ++i)
            if (support[i] == outcome) return probs[i];
        return 0;
    }

    const T& sample(std::mt19937_64& rng) const {
        const std::uint64_t u = rng();
        // first i with cum_i > u / 2^64, compared exactly
        const BigInt scale = BigInt(1) << 64;
        Rational cum = 0;
        for (std::size_t i = 0; i + 1 < support.size(); ++i) {
            cum += probs[i];
            if (Rational(cum * scale) > Rational(BigInt(u))) return support[i];
        }
        return support.back();
    }
};

}  // namespace lpirsi
