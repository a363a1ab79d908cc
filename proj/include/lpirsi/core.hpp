#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "lpirsi/errors.hpp"
#include "lpirsi/rational.hpp"

namespace lpirsi {

using Symbol = std::uint64_t;

enum class Variant { WPrivacy, WSPrivacy };

constexpr Symbol kDefaultModulus = 257;

inline bool is_prime(Symbol q) {
    if (q < 2) return false;
    for (Symbol d = 2; d * d <= q; ++d)
        if (q % d == 0) return false;
    return true;
}

inline Symbol field_add(Symbol a, Symbol b, Symbol q) { return (a + b) % q; }
inline Symbol field_sub(Symbol a, Symbol b, Symbol q) { return (a + q - b % q) % q; }

/// The full parameter tuple of one scheme instance. L, g and r are always
/// derived, never stored.
struct SchemeParams {
    int servers = 3;          // N
    int messages = 3;         // K
    int side_info = 1;        // M
    Rational t = 1;           // e^{-eps}, exact rational in (0, 1]
    Symbol modulus = kDefaultModulus;
    Variant variant = Variant::WPrivacy;

    int subpackets() const { return servers - 1; }                      // L
    Rational g() const { return Rational(messages, side_info + 1); }
    int g_ceil() const { return int(rational_ceil(g())); }
    Rational r() const { return Rational(servers - 1) * t; }
    double epsilon() const;

    void validate() const;  // throws DomainError
};

/// One message of L field symbols. Sub-packet indices are 1-based; index 0
/// is the implicit dummy symbol with value 0.
struct Message {
    std::vector<Symbol> subpackets;

    Symbol at(int index) const {
        if (index == 0) return 0;
        return subpackets.at(static_cast<std::size_t>(index - 1));
    }
    int length() const { return static_cast<int>(subpackets.size()); }
    bool operator==(const Message&) const = default;
};

struct Database {
    std::vector<Message> messages;  // messages[i-1] is X_i

    const Message& message(int i) const { return messages.at(static_cast<std::size_t>(i - 1)); }
    int count() const { return static_cast<int>(messages.size()); }
    void validate(const SchemeParams& params) const;
};

Database random_database(const SchemeParams& params, std::mt19937_64& rng);

/// Demand index W plus the sorted side information set S.
struct RetrievalRequest {
    int demand = 1;              // W, in [1, K]
    std::vector<int> side_info;  // S, sorted, disjoint from W

    std::vector<int> unknown(int messages) const;  // U = [K] \ (S u {W})
    void validate(const SchemeParams& params) const;
    bool operator==(const RetrievalRequest&) const = default;
    auto operator<=>(const RetrievalRequest&) const = default;
};

/// One realization of the scheme randomness F = (pi, F_U, F_S0, F_S1).
struct RandomPattern {
    std::vector<int> pi;        // pi[n-1] in [0, N-1], a permutation over servers 1..N
    std::map<int, int> f_u;     // keyed by u in U
    std::map<int, int> f_s0;    // keyed by s in S, used by the inference server
    std::map<int, int> f_s1;    // keyed by s in S, used by every other server

    int inference_server() const;  // n* = pi^{-1}(0), 1-based
    bool operator==(const RandomPattern&) const = default;
    auto operator<=>(const RandomPattern&) const = default;
};

/// Per-server query: entry i is the requested sub-packet index of message i.
struct Query {
    std::vector<int> indices;  // length K, entries in [0, N-1]

    bool operator==(const Query&) const = default;
    auto operator<=>(const Query&) const = default;
};

int hamming_weight(const Query& query);

/// Empty answer (nullopt) is distinct from the symbol 0: download cost counts
/// transmitted symbols and an empty answer transmits none.
using Answer = std::optional<Symbol>;

std::vector<Query> build_queries(const RandomPattern& pattern, const RetrievalRequest& req,
                                 const SchemeParams& params);

Answer compute_answer(const Query& query, const Database& db, Symbol modulus);

Message decode(const std::vector<Answer>& answers, const std::vector<Query>& queries,
               const RandomPattern& pattern, const std::map<int, Message>& side_info,
               const RetrievalRequest& req, const SchemeParams& params);

int downloaded_symbols(const std::vector<Answer>& answers);

}  // namespace lpirsi
