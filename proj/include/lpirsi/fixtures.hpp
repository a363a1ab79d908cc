#pragma once

#include <vector>

#include "lpirsi/core.hpp"

namespace lpirsi::fixtures {

/// One support row: the pattern columns (f_U, f_S0, f_S1) with entries in
/// sorted U / S order. Queries and probabilities are derived, not stored,
/// so the rest of each table row is recomputed rather than transcribed.
struct PatternRow {
    std::vector<int> f_u, f_s0, f_s1;

    bool operator==(const PatternRow&) const = default;
    auto operator<=>(const PatternRow&) const = default;
};

/// (N,K,M) = (3,3,1), W-privacy, demand 1, side info {2}. 10 rows.
inline std::vector<PatternRow> w_331() {
    return {
        {{0}, {0}, {1}}, {{0}, {0}, {2}},
        {{1}, {1}, {1}}, {{1}, {1}, {2}}, {{1}, {2}, {1}}, {{1}, {2}, {2}},
        {{2}, {1}, {1}}, {{2}, {1}, {2}}, {{2}, {2}, {1}}, {{2}, {2}, {2}},
    };
}

/// (N,K,M) = (3,3,1), (W,S)-privacy, demand 1, side info {2}. 14 rows.
inline std::vector<PatternRow> ws_331() {
    return {
        {{0}, {0}, {1}}, {{0}, {0}, {2}},
        {{1}, {1}, {0}}, {{1}, {1}, {1}}, {{1}, {1}, {2}},
        {{1}, {2}, {0}}, {{1}, {2}, {1}}, {{1}, {2}, {2}},
        {{2}, {1}, {0}}, {{2}, {1}, {1}}, {{2}, {1}, {2}},
        {{2}, {2}, {0}}, {{2}, {2}, {1}}, {{2}, {2}, {2}},
    };
}

/// (N,K,M) = (3,4,1), W-privacy, demand 1, side info {2}. 10 rows; f_S0 is
/// always zero since K is divisible by M+1.
inline std::vector<PatternRow> w_341() {
    return {
        {{0, 0}, {0}, {1}}, {{0, 0}, {0}, {2}},
        {{1, 1}, {0}, {1}}, {{1, 1}, {0}, {2}},
        {{1, 2}, {0}, {1}}, {{1, 2}, {0}, {2}},
        {{2, 1}, {0}, {1}}, {{2, 1}, {0}, {2}},
        {{2, 2}, {0}, {1}}, {{2, 2}, {0}, {2}},
    };
}

/// (N,K,M) = (3,4,1), (W,S)-privacy. Generated from the admissible weight
/// combinations: ell = 0 forces (s0, s1) = (0, 1); ell = 1 allows (1, 0) and
/// (1, 1); ell = 2 allows every combination. 62 rows.
inline std::vector<PatternRow> ws_341() {
    std::vector<PatternRow> rows;
    auto weight = [](const std::vector<int>& v) {
        int w = 0;
        for (int x : v)
            if (x != 0) ++w;
        return w;
    };
    for (int u1 = 0; u1 <= 2; ++u1)
        for (int u2 = 0; u2 <= 2; ++u2)
            for (int s0 = 0; s0 <= 2; ++s0)
                for (int s1 = 0; s1 <= 2; ++s1) {
                    int ell = weight({u1, u2});
                    int w0 = s0 == 0 ? 0 : 1;
                    int w1 = s1 == 0 ? 0 : 1;
                    bool ok = (ell == 0 && w0 == 0 && w1 == 1) ||
                              (ell == 1 && w0 == 1) ||
                              (ell == 2);
                    if (ok) rows.push_back({{u1, u2}, {s0}, {s1}});
                }
    return rows;
}

/// Fixture lookup for `table --check`; empty when no fixture exists.
inline std::vector<PatternRow> lookup(int servers, int messages, int side_info, Variant variant) {
    if (servers == 3 && messages == 3 && side_info == 1)
        return variant == Variant::WPrivacy ? w_331() : ws_331();
    if (servers == 3 && messages == 4 && side_info == 1)
        return variant == Variant::WPrivacy ? w_341() : ws_341();
    return {};
}

}  // namespace lpirsi::fixtures
