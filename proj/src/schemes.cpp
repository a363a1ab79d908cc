#include "lpirsi/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lpirsi {

Rational generalized_binomial(const Rational& x, int k) {
    if (k < 0) throw DomainError("generalized binomial needs k >= 0");
    Rational out = 1;
    for (int i = 0; i < k; ++i) {
        out *= x - i;
        out /= i + 1;
    }
    return out;
}

std::vector<WeightLevel> w_weight_levels(const SchemeParams& params) {
    if (params.variant != Variant::WPrivacy) throw DomainError("weight levels are W-variant only");
    const int m1 = params.side_info + 1;
    const int u_size = params.messages - params.side_info - 1;  // K - M - 1
    std::vector<WeightLevel> levels;
    for (int k = 0; k < params.g_ceil(); ++k) {
        int ell = std::min(k * m1, u_size);
        levels.push_back({k, ell, k * m1 - ell});
    }
    return levels;
}

Distribution<int> w_level_distribution(const SchemeParams& params) {
    if (params.variant != Variant::WPrivacy) throw DomainError("P_k is W-variant only");
    const Rational g1 = params.g() - 1;
    Distribution<int> dist;
    Rational norm = 0;
    for (int k = 0; k < params.g_ceil(); ++k) {
        Rational w = generalized_binomial(g1, k) * rational_pow(Rational(params.servers - 1), k) *
                     rational_pow(params.t, k);
        dist.push(k, w);
        norm += w;
    }
    for (auto& p : dist.probs) p /= norm;
    return dist;
}

Distribution<int> ws_level_distribution(const SchemeParams& params) {
    if (params.variant != Variant::WSPrivacy) throw DomainError("P_ell is WS-variant only");
    const Rational r = params.r();
    const int top = params.messages - 2;
    const Rational norm = rational_pow(r + 1, top);
    Distribution<int> dist;
    for (int ell = 0; ell <= top; ++ell)
        dist.push(ell, Rational(binomial(top, ell)) * rational_pow(r, ell) / norm);
    return dist;
}

Distribution<int> ws_side_conditional(int ell, int j, const SchemeParams& params) {
    if (params.variant != Variant::WSPrivacy) throw DomainError("side conditional is WS-variant only");
    const Rational r = params.r();
    if (r < 1) throw DomainError("WS scheme requires r = (N-1)t >= 1");
    if (j != 0 && j != 1) throw DomainError("j must be 0 or 1");
    auto prob = [&](int s) {
        const int e = ell + s + j;
        const Rational sign = (e % 2 == 0) ? 1 : -1;
        return (rational_pow(r, e) + sign * r) / ((r + 1) * rational_pow(r, ell + j));
    };
    Distribution<int> dist;
    dist.push(0, prob(0));
    dist.push(1, prob(1));
    dist.check();
    return dist;
}

namespace {

// All maps over `keys` with exactly `weight` nonzero entries, each nonzero
// value in [1, top]. All such maps are equiprobable under the schemes.
void weighted_maps_rec(const std::vector<int>& keys, std::size_t pos, int weight, int top,
                       std::map<int, int>& cur, std::vector<std::map<int, int>>& out) {
    int remaining = static_cast<int>(keys.size() - pos);
    if (weight > remaining) return;
    if (pos == keys.size()) {
        out.push_back(cur);
        return;
    }
    cur[keys[pos]] = 0;
    weighted_maps_rec(keys, pos + 1, weight, top, cur, out);
    if (weight > 0) {
        for (int v = 1; v <= top; ++v) {
            cur[keys[pos]] = v;
            weighted_maps_rec(keys, pos + 1, weight - 1, top, cur, out);
        }
    }
    cur.erase(keys[pos]);
}

std::vector<std::map<int, int>> weighted_maps(const std::vector<int>& keys, int weight, int top) {
    std::vector<std::map<int, int>> out;
    std::map<int, int> cur;
    weighted_maps_rec(keys, 0, weight, top, cur, out);
    return out;
}

Rational weighted_map_count(int keys, int weight, int top) {
    return Rational(binomial(keys, weight)) * rational_pow(Rational(top), weight);
}

// Uniform draw from the weight-`weight` maps: support set uniform among
// weight-subsets, then each nonzero entry uniform in [1, top].
std::map<int, int> sample_weighted_map(const std::vector<int>& keys, int weight, int top,
                                       std::mt19937_64& rng) {
    std::map<int, int> out;
    int need = weight;
    int left = static_cast<int>(keys.size());
    std::uniform_int_distribution<int> value(1, top);
    for (int key : keys) {
        // selection sampling: include this key with probability need/left
        std::uniform_int_distribution<int> pick(0, left - 1);
        bool chosen = pick(rng) < need;
        out[key] = chosen ? value(rng) : 0;
        if (chosen) --need;
        --left;
    }
    return out;
}

std::vector<int> sample_permutation(int n, std::mt19937_64& rng) {
    std::vector<int> pi(static_cast<std::size_t>(n));
    std::iota(pi.begin(), pi.end(), 0);
    for (int i = n - 1; i > 0; --i) {
        std::uniform_int_distribution<int> pick(0, i);
        std::swap(pi[static_cast<std::size_t>(i)], pi[static_cast<std::size_t>(pick(rng))]);
    }
    return pi;
}

// The (F_U, F_S0, F_S1) part of a pattern with its probability; independent
// of the permutation under both schemes.
struct FieldsRealization {
    std::map<int, int> f_u, f_s0, f_s1;
    Rational prob;
};

std::vector<FieldsRealization> enumerate_fields(const SchemeParams& params,
                                                const RetrievalRequest& req) {
    const int top = params.servers - 1;
    const auto u_keys = req.unknown(params.messages);
    const auto& s_keys = req.side_info;
    std::vector<FieldsRealization> out;

    if (params.variant == Variant::WPrivacy) {
        const auto level_dist = w_level_distribution(params);
        for (const auto& level : w_weight_levels(params)) {
            Rational p_k = level_dist.prob_of(level.k);
            if (p_k == 0) continue;
            auto us = weighted_maps(u_keys, level.ell, top);
            auto s0s = weighted_maps(s_keys, level.s0_weight, top);
            auto s1s = weighted_maps(s_keys, params.side_info, top);
            Rational per = p_k / (weighted_map_count(int(u_keys.size()), level.ell, top) *
                                  weighted_map_count(int(s_keys.size()), level.s0_weight, top) *
                                  weighted_map_count(int(s_keys.size()), params.side_info, top));
            for (const auto& fu : us)
                for (const auto& f0 : s0s)
                    for (const auto& f1 : s1s) out.push_back({fu, f0, f1, per});
        }
    } else {
        const auto level_dist = ws_level_distribution(params);
        for (int ell = 0; ell <= params.messages - 2; ++ell) {
            Rational p_ell = level_dist.prob_of(ell);
            if (p_ell == 0) continue;
            auto us = weighted_maps(u_keys, ell, top);
            Rational per_u = 1 / weighted_map_count(int(u_keys.size()), ell, top);
            auto cond0 = ws_side_conditional(ell, 0, params);
            auto cond1 = ws_side_conditional(ell, 1, params);
            for (int s0 = 0; s0 <= 1; ++s0) {
                Rational p0 = cond0.prob_of(s0);
                if (p0 == 0) continue;
                auto s0s = weighted_maps(s_keys, s0, top);
                Rational per0 = p0 / weighted_map_count(1, s0, top);
                for (int s1 = 0; s1 <= 1; ++s1) {
                    Rational p1 = cond1.prob_of(s1);
                    if (p1 == 0) continue;
                    auto s1s = weighted_maps(s_keys, s1, top);
                    Rational per1 = p1 / weighted_map_count(1, s1, top);
                    for (const auto& fu : us)
                        for (const auto& f0 : s0s)
                            for (const auto& f1 : s1s)
                                out.push_back({fu, f0, f1, p_ell * per_u * per0 * per1});
                }
            }
        }
    }
    return out;
}

}  // namespace

RandomPattern sample_pattern_w(const SchemeParams& params, const RetrievalRequest& req,
                               std::mt19937_64& rng) {
    params.validate();
    req.validate(params);
    const int top = params.servers - 1;
    RandomPattern pattern;
    pattern.pi = sample_permutation(params.servers, rng);
    const auto levels = w_weight_levels(params);
    const int k = w_level_distribution(params).sample(rng);
    const auto& level = levels[static_cast<std::size_t>(k)];
    pattern.f_u = sample_weighted_map(req.unknown(params.messages), level.ell, top, rng);
    pattern.f_s0 = sample_weighted_map(req.side_info, level.s0_weight, top, rng);
    pattern.f_s1 = sample_weighted_map(req.side_info, params.side_info, top, rng);
    return pattern;
}

RandomPattern sample_pattern_ws(const SchemeParams& params, const RetrievalRequest& req,
                                std::mt19937_64& rng) {
    params.validate();
    req.validate(params);
    const int top = params.servers - 1;
    RandomPattern pattern;
    pattern.pi = sample_permutation(params.servers, rng);
    const int ell = ws_level_distribution(params).sample(rng);
    const int s0 = ws_side_conditional(ell, 0, params).sample(rng);
    const int s1 = ws_side_conditional(ell, 1, params).sample(rng);
    pattern.f_u = sample_weighted_map(req.unknown(params.messages), ell, top, rng);
    pattern.f_s0 = sample_weighted_map(req.side_info, s0, top, rng);
    pattern.f_s1 = sample_weighted_map(req.side_info, s1, top, rng);
    return pattern;
}

RandomPattern sample_pattern(const SchemeParams& params, const RetrievalRequest& req,
                             std::mt19937_64& rng) {
    return params.variant == Variant::WPrivacy ? sample_pattern_w(params, req, rng)
                                               : sample_pattern_ws(params, req, rng);
}

std::vector<WeightedPattern> enumerate_patterns(const SchemeParams& params,
                                                const RetrievalRequest& req,
                                                const std::vector<int>* fixed_pi) {
    params.validate();
    req.validate(params);
    const auto fields = enumerate_fields(params, req);

    BigInt factorial = 1;
    for (int i = 2; i <= params.servers; ++i) factorial *= i;
    const Rational pi_prob = Rational(1, factorial);

    std::vector<std::vector<int>> perms;
    if (fixed_pi) {
        perms.push_back(*fixed_pi);
    } else {
        std::vector<int> pi(static_cast<std::size_t>(params.servers));
        std::iota(pi.begin(), pi.end(), 0);
        do perms.push_back(pi);
        while (std::next_permutation(pi.begin(), pi.end()));
    }

    std::vector<WeightedPattern> out;
    out.reserve(perms.size() * fields.size());
    for (const auto& pi : perms)
        for (const auto& f : fields)
            out.push_back({RandomPattern{pi, f.f_u, f.f_s0, f.f_s1}, pi_prob * f.prob});
    return out;
}

Rational reference_cost(CostModel model, const SchemeParams& params) {
    const int n = params.servers;
    const int k_msgs = params.messages;
    const int m = params.side_info;
    const Rational inv = Rational(1, n - 1);
    switch (model) {
        case CostModel::PIR:
            return 1 + inv * (1 - 1 / rational_pow(Rational(n), k_msgs - 1));
        case CostModel::PIR_SI_WS:
            return 1 + inv * (1 - 1 / rational_pow(Rational(n), k_msgs - m - 1));
        case CostModel::PIR_SI_W_UB: {
            Rational z = 0;
            for (int k = 0; k < params.g_ceil(); ++k)
                z += generalized_binomial(params.g() - 1, k) * rational_pow(Rational(n - 1), k);
            return 1 + inv * (1 - 1 / z);
        }
        case CostModel::L_PIR:
            return 1 + inv * (1 - 1 / rational_pow(Rational(n - 1) * params.t + 1, k_msgs - 1));
        case CostModel::LPIRSI_W: {
            Rational z = 0;
            for (int k = 0; k < params.g_ceil(); ++k)
                z += generalized_binomial(params.g() - 1, k) *
                     rational_pow(Rational(n - 1) * params.t, k);
            return 1 + inv * (1 - 1 / z);
        }
        case CostModel::LPIRSI_WS:
            if (m != 1) throw DomainError("LPIRSI_WS cost is defined for M=1 only");
            return 1 + inv * (1 - 1 / rational_pow(params.r() + 1, k_msgs - 2));
    }
    throw DomainError("unknown cost model");
}

double leakage_exponent_bound(Variant variant, double cost, const SchemeParams& params) {
    const double n1 = params.servers - 1;
    const double max_cost = 1.0 + 1.0 / n1;
    if (cost < 1.0 || cost > max_cost + 1e-12)
        throw DomainError("cost must lie in [1, 1 + 1/(N-1)]");
    if (cost <= 1.0) return std::numeric_limits<double>::infinity();
    const double c = -std::log1p(-n1 * (cost - 1.0));
    if (!std::isfinite(c)) return -std::numeric_limits<double>::infinity();
    const double factor =
        variant == Variant::WPrivacy ? (params.g_ceil() - 1) * n1 : (params.messages - 2) * n1;
    return std::log(factor) - std::log(c);
}

}  // namespace lpirsi
