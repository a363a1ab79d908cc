#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "lpirsi/schemes.hpp"

using namespace lpirsi;

namespace {

SchemeParams make(int n, int k, int m, Rational t, Variant v = Variant::WPrivacy) {
    SchemeParams p;
    p.servers = n;
    p.messages = k;
    p.side_info = m;
    p.t = t;
    p.variant = v;
    return p;
}

RetrievalRequest default_req(const SchemeParams& p) {
    RetrievalRequest req{1, {}};
    for (int i = 0; i < p.side_info; ++i) req.side_info.push_back(i + 2);
    return req;
}

}  // namespace

TEST_CASE("generalized binomial") {
    CHECK(generalized_binomial(Rational(7, 3), 0) == 1);
    CHECK(generalized_binomial(Rational(1, 2), 1) == Rational(1, 2));
    CHECK(generalized_binomial(Rational(3), 2) == 3);
    CHECK(generalized_binomial(Rational(-1), 2) == 1);
    CHECK_THROWS_AS(generalized_binomial(Rational(1), -1), DomainError);
}

TEST_CASE("W level distribution") {
    for (Rational t : {Rational(1), Rational(3, 4), Rational(1, 2), Rational(1, 4)}) {
        auto d = w_level_distribution(make(3, 3, 1, t));
        CHECK(d.prob_of(0) == 1 / (t + 1));
        CHECK(d.prob_of(1) == t / (t + 1));
        d = w_level_distribution(make(3, 4, 1, t));
        CHECK(d.prob_of(0) == 1 / (2 * t + 1));
        CHECK(d.prob_of(1) == 2 * t / (2 * t + 1));
    }
    auto d = w_level_distribution(make(2, 2, 0, 1));
    CHECK(d.prob_of(0) == Rational(1, 2));
    CHECK(d.prob_of(1) == Rational(1, 2));
}

TEST_CASE("W weight levels") {
    auto lv = w_weight_levels(make(3, 3, 1, 1));
    REQUIRE(lv.size() == 2);
    CHECK((lv[0].k == 0 && lv[0].ell == 0 && lv[0].s0_weight == 0));
    CHECK((lv[1].k == 1 && lv[1].ell == 1 && lv[1].s0_weight == 1));

    lv = w_weight_levels(make(3, 4, 1, 1));
    REQUIRE(lv.size() == 2);
    CHECK((lv[1].k == 1 && lv[1].ell == 2 && lv[1].s0_weight == 0));

    lv = w_weight_levels(make(3, 6, 2, 1));
    REQUIRE(lv.size() == 2);
    CHECK((lv[1].k == 1 && lv[1].ell == 3 && lv[1].s0_weight == 0));
}

TEST_CASE("WS level distribution") {
    for (Rational t : {Rational(1), Rational(3, 4), Rational(1, 2)}) {
        auto d = ws_level_distribution(make(3, 3, 1, t, Variant::WSPrivacy));
        CHECK(d.prob_of(0) == 1 / (2 * t + 1));
        CHECK(d.prob_of(1) == 2 * t / (2 * t + 1));
        d = ws_level_distribution(make(3, 4, 1, t, Variant::WSPrivacy));
        Rational den = (2 * t + 1) * (2 * t + 1);
        CHECK(d.prob_of(0) == 1 / den);
        CHECK(d.prob_of(1) == 4 * t / den);
        CHECK(d.prob_of(2) == 4 * t * t / den);
    }
}

TEST_CASE("distributions normalize exactly over the parameter grid") {
    for (int n = 2; n <= 6; ++n)
        for (int k = 2; k <= 8; ++k)
            for (Rational t : {Rational(1), Rational(3, 4), Rational(1, 2), Rational(1, 4)}) {
                for (int m = 0; m < k; ++m)
                    CHECK(w_level_distribution(make(n, k, m, t)).total() == 1);
                auto ws = make(n, k, 1, t, Variant::WSPrivacy);
                CHECK(ws_level_distribution(ws).total() == 1);
                if (ws.r() >= 1)
                    for (int ell = 0; ell <= k - 2; ++ell)
                        for (int j = 0; j <= 1; ++j)
                            CHECK(ws_side_conditional(ell, j, ws).total() == 1);
            }
}

TEST_CASE("WS side conditional") {
    auto p = make(3, 3, 1, 1, Variant::WSPrivacy);  // r = 2
    auto d = ws_side_conditional(0, 0, p);
    CHECK(d.prob_of(0) == 1);
    CHECK(d.prob_of(1) == 0);
    d = ws_side_conditional(0, 1, p);
    CHECK(d.prob_of(0) == 0);
    CHECK(d.prob_of(1) == 1);
    d = ws_side_conditional(1, 1, p);
    CHECK(d.prob_of(0) == Rational(1, 2));
    CHECK(d.prob_of(1) == Rational(1, 2));
    // s_0 = 1 whenever ell >= 1
    CHECK(ws_side_conditional(1, 0, p).prob_of(1) == 1);

    auto small = make(3, 3, 1, Rational(1, 4), Variant::WSPrivacy);  // r = 1/2
    CHECK_THROWS_AS(ws_side_conditional(0, 0, small), DomainError);
}

TEST_CASE("W sampler matches its level law empirically") {
    auto p = make(3, 3, 1, Rational(1, 2));
    auto req = default_req(p);
    auto dist = w_level_distribution(p);
    std::mt19937_64 rng(2024);
    const int trials = 100000;
    std::map<int, int> counts;
    for (int i = 0; i < trials; ++i) {
        auto pat = sample_pattern_w(p, req, rng);
        int weight = 0;
        for (auto [k, v] : pat.f_u)
            if (v != 0) ++weight;
        ++counts[weight];  // ell_k identifies k here
    }
    for (int k = 0; k <= 1; ++k) {
        double exp = to_double(dist.prob_of(k));
        double freq = double(counts[k]) / trials;
        double sigma = std::sqrt(exp * (1 - exp) / trials);
        CHECK(std::abs(freq - exp) <= 4 * sigma);
    }
}

TEST_CASE("WS sampler matches the joint (ell, s0, s1) law empirically") {
    auto p = make(3, 3, 1, Rational(1, 2), Variant::WSPrivacy);  // r = 1
    auto req = default_req(p);
    std::mt19937_64 rng(99);
    const int trials = 100000;
    std::map<std::tuple<int, int, int>, int> counts;
    for (int i = 0; i < trials; ++i) {
        auto pat = sample_pattern_ws(p, req, rng);
        int ell = 0;
        for (auto [k, v] : pat.f_u)
            if (v != 0) ++ell;
        int s0 = pat.f_s0.at(2) != 0 ? 1 : 0;
        int s1 = pat.f_s1.at(2) != 0 ? 1 : 0;
        ++counts[{ell, s0, s1}];
    }
    auto levels = ws_level_distribution(p);
    for (int ell = 0; ell <= 1; ++ell)
        for (int s0 = 0; s0 <= 1; ++s0)
            for (int s1 = 0; s1 <= 1; ++s1) {
                Rational joint = levels.prob_of(ell) * ws_side_conditional(ell, 0, p).prob_of(s0) *
                                 ws_side_conditional(ell, 1, p).prob_of(s1);
                double exp = to_double(joint);
                double freq = double(counts[{ell, s0, s1}]) / trials;
                double sigma = std::sqrt(exp * (1 - exp) / trials) + 1e-12;
                CHECK(std::abs(freq - exp) <= 4 * sigma);
            }
}

TEST_CASE("enumerated pattern support carries exact joint probabilities") {
    for (Variant v : {Variant::WPrivacy, Variant::WSPrivacy}) {
        auto p = make(3, 3, 1, Rational(1, 2), v);
        auto req = default_req(p);
        Rational total = 0;
        for (const auto& wp : enumerate_patterns(p, req)) {
            CHECK(wp.prob > 0);
            total += wp.prob;
        }
        CHECK(total == 1);

        std::vector<int> pi{0, 1, 2};
        Rational fixed = 0;
        for (const auto& wp : enumerate_patterns(p, req, &pi)) {
            CHECK(wp.pattern.pi == pi);
            fixed += wp.prob;
        }
        CHECK(fixed == Rational(1, 6));
    }
}

TEST_CASE("reference costs") {
    CHECK(reference_cost(CostModel::PIR, make(2, 2, 0, 1)) == Rational(3, 2));
    CHECK(reference_cost(CostModel::LPIRSI_WS, make(3, 3, 1, 1, Variant::WSPrivacy)) ==
          Rational(4, 3));
    CHECK(reference_cost(CostModel::LPIRSI_W, make(3, 3, 1, Rational(1, 2))) == Rational(7, 6));
    CHECK_THROWS_AS(reference_cost(CostModel::LPIRSI_WS, make(3, 3, 2, 1)), DomainError);
}

TEST_CASE("cost reduction identities hold exactly") {
    for (int n = 2; n <= 5; ++n)
        for (int k = 2; k <= 8; ++k) {
            for (int m = 0; m < k; ++m) {
                auto at_one = make(n, k, m, 1);
                CHECK(reference_cost(CostModel::LPIRSI_W, at_one) ==
                      reference_cost(CostModel::PIR_SI_W_UB, at_one));
            }
            for (Rational t : {Rational(1), Rational(1, 2)}) {
                auto no_side = make(n, k, 0, t);
                CHECK(reference_cost(CostModel::LPIRSI_W, no_side) ==
                      reference_cost(CostModel::L_PIR, no_side));
            }
            auto ws_one = make(n, k, 1, 1, Variant::WSPrivacy);
            CHECK(reference_cost(CostModel::LPIRSI_WS, ws_one) ==
                  reference_cost(CostModel::PIR_SI_WS, ws_one));
        }
    // without side information and perfect privacy, more messages cost more
    CHECK(reference_cost(CostModel::PIR, make(2, 2, 0, 1)) <
          reference_cost(CostModel::PIR, make(2, 3, 0, 1)));
}

TEST_CASE("cost is nondecreasing in t and stays in its band") {
    const std::vector<Rational> ts{Rational(1, 4), Rational(1, 2), Rational(3, 4), Rational(1)};
    for (int n = 2; n <= 4; ++n)
        for (int k = 3; k <= 6; ++k) {
            Rational prev_w = 0, prev_ws = 0;
            for (const Rational& t : ts) {
                Rational w = reference_cost(CostModel::LPIRSI_W, make(n, k, 1, t));
                Rational ws =
                    reference_cost(CostModel::LPIRSI_WS, make(n, k, 1, t, Variant::WSPrivacy));
                CHECK(w >= prev_w);
                CHECK(ws >= prev_ws);
                CHECK(w > 1);
                CHECK(w <= 1 + Rational(1, n - 1));
                CHECK(ws > 1);
                CHECK(ws <= 1 + Rational(1, n - 1));
                prev_w = w;
                prev_ws = ws;
            }
        }
}

TEST_CASE("leakage exponent bound") {
    auto p = make(3, 4, 1, 1);
    CHECK(std::isinf(leakage_exponent_bound(Variant::WPrivacy, 1.0, p)));
    CHECK(leakage_exponent_bound(Variant::WPrivacy, 1.0, p) > 0);
    CHECK(leakage_exponent_bound(Variant::WPrivacy, 1.5, p) ==
          -std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(leakage_exponent_bound(Variant::WPrivacy, 1.6, p), DomainError);

    // the achievable (cost, exponent) pairs respect the bound
    for (Rational t : {Rational(1), Rational(3, 4), Rational(1, 2), Rational(1, 4)}) {
        double eps = -std::log(to_double(t));
        auto w = make(3, 4, 1, t);
        double bound_w = leakage_exponent_bound(
            Variant::WPrivacy, to_double(reference_cost(CostModel::LPIRSI_W, w)), w);
        CHECK(eps <= bound_w + 1e-9);
        auto ws = make(3, 3, 1, t, Variant::WSPrivacy);
        double bound_ws = leakage_exponent_bound(
            Variant::WSPrivacy, to_double(reference_cost(CostModel::LPIRSI_WS, ws)), ws);
        CHECK(eps <= bound_ws + 1e-9);
    }
}
