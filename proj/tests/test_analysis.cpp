#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lpirsi/analysis.hpp"

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

bool ratios_within(const LeakageReport& report, const Rational& t) {
    return std::all_of(report.ratios.begin(), report.ratios.end(), [&](const Rational& x) {
        return x == t || x == 1 || x * t == 1;
    });
}

}  // namespace

TEST_CASE("query law of the all-zero query") {
    auto p = make(3, 3, 1, Rational(1, 2));
    RetrievalRequest req{1, {2}};
    std::vector<int> zero{0, 0, 0};
    for (int n = 1; n <= 3; ++n) {
        auto law = enumerate_query_law(p, req, n);
        Rational total = 0;
        for (const auto& [q, prob] : law) total += prob;
        CHECK(total == 1);
        // 1/N times the level-0 mass P_0 = 1/(t+1)
        CHECK(law.at(zero) == Rational(1, 3) * Rational(2, 3));
    }

    auto ws = make(3, 3, 1, Rational(1, 2), Variant::WSPrivacy);
    auto law = enumerate_query_law(ws, req, 1);
    CHECK(law.at(zero) == Rational(1, 3) * Rational(1, 2));  // P_0 = 1/(2t+1) = 1/2
    CHECK_THROWS_AS(enumerate_query_law(p, req, 0), DomainError);
}

TEST_CASE("query weights stay admissible") {
    auto p = make(3, 4, 1, Rational(1, 2));
    RetrievalRequest req{1, {2}};
    for (int n = 1; n <= 3; ++n)
        for (const auto& [q, prob] : enumerate_query_law(p, req, n)) {
            int weight = 0;
            for (int v : q)
                if (v != 0) ++weight;
            CHECK((weight == 0 || weight == 2 || weight == 4));
        }
}

TEST_CASE("leakage certification, W variant") {
    for (Rational t : {Rational(1), Rational(1, 2), Rational(1, 4)}) {
        auto report = max_leakage_ratio(make(3, 3, 1, t));
        CHECK(!report.unbounded);
        CHECK(report.max_ratio == 1 / t);
        CHECK(report.certified);
        CHECK(ratios_within(report, t));
    }
}

TEST_CASE("leakage certification, WS variant") {
    auto report = max_leakage_ratio(make(3, 3, 1, Rational(1, 2), Variant::WSPrivacy));  // r = 1
    CHECK(report.max_ratio == 2);
    CHECK(report.certified);
    CHECK(ratios_within(report, Rational(1, 2)));
    report = max_leakage_ratio(make(3, 3, 1, 1, Variant::WSPrivacy));
    CHECK(report.max_ratio == 1);
}

TEST_CASE("joint oracle agrees with the query marginal") {
    for (Variant v : {Variant::WPrivacy, Variant::WSPrivacy}) {
        auto p = make(3, 3, 1, Rational(1, 2), v);
        auto joint = joint_leakage_oracle(p, 2);
        auto marginal = max_leakage_ratio(p);
        CHECK(joint.max_ratio == marginal.max_ratio);
        CHECK(joint.unbounded == marginal.unbounded);
        CHECK(joint.certified);
    }
    CHECK_THROWS_AS(joint_leakage_oracle(make(3, 3, 1, 1), 5), DomainError);
}

TEST_CASE("exact download cost") {
    CHECK(exact_download_cost(make(3, 3, 1, 1)) == Rational(5, 4));
    CHECK(exact_download_cost(make(3, 3, 1, 1, Variant::WSPrivacy)) == Rational(4, 3));
    CHECK(exact_download_cost(make(3, 4, 1, 1, Variant::WSPrivacy)) == Rational(13, 9));
    // identical to the closed forms
    auto w = make(4, 6, 2, Rational(1, 2));
    CHECK(exact_download_cost(w) == reference_cost(CostModel::LPIRSI_W, w));
}

TEST_CASE("Monte Carlo cost estimation") {
    auto p = make(3, 3, 1, 1);
    auto single = estimate_download_cost(p, 1, 5);
    CHECK((single.mean == doctest::Approx(1.0) || single.mean == doctest::Approx(1.5)));

    auto est = estimate_download_cost(p, 20000, 11);
    double exact = to_double(exact_download_cost(p));
    CHECK(std::abs(est.mean - exact) <= 4 * est.stderr_mean);
    CHECK_THROWS_AS(estimate_download_cost(p, 0, 1), DomainError);
}

TEST_CASE("infeasible enumeration is refused with guidance") {
    auto p = make(7, 10, 0, 1);
    RetrievalRequest req{1, {}};
    CHECK_THROWS_AS(enumerate_query_law(p, req, 1), InfeasibleError);
    CHECK_THROWS_AS(max_leakage_ratio(p), InfeasibleError);
}

TEST_CASE("sweep and CSV output") {
    std::ostringstream empty;
    write_sweep_csv(empty, {});
    CHECK(empty.str() == "n,k,m,epsilon,exact_cost,measured_cost,max_leakage,bound,error\n");

    std::vector<SchemeParams> grid{make(3, 3, 1, Rational(1, 2)), make(3, 4, 1, Rational(1, 2))};
    auto rows = sweep(grid, 200, 3);
    REQUIRE(rows.size() == 2);
    for (const auto& row : rows) {
        CHECK(row.error.empty());
        CHECK(row.max_leakage == 2);
        CHECK(row.exact_cost == reference_cost(CostModel::LPIRSI_W, row.params));
    }
    std::ostringstream out;
    write_sweep_csv(out, rows);
    int lines = 0;
    for (char c : out.str())
        if (c == '\n') ++lines;
    CHECK(lines == 3);
}
