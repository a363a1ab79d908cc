#include "lpirsi/analysis.hpp"

#include <cmath>
#include <iomanip>
#include <set>

namespace lpirsi {

namespace {

std::vector<RetrievalRequest> all_requests(const SchemeParams& params) {
    std::vector<RetrievalRequest> reqs;
    for (int w = 1; w <= params.messages; ++w) {
        std::vector<int> pool;
        for (int i = 1; i <= params.messages; ++i)
            if (i != w) pool.push_back(i);
        std::vector<int> chosen;
        auto rec = [&](auto&& self, std::size_t start) -> void {
            if (static_cast<int>(chosen.size()) == params.side_info) {
                reqs.push_back({w, chosen});
                return;
            }
            for (std::size_t i = start; i < pool.size(); ++i) {
                chosen.push_back(pool[i]);
                self(self, i + 1);
                chosen.pop_back();
            }
        };
        rec(rec, 0);
    }
    return reqs;
}

BigInt pattern_space_size(const SchemeParams& params, const RetrievalRequest& req) {
    const int top = params.servers - 1;
    const int u_size = static_cast<int>(req.unknown(params.messages).size());
    BigInt factorial = 1;
    for (int i = 2; i <= params.servers; ++i) factorial *= i;
    auto vectors = [&](int keys, int weight) {
        return binomial(keys, weight) * boost::multiprecision::pow(BigInt(top), unsigned(weight));
    };
    BigInt fields = 0;
    if (params.variant == Variant::WPrivacy) {
        for (const auto& level : w_weight_levels(params))
            fields += vectors(u_size, level.ell) * vectors(params.side_info, level.s0_weight) *
                      vectors(params.side_info, params.side_info);
    } else {
        for (int ell = 0; ell <= params.messages - 2; ++ell)
            fields += vectors(u_size, ell) * (1 + top) * (1 + top);
    }
    return factorial * fields;
}

void check_feasible(const BigInt& work) {
    if (work > 100000000)
        throw InfeasibleError(
            "exact enumeration exceeds the 1e8 state budget; use Monte Carlo mode (simulate)");
}

/// Per-server query laws for one (W, S), from a single pass over the support.
std::vector<QueryLaw> query_laws_all_servers(const SchemeParams& params,
                                             const RetrievalRequest& req) {
    std::vector<QueryLaw> laws(static_cast<std::size_t>(params.servers));
    for (const auto& wp : enumerate_patterns(params, req)) {
        auto queries = build_queries(wp.pattern, req, params);
        for (int n = 1; n <= params.servers; ++n)
            laws[static_cast<std::size_t>(n - 1)][queries[static_cast<std::size_t>(n - 1)].indices] +=
                wp.prob;
    }
    return laws;
}

void add_scaled(QueryLaw& into, const QueryLaw& law, const Rational& scale) {
    for (const auto& [q, p] : law) into[q] += p * scale;
}

struct RatioAccumulator {
    LeakageReport report;
    std::set<Rational> seen;

    RatioAccumulator() { report.max_ratio = 0; }

    void compare(int server, const RetrievalRequest& a, const QueryLaw& law_a,
                 const RetrievalRequest& b, const QueryLaw& law_b) {
        for (const auto& [q, pa] : law_a) {
            if (pa == 0) continue;
            auto it = law_b.find(q);
            const Rational pb = (it == law_b.end()) ? Rational(0) : it->second;
            if (pb == 0) {
                report.unbounded = true;
                report.witness = {server, q, a, b};
                continue;
            }
            Rational ratio = pa / pb;
            seen.insert(ratio);
            if (ratio > report.max_ratio) {
                report.max_ratio = ratio;
                report.witness = {server, q, a, b};
            }
        }
    }

    LeakageReport finish(const Rational& t) {
        report.ratios.assign(seen.begin(), seen.end());
        report.certified = !report.unbounded && report.max_ratio * t <= 1;
        return report;
    }
};

}  // namespace

QueryLaw enumerate_query_law(const SchemeParams& params, const RetrievalRequest& req, int server) {
    if (server < 1 || server > params.servers) throw DomainError("server index out of range");
    check_feasible(pattern_space_size(params, req));
    return query_laws_all_servers(params, req)[static_cast<std::size_t>(server - 1)];
}

LeakageReport max_leakage_ratio(const SchemeParams& params) {
    params.validate();
    const auto reqs = all_requests(params);
    check_feasible(pattern_space_size(params, reqs.front()) * BigInt(reqs.size()) *
                   params.servers);

    // laws[r][n]: query law at server n+1 under hypothesis reqs[r]
    std::vector<std::vector<QueryLaw>> laws;
    laws.reserve(reqs.size());
    for (const auto& req : reqs) laws.push_back(query_laws_all_servers(params, req));

    RatioAccumulator acc;
    if (params.variant == Variant::WPrivacy) {
        // marginalize S uniformly; the hypothesis is W alone
        const Rational s_weight =
            Rational(1, binomial(params.messages - 1, params.side_info));
        for (int n = 1; n <= params.servers; ++n) {
            std::map<int, QueryLaw> by_demand;
            std::map<int, RetrievalRequest> tag;
            for (std::size_t r = 0; r < reqs.size(); ++r) {
                add_scaled(by_demand[reqs[r].demand], laws[r][static_cast<std::size_t>(n - 1)],
                           s_weight);
                tag.emplace(reqs[r].demand, reqs[r]);
            }
            for (const auto& [w1, law1] : by_demand)
                for (const auto& [w2, law2] : by_demand)
                    if (w1 != w2) acc.compare(n, tag.at(w1), law1, tag.at(w2), law2);
        }
    } else {
        for (int n = 1; n <= params.servers; ++n)
            for (std::size_t i = 0; i < reqs.size(); ++i)
                for (std::size_t j = 0; j < reqs.size(); ++j)
                    if (i != j)
                        acc.compare(n, reqs[i], laws[i][static_cast<std::size_t>(n - 1)], reqs[j],
                                    laws[j][static_cast<std::size_t>(n - 1)]);
    }
    return acc.finish(params.t);
}

LeakageReport joint_leakage_oracle(const SchemeParams& params, Symbol small_modulus) {
    params.validate();
    if (!is_prime(small_modulus) || small_modulus > 3)
        throw DomainError("joint oracle needs a prime field of size at most 3");
    SchemeParams p = params;
    p.modulus = small_modulus;

    const int cells = p.messages * p.subpackets();
    BigInt db_count = boost::multiprecision::pow(BigInt(small_modulus), unsigned(cells));
    const auto reqs = all_requests(p);
    check_feasible(pattern_space_size(p, reqs.front()) * db_count * BigInt(reqs.size()));

    std::vector<Database> dbs;
    {
        Database db;
        db.messages.assign(static_cast<std::size_t>(p.messages),
                           Message{std::vector<Symbol>(static_cast<std::size_t>(p.subpackets()), 0)});
        auto rec = [&](auto&& self, int cell) -> void {
            if (cell == cells) {
                dbs.push_back(db);
                return;
            }
            for (Symbol v = 0; v < small_modulus; ++v) {
                db.messages[static_cast<std::size_t>(cell / p.subpackets())]
                    .subpackets[static_cast<std::size_t>(cell % p.subpackets())] = v;
                self(self, cell + 1);
            }
        };
        rec(rec, 0);
    }
    const Rational db_prob = Rational(1, BigInt(dbs.size()));

    // Joint (query, answer) law, with the answer appended to the query vector
    // as one extra coordinate: -1 for empty, otherwise the symbol value.
    auto joint_laws = [&](const RetrievalRequest& req) {
        std::vector<QueryLaw> laws(static_cast<std::size_t>(p.servers));
        for (const auto& wp : enumerate_patterns(p, req)) {
            auto queries = build_queries(wp.pattern, req, p);
            for (const auto& db : dbs) {
                for (int n = 1; n <= p.servers; ++n) {
                    const Query& q = queries[static_cast<std::size_t>(n - 1)];
                    Answer a = compute_answer(q, db, p.modulus);
                    std::vector<int> key = q.indices;
                    key.push_back(a ? static_cast<int>(*a) : -1);
                    laws[static_cast<std::size_t>(n - 1)][key] += wp.prob * db_prob;
                }
            }
        }
        return laws;
    };

    std::vector<std::vector<QueryLaw>> laws;
    laws.reserve(reqs.size());
    for (const auto& req : reqs) laws.push_back(joint_laws(req));

    RatioAccumulator acc;
    if (p.variant == Variant::WPrivacy) {
        const Rational s_weight = Rational(1, binomial(p.messages - 1, p.side_info));
        for (int n = 1; n <= p.servers; ++n) {
            std::map<int, QueryLaw> by_demand;
            std::map<int, RetrievalRequest> tag;
            for (std::size_t r = 0; r < reqs.size(); ++r) {
                add_scaled(by_demand[reqs[r].demand], laws[r][static_cast<std::size_t>(n - 1)],
                           s_weight);
                tag.emplace(reqs[r].demand, reqs[r]);
            }
            for (const auto& [w1, law1] : by_demand)
                for (const auto& [w2, law2] : by_demand)
                    if (w1 != w2) acc.compare(n, tag.at(w1), law1, tag.at(w2), law2);
        }
    } else {
        for (int n = 1; n <= p.servers; ++n)
            for (std::size_t i = 0; i < reqs.size(); ++i)
                for (std::size_t j = 0; j < reqs.size(); ++j)
                    if (i != j)
                        acc.compare(n, reqs[i], laws[i][static_cast<std::size_t>(n - 1)], reqs[j],
                                    laws[j][static_cast<std::size_t>(n - 1)]);
    }
    return acc.finish(p.t);
}

Rational exact_download_cost(const SchemeParams& params) {
    params.validate();
    // P_empty is the k = 0 (resp. ell = 0) mass: at level 0 the inference
    // server's query is all-zero with conditional probability 1.
    Rational p_empty = params.variant == Variant::WPrivacy
                           ? w_level_distribution(params).prob_of(0)
                           : ws_level_distribution(params).prob_of(0);
    return 1 + (1 - p_empty) / (params.servers - 1);
}

CostEstimate estimate_download_cost(const SchemeParams& params, long trials, std::uint64_t seed) {
    params.validate();
    if (trials < 1) throw DomainError("trials must be at least 1");
    RetrievalRequest req;
    req.demand = 1;
    for (int i = 0; i < params.side_info; ++i) req.side_info.push_back(i + 2);

    std::mt19937_64 rng(seed);
    Database db = random_database(params, rng);
    std::map<int, Message> side;
    for (int s : req.side_info) side.emplace(s, db.message(s));

    double sum = 0, sum_sq = 0;
    for (long i = 0; i < trials; ++i) {
        RandomPattern pattern = sample_pattern(params, req, rng);
        auto queries = build_queries(pattern, req, params);
        std::vector<Answer> answers;
        answers.reserve(queries.size());
        for (const auto& q : queries) answers.push_back(compute_answer(q, db, params.modulus));
        if (decode(answers, queries, pattern, side, req, params) != db.message(req.demand))
            throw ProtocolViolation("decode self-check failed during cost estimation");
        double cost = double(downloaded_symbols(answers)) / params.subpackets();
        sum += cost;
        sum_sq += cost * cost;
    }
    CostEstimate est;
    est.trials = trials;
    est.mean = sum / double(trials);
    if (trials > 1) {
        double var = (sum_sq - sum * sum / double(trials)) / double(trials - 1);
        est.stderr_mean = std::sqrt(std::max(var, 0.0) / double(trials));
    }
    return est;
}

std::vector<SweepRow> sweep(const std::vector<SchemeParams>& grid, long trials,
                            std::uint64_t seed) {
    std::vector<SweepRow> rows;
    std::uint64_t point = 0;
    for (const auto& params : grid) {
        SweepRow row;
        row.params = params;
        try {
            row.exact_cost = exact_download_cost(params);
            row.measured_cost = estimate_download_cost(params, trials, seed + point).mean;
            auto report = max_leakage_ratio(params);
            if (report.unbounded) {
                row.error = "leakage unbounded";
            } else {
                row.max_leakage = report.max_ratio;
            }
            row.exponent_bound =
                leakage_exponent_bound(params.variant, to_double(row.exact_cost), params);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
        ++point;
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "n,k,m,epsilon,exact_cost,measured_cost,max_leakage,bound,error\n";
    out << std::setprecision(12);
    for (const auto& row : rows) {
        out << row.params.servers << ',' << row.params.messages << ',' << row.params.side_info
            << ',' << row.params.epsilon() << ',' << to_double(row.exact_cost) << ','
            << row.measured_cost << ',' << to_double(row.max_leakage) << ',' << row.exponent_bound
            << ',' << row.error << '\n';
    }
}

}  // namespace lpirsi
