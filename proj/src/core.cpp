#include "lpirsi/core.hpp"

#include <algorithm>
#include <cmath>

namespace lpirsi {

double SchemeParams::epsilon() const { return -std::log(to_double(t)); }

void SchemeParams::validate() const {
    if (servers < 2) throw DomainError("N must be at least 2");
    if (messages < 2) throw DomainError("K must be at least 2");
    if (side_info < 0 || side_info > messages - 1) throw DomainError("M must be in [0, K-1]");
    if (t <= 0 || t > 1) throw DomainError("t = e^{-eps} must be in (0, 1]");
    if (!is_prime(modulus)) throw DomainError("field modulus must be prime");
    if (variant == Variant::WSPrivacy && side_info != 1)
        throw DomainError("WS variant requires M=1");
}

void Database::validate(const SchemeParams& params) const {
    if (count() != params.messages) throw DomainError("database must hold K messages");
    for (const auto& m : messages) {
        if (m.length() != params.subpackets())
            throw DomainError("every message must have L = N-1 sub-packets");
        for (Symbol s : m.subpackets)
            if (s >= params.modulus) throw DomainError("symbol out of field range");
    }
}

Database random_database(const SchemeParams& params, std::mt19937_64& rng) {
    std::uniform_int_distribution<Symbol> dist(0, params.modulus - 1);
    Database db;
    db.messages.resize(static_cast<std::size_t>(params.messages));
    for (auto& m : db.messages) {
        m.subpackets.resize(static_cast<std::size_t>(params.subpackets()));
        for (auto& s : m.subpackets) s = dist(rng);
    }
    return db;
}

std::vector<int> RetrievalRequest::unknown(int messages) const {
    std::vector<int> u;
    for (int i = 1; i <= messages; ++i)
        if (i != demand && !std::binary_search(side_info.begin(), side_info.end(), i))
            u.push_back(i);
    return u;
}

void RetrievalRequest::validate(const SchemeParams& params) const {
    if (demand < 1 || demand > params.messages) throw DomainError("W out of range");
    if (static_cast<int>(side_info.size()) != params.side_info)
        throw DomainError("|S| must equal M");
    if (!std::is_sorted(side_info.begin(), side_info.end())) throw DomainError("S must be sorted");
    int prev = 0;
    for (int s : side_info) {
        if (s < 1 || s > params.messages || s == demand || s == prev)
            throw DomainError("S must be distinct indices in [1, K] excluding W");
        prev = s;
    }
}

int RandomPattern::inference_server() const {
    for (std::size_t i = 0; i < pi.size(); ++i)
        if (pi[i] == 0) return static_cast<int>(i + 1);
    throw DomainError("pattern permutation assigns sub-packet 0 to no server");
}

int hamming_weight(const Query& query) {
    return static_cast<int>(std::count_if(query.indices.begin(), query.indices.end(),
                                          [](int v) { return v != 0; }));
}

std::vector<Query> build_queries(const RandomPattern& pattern, const RetrievalRequest& req,
                                 const SchemeParams& params) {
    if (static_cast<int>(pattern.pi.size()) != params.servers)
        throw DomainError("pattern permutation length must be N");
    auto expect_keys = [](const std::map<int, int>& m, const std::vector<int>& keys,
                          const char* what) {
        if (m.size() != keys.size()) throw DomainError(std::string("pattern ") + what + " has wrong index set");
        for (int k : keys)
            if (!m.count(k)) throw DomainError(std::string("pattern ") + what + " has wrong index set");
    };
    expect_keys(pattern.f_u, req.unknown(params.messages), "f_U");
    expect_keys(pattern.f_s0, req.side_info, "f_S0");
    expect_keys(pattern.f_s1, req.side_info, "f_S1");

    int n_star = pattern.inference_server();
    std::vector<Query> queries(static_cast<std::size_t>(params.servers));
    for (int n = 1; n <= params.servers; ++n) {
        Query& q = queries[static_cast<std::size_t>(n - 1)];
        q.indices.assign(static_cast<std::size_t>(params.messages), 0);
        q.indices[static_cast<std::size_t>(req.demand - 1)] = pattern.pi[static_cast<std::size_t>(n - 1)];
        for (auto [u, idx] : pattern.f_u) q.indices[static_cast<std::size_t>(u - 1)] = idx;
        const auto& f_s = (n == n_star) ? pattern.f_s0 : pattern.f_s1;
        for (auto [s, idx] : f_s) q.indices[static_cast<std::size_t>(s - 1)] = idx;
    }
    return queries;
}

Answer compute_answer(const Query& query, const Database& db, Symbol modulus) {
    if (static_cast<int>(query.indices.size()) != db.count())
        throw DomainError("query length must equal K");
    if (hamming_weight(query) == 0) return std::nullopt;
    Symbol acc = 0;
    for (int i = 1; i <= db.count(); ++i)
        acc = field_add(acc, db.message(i).at(query.indices[static_cast<std::size_t>(i - 1)]) % modulus,
                        modulus);
    return acc;
}

Message decode(const std::vector<Answer>& answers, const std::vector<Query>& queries,
               const RandomPattern& pattern, const std::map<int, Message>& side_info,
               const RetrievalRequest& req, const SchemeParams& params) {
    const Symbol q = params.modulus;
    int n_star = pattern.inference_server();
    for (int n = 1; n <= params.servers; ++n)
        if (n != n_star && !answers[static_cast<std::size_t>(n - 1)].has_value())
            throw ProtocolViolation("empty answer from non-inference server");

    // Residual of server n after removing the side information contribution
    // named by its own query; an empty answer counts as the field zero.
    auto residual = [&](int n) {
        const Answer& a = answers[static_cast<std::size_t>(n - 1)];
        Symbol acc = a.value_or(0);
        for (int s : req.side_info) {
            int idx = queries[static_cast<std::size_t>(n - 1)].indices[static_cast<std::size_t>(s - 1)];
            acc = field_sub(acc, side_info.at(s).at(idx) % q, q);
        }
        return acc;
    };

    Symbol base = residual(n_star);
    Message out;
    out.subpackets.resize(static_cast<std::size_t>(params.subpackets()));
    for (int n = 1; n <= params.servers; ++n) {
        int i = pattern.pi[static_cast<std::size_t>(n - 1)];
        if (i == 0) continue;
        out.subpackets[static_cast<std::size_t>(i - 1)] = field_sub(residual(n), base, q);
    }
    return out;
}

int downloaded_symbols(const std::vector<Answer>& answers) {
    return static_cast<int>(std::count_if(answers.begin(), answers.end(),
                                          [](const Answer& a) { return a.has_value(); }));
}

}  // namespace lpirsi
