// lpirsi command line: simulate retrievals, certify leakage, print pattern
// tables, sweep parameter grids, and run the TCP server/client pair.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lpirsi/analysis.hpp"
#include "lpirsi/fixtures.hpp"
#include "lpirsi/protocol.hpp"

namespace {

using namespace lpirsi;

int g_log_level = 0;  // 0 error, 1 info, 2 debug

void init_log_level() {
    const char* env = std::getenv("LPIRSI_LOG");
    if (!env) return;
    std::string v(env);
    if (v == "error") g_log_level = 0;
    else if (v == "info") g_log_level = 1;
    else if (v == "debug") g_log_level = 2;
    else std::cerr << "warning: unknown LPIRSI_LOG value '" << v << "'\n";
}

void log_info(const std::string& msg) {
    if (g_log_level >= 1) std::cerr << "[info] " << msg << "\n";
}

void log_debug(const std::string& msg) {
    if (g_log_level >= 2) std::cerr << "[debug] " << msg << "\n";
}

struct RunConfig {
    int servers = 3;
    int messages = 3;
    int side_info = 1;
    std::string t_text;       // exact rational literal
    double epsilon = -1;      // decimal, converted
    bool epsilon_set = false;
    std::uint64_t modulus = kDefaultModulus;
    std::string variant_text = "w";
    std::uint64_t seed = 1;
    long trials = 100000;
    std::string output_path;
    std::string config_path;
    std::string servers_text;  // host:port,host:port,...
    std::string pi_text;
    bool check = false;
    bool joint = false;
    int demand = 1;
    std::string side_text;
    std::string db_path;
    std::string k_range;  // "a:b" or "a" (sweep)
};

Variant parse_variant(const std::string& text) {
    if (text == "w") return Variant::WPrivacy;
    if (text == "ws") return Variant::WSPrivacy;
    throw DomainError("variant must be 'w' or 'ws'");
}

/// Convert a decimal epsilon to a rational t = e^{-eps}, rounded to 12
/// decimal places. Good enough for simulation; verify refuses it.
Rational epsilon_to_t(double eps) {
    if (eps < 0 || !std::isfinite(eps)) throw DomainError("epsilon must be finite and >= 0");
    const double scaled = std::exp(-eps) * 1e12;
    Rational t(BigInt(std::llround(scaled)), BigInt(1000000000000LL));
    if (t > 1) t = 1;
    if (t <= 0) throw DomainError("epsilon too large: t rounds to 0");
    return t;
}

SchemeParams build_params(const RunConfig& cfg, bool require_rational_t) {
    SchemeParams params;
    params.servers = cfg.servers;
    params.messages = cfg.messages;
    params.side_info = cfg.side_info;
    params.modulus = cfg.modulus;
    params.variant = parse_variant(cfg.variant_text);
    if (!cfg.t_text.empty() && cfg.epsilon_set)
        throw DomainError("give either --t or --epsilon, not both");
    if (!cfg.t_text.empty()) {
        params.t = parse_rational(cfg.t_text);
    } else if (cfg.epsilon_set) {
        if (require_rational_t)
            throw DomainError(
                "exact certification requires a rational t; pass --t a/b instead of --epsilon");
        params.t = epsilon_to_t(cfg.epsilon);
    }
    params.validate();
    return params;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stoi(item));
    }
    return out;
}

std::vector<Endpoint> parse_endpoints(const std::string& text) {
    std::vector<Endpoint> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto colon = item.rfind(':');
        if (colon == std::string::npos) throw DomainError("endpoint must be host:port: " + item);
        Endpoint ep;
        ep.host = item.substr(0, colon);
        int port = std::stoi(item.substr(colon + 1));
        if (port < 1 || port > 65535) throw DomainError("port out of range: " + item);
        ep.port = static_cast<std::uint16_t>(port);
        out.push_back(std::move(ep));
    }
    if (out.empty()) throw DomainError("no endpoints given");
    return out;
}

RetrievalRequest default_request(const SchemeParams& params) {
    RetrievalRequest req;
    req.demand = 1;
    for (int i = 0; i < params.side_info; ++i) req.side_info.push_back(i + 2);
    return req;
}

std::string format_vector(const std::vector<int>& v) {
    std::string out = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out + ")";
}

std::string answer_expression(const Query& query) {
    std::string out;
    for (std::size_t i = 0; i < query.indices.size(); ++i) {
        if (query.indices[i] == 0) continue;
        if (!out.empty()) out += "+";
        out += "X_" + std::to_string(i + 1) + "[" + std::to_string(query.indices[i]) + "]";
    }
    return out.empty() ? "empty" : out;
}

int cmd_simulate(const RunConfig& cfg) {
    SchemeParams params = build_params(cfg, false);
    log_info("simulate: " + std::to_string(cfg.trials) + " trials, seed " +
             std::to_string(cfg.seed));
    Rational exact = exact_download_cost(params);
    CostEstimate est = estimate_download_cost(params, cfg.trials, cfg.seed);
    std::cout << "exact cost    = " << to_string(exact) << " (" << to_double(exact) << ")\n";
    std::cout << "measured mean = " << est.mean << " +/- " << est.stderr_mean << " ("
              << est.trials << " trials)\n";
    return 0;
}

int cmd_verify(const RunConfig& cfg) {
    SchemeParams params = build_params(cfg, true);
    LeakageReport report = max_leakage_ratio(params);
    if (cfg.joint) {
        log_info("running joint (query, answer) oracle over field of size " +
                 std::to_string(cfg.modulus));
        LeakageReport joint = joint_leakage_oracle(params, params.modulus);
        std::cout << "joint max ratio = " << to_string(joint.max_ratio)
                  << (joint.max_ratio == report.max_ratio ? " (matches query marginal)"
                                                          : " (MISMATCH with query marginal)")
                  << "\n";
        if (joint.max_ratio != report.max_ratio || joint.unbounded != report.unbounded) {
            std::cout << "not certified\n";
            return 1;
        }
    }
    std::cout << "realized ratios = {";
    for (std::size_t i = 0; i < report.ratios.size(); ++i)
        std::cout << (i ? ", " : "") << to_string(report.ratios[i]);
    std::cout << "}\n";
    if (report.unbounded) {
        std::cout << "max ratio = unbounded (query " << format_vector(report.witness.query)
                  << " at server " << report.witness.server << ")\n";
        std::cout << "not certified\n";
        return 1;
    }
    std::cout << "max ratio = " << to_string(report.max_ratio) << ", e^eps = "
              << to_string(Rational(1) / params.t) << "\n";
    std::cout << (report.certified ? "certified\n" : "not certified\n");
    return report.certified ? 0 : 1;
}

int cmd_table(const RunConfig& cfg) {
    SchemeParams params = build_params(cfg, false);
    RetrievalRequest req = default_request(params);
    std::vector<int> pi;
    if (!cfg.pi_text.empty()) {
        pi = parse_int_list(cfg.pi_text);
    } else {
        for (int n = 0; n < params.servers; ++n) pi.push_back(n);
    }
    if (static_cast<int>(pi.size()) != params.servers)
        throw DomainError("--pi must list exactly N entries");

    auto support = enumerate_patterns(params, req, &pi);
    std::cout << "demand W = " << req.demand << ", side info S = "
              << format_vector(req.side_info) << ", pi = " << format_vector(pi) << "\n";
    std::cout << "f_U\tf_S0\tf_S1";
    for (int n = 1; n <= params.servers; ++n) std::cout << "\tq_" << n;
    std::cout << "\tanswers\tprob\n";
    for (const auto& wp : support) {
        auto queries = build_queries(wp.pattern, req, params);
        std::vector<int> fu, fs0, fs1;
        for (const auto& [k, v] : wp.pattern.f_u) fu.push_back(v);
        for (const auto& [k, v] : wp.pattern.f_s0) fs0.push_back(v);
        for (const auto& [k, v] : wp.pattern.f_s1) fs1.push_back(v);
        std::cout << format_vector(fu) << "\t" << format_vector(fs0) << "\t" << format_vector(fs1);
        for (const auto& q : queries) std::cout << "\t" << format_vector(q.indices);
        std::cout << "\t";
        for (std::size_t n = 0; n < queries.size(); ++n)
            std::cout << (n ? "; " : "") << answer_expression(queries[n]);
        std::cout << "\t" << to_string(wp.prob) << "\n";
    }

    if (!cfg.check) return 0;
    auto fixture = fixtures::lookup(params.servers, params.messages, params.side_info,
                                    params.variant);
    if (fixture.empty()) {
        std::cout << "no fixture for (" << params.servers << "," << params.messages << ","
                  << params.side_info << ") " << cfg.variant_text
                  << "; available: (3,3,1) w, (3,3,1) ws, (3,4,1) w, (3,4,1) ws\n";
        return 2;
    }
    std::vector<fixtures::PatternRow> got;
    for (const auto& wp : support) {
        fixtures::PatternRow row;
        for (const auto& [k, v] : wp.pattern.f_u) row.f_u.push_back(v);
        for (const auto& [k, v] : wp.pattern.f_s0) row.f_s0.push_back(v);
        for (const auto& [k, v] : wp.pattern.f_s1) row.f_s1.push_back(v);
        got.push_back(std::move(row));
    }
    std::sort(got.begin(), got.end());
    std::sort(fixture.begin(), fixture.end());
    if (got == fixture) {
        std::cout << "fixture check: OK (" << got.size() << " rows)\n";
        return 0;
    }
    std::cout << "fixture check: FAILED (" << got.size() << " rows enumerated, "
              << fixture.size() << " expected)\n";
    return 1;
}

std::pair<int, int> parse_range(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos) {
        int v = std::stoi(text);
        return {v, v};
    }
    return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
}

int cmd_sweep(const RunConfig& cfg) {
    auto [k_lo, k_hi] = parse_range(cfg.k_range.empty() ? std::to_string(cfg.messages)
                                                        : cfg.k_range);
    if (k_lo > k_hi || k_lo < 2) throw DomainError("bad --k range");
    RunConfig at_lo = cfg;
    at_lo.messages = k_lo;
    SchemeParams base = build_params(at_lo, false);
    std::vector<SchemeParams> grid;
    for (int k = k_lo; k <= k_hi; ++k) {
        SchemeParams p = base;
        p.messages = k;
        p.validate();
        grid.push_back(p);
    }
    log_info("sweep over " + std::to_string(grid.size()) + " grid points");
    auto rows = sweep(grid, cfg.trials, cfg.seed);
    if (cfg.output_path.empty()) {
        write_sweep_csv(std::cout, rows);
    } else {
        std::ofstream out(cfg.output_path, std::ios::binary);
        if (!out) throw DomainError("cannot open output file: " + cfg.output_path);
        write_sweep_csv(out, rows);
        std::cout << "wrote " << rows.size() << " rows to " << cfg.output_path << "\n";
    }
    for (const auto& row : rows)
        if (!row.error.empty())
            std::cerr << "warning: K=" << row.params.messages << ": " << row.error << "\n";
    return 0;
}

int cmd_serve(const RunConfig& cfg) {
    ServerConfig sc = parse_server_config(cfg.config_path);
    StoredDatabase stored = read_database(sc.database_path);
    if (stored.modulus != sc.modulus || stored.db.count() != sc.messages ||
        (stored.db.count() > 0 && stored.db.message(1).length() != sc.subpackets))
        throw DomainError("config does not match database file dimensions");
    TcpServer server(std::move(stored.db), sc.modulus, sc.port);
    std::cout << "listening on port " << server.port() << " (K=" << sc.messages
              << ", L=" << sc.subpackets << ", q=" << sc.modulus << ")\n";
    server.run();
    return 0;
}

int cmd_query(const RunConfig& cfg) {
    auto endpoints = parse_endpoints(cfg.servers_text);
    StoredDatabase stored = read_database(cfg.db_path);

    RunConfig derived = cfg;
    derived.servers = static_cast<int>(endpoints.size());
    derived.messages = stored.db.count();
    derived.modulus = stored.modulus;
    SchemeParams params = build_params(derived, false);
    if (stored.db.count() > 0 && stored.db.message(1).length() != params.subpackets())
        throw DomainError("database sub-packet count must equal N-1");

    RetrievalRequest req;
    req.demand = cfg.demand;
    req.side_info = parse_int_list(cfg.side_text);
    std::sort(req.side_info.begin(), req.side_info.end());
    params.side_info = static_cast<int>(req.side_info.size());
    params.validate();
    req.validate(params);

    std::map<int, Message> side;
    for (int s : req.side_info) side.emplace(s, stored.db.message(s));

    TcpTransport transport(endpoints);
    std::mt19937_64 rng(cfg.seed);
    log_debug("querying " + std::to_string(endpoints.size()) + " servers");
    RetrievalResult result = run_retrieval(params, req, side, transport, rng);
    std::cout << "X_" << req.demand << " =";
    for (Symbol v : result.message.subpackets) std::cout << " " << v;
    std::cout << "\nsymbols downloaded = " << result.downloaded << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    init_log_level();
    CLI::App app{"Leaky private information retrieval with side information"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto add_scheme_flags = [&](CLI::App* sub, bool plain_k = true) {
        sub->add_option("--n", cfg.servers, "number of servers N");
        if (plain_k) sub->add_option("--k", cfg.messages, "number of messages K");
        sub->add_option("--m", cfg.side_info, "side information size M");
        sub->add_option("--t", cfg.t_text, "t = e^{-eps} as an exact rational, e.g. 1/2");
        sub->add_option("--epsilon", cfg.epsilon, "leakage exponent (decimal)")
            ->each([&](const std::string&) { cfg.epsilon_set = true; });
        sub->add_option("--q", cfg.modulus, "prime field size");
        sub->add_option("--variant", cfg.variant_text, "privacy variant: w or ws");
        sub->add_option("--seed", cfg.seed, "RNG seed");
    };

    auto* sim = app.add_subcommand("simulate", "Monte Carlo download cost with decode checks");
    add_scheme_flags(sim);
    sim->add_option("--trials", cfg.trials, "number of retrievals");

    auto* ver = app.add_subcommand("verify", "certify the leakage ratio by exact enumeration");
    add_scheme_flags(ver);
    ver->add_flag("--joint", cfg.joint, "also run the joint (query, answer) oracle");

    auto* tab = app.add_subcommand("table", "print the pattern support for a fixed permutation");
    add_scheme_flags(tab);
    tab->add_option("--pi", cfg.pi_text, "permutation, e.g. 0,1,2");
    tab->add_flag("--check", cfg.check, "compare the support against embedded fixtures");

    auto* swp = app.add_subcommand("sweep", "cost/leakage sweep over K, CSV output");
    add_scheme_flags(swp, false);
    swp->add_option("--k", cfg.k_range, "K or K range as a:b");
    swp->add_option("--trials", cfg.trials, "Monte Carlo trials per grid point");
    swp->add_option("-o,--output", cfg.output_path, "CSV output path (default stdout)");

    auto* srv = app.add_subcommand("serve", "run one TCP answer server");
    srv->add_option("--config", cfg.config_path, "key=value config file")->required();

    auto* qry = app.add_subcommand("query", "one networked retrieval against N endpoints");
    add_scheme_flags(qry);
    qry->add_option("--servers", cfg.servers_text, "endpoints host:port,host:port,...")
        ->required();
    qry->add_option("--w", cfg.demand, "demand index W");
    qry->add_option("--s", cfg.side_text, "side information set, e.g. 2,3");
    qry->add_option("--db", cfg.db_path, "database file supplying the side information")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(cfg);
        if (ver->parsed()) return cmd_verify(cfg);
        if (tab->parsed()) return cmd_table(cfg);
        if (swp->parsed()) return cmd_sweep(cfg);
        if (srv->parsed()) return cmd_serve(cfg);
        if (qry->parsed()) return cmd_query(cfg);
    } catch (const InfeasibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const TransportError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const WireError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const ProtocolViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
