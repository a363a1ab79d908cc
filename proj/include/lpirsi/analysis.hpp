#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "lpirsi/core.hpp"
#include "lpirsi/schemes.hpp"

namespace lpirsi {

/// Exact law of the query observed at one server: query vector -> probability.
using QueryLaw = std::map<std::vector<int>, Rational>;

struct LeakageWitness {
    int server = 0;
    std::vector<int> query;
    RetrievalRequest first, second;
};

struct LeakageReport {
    Rational max_ratio = 1;
    bool unbounded = false;  // a query had probability 0 under one hypothesis
    bool certified = false;  // max_ratio <= 1/t and bounded
    LeakageWitness witness;
    std::vector<Rational> ratios;  // distinct realized ratios, sorted
};

/// Law of the query at `server` (1-based) under fixed (W, S), by summing the
/// scheme's pattern support with exact probabilities.
QueryLaw enumerate_query_law(const SchemeParams& params, const RetrievalRequest& req, int server);

/// Certify the leakage ratio by exact enumeration. W variant: ratios of
/// Pr[q | W] with S marginalized uniformly; WS variant: ratios of
/// Pr[q | W, S] across all (W, S) pairs.
LeakageReport max_leakage_ratio(const SchemeParams& params);

/// Brute-force check of the joint (query, answer) privacy condition over all
/// databases of a small field, independent of the query-marginal path.
LeakageReport joint_leakage_oracle(const SchemeParams& params, Symbol small_modulus);

/// 1 + (1 - P_empty)/(N - 1), exact.
Rational exact_download_cost(const SchemeParams& params);

struct CostEstimate {
    double mean = 0;
    double stderr_mean = 0;
    long trials = 0;
};

/// Monte Carlo over full in-process retrievals with per-trial decode check.
CostEstimate estimate_download_cost(const SchemeParams& params, long trials, std::uint64_t seed);

struct SweepRow {
    SchemeParams params;
    Rational exact_cost = 0;
    double measured_cost = 0;
    Rational max_leakage = 0;
    double exponent_bound = 0;
    std::string error;  // empty on success
};

std::vector<SweepRow> sweep(const std::vector<SchemeParams>& grid, long trials, std::uint64_t seed);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace lpirsi
