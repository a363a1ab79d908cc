#pragma once

#include <map>
#include <optional>
#include <random>
#include <vector>

#include "lpirsi/core.hpp"
#include "lpirsi/distribution.hpp"

namespace lpirsi {

/// C(x, k) = x(x-1)...(x-k+1)/k! for rational x, as an exact rational product.
Rational generalized_binomial(const Rational& x, int k);

/// One admissible Hamming-weight level of the W-privacy scheme.
struct WeightLevel {
    int k;          // level index
    int ell;        // weight of F_U: min{k(M+1), K-M-1}
    int s0_weight;  // weight of F_S0: k(M+1) - ell, in [0, M]
};

std::vector<WeightLevel> w_weight_levels(const SchemeParams& params);

/// Level law P_k for the W-privacy scheme.
Distribution<int> w_level_distribution(const SchemeParams& params);

/// Level law P_ell for the (W,S)-privacy scheme (M = 1).
Distribution<int> ws_level_distribution(const SchemeParams& params);

/// Conditional law of the F_S^(j) weight s_j in {0, 1} given ell and the
/// server role j (0 = inference, 1 = non-inference). Requires r >= 1.
Distribution<int> ws_side_conditional(int ell, int j, const SchemeParams& params);

RandomPattern sample_pattern_w(const SchemeParams& params, const RetrievalRequest& req,
                               std::mt19937_64& rng);
RandomPattern sample_pattern_ws(const SchemeParams& params, const RetrievalRequest& req,
                                std::mt19937_64& rng);
/// Dispatch on params.variant.
RandomPattern sample_pattern(const SchemeParams& params, const RetrievalRequest& req,
                             std::mt19937_64& rng);

/// One point of the scheme's support together with its exact probability.
struct WeightedPattern {
    RandomPattern pattern;
    Rational prob;
};

/// Full support of the variant's pattern distribution with exact joint
/// probabilities (the 1/N! permutation factor included). When `fixed_pi` is
/// given only realizations with that permutation are produced, still carrying
/// their joint probability. Zero-probability outcomes are dropped.
std::vector<WeightedPattern> enumerate_patterns(const SchemeParams& params,
                                                const RetrievalRequest& req,
                                                const std::vector<int>* fixed_pi = nullptr);

/// Closed-form download costs: the two leaky schemes plus the perfect-privacy
/// baselines they reduce to.
enum class CostModel {
    PIR,          // classic multi-server PIR, no side information, perfect privacy
    PIR_SI_WS,    // perfect (W,S)-privacy with side information
    PIR_SI_W_UB,  // perfect W-privacy upper bound
    L_PIR,        // leaky PIR without side information
    LPIRSI_W,     // this scheme, W-privacy
    LPIRSI_WS,    // this scheme, (W,S)-privacy, M = 1
};

Rational reference_cost(CostModel model, const SchemeParams& params);

/// Upper bound on the leakage exponent attainable at download cost D
/// (positive infinity when D = 1, negative infinity when D = 1 + 1/(N-1)).
double leakage_exponent_bound(Variant variant, double cost, const SchemeParams& params);

}  // namespace lpirsi
