#pragma once

#include <optional>
#include <span>
#include <utility>

#include "pmatrix/oracle.hpp"

namespace pmatrix {

// Information quantities for the hidden-witness search under the uniform
// prior over the K = 2^n - 1 nonempty subsets. Everything is in bits.

// H(W) = log2(2^n - 1).
double prior_entropy_bits(int n);

// Hit probability of the k-th distinct query when the posterior is uniform
// over the remaining candidates: exactly 1 / (K - (k-1)).
double posterior_hit_prob(int n, std::uint64_t k);

// h2(p); h2(0) = h2(1) = 0.
double binary_entropy_bits(double p);

// Chain-rule bound sum_{k=1..q} h2(p_k) on I(W; F_q) for q distinct queries.
double mi_chain_bound_bits(int n, std::uint64_t q);

// Exact I(W; F_q) for q fixed distinct queries: the transcript is all-zero
// with probability (K-q)/K and a distinct one-hot pattern otherwise, so
// I = H(F_q) = -((K-q)/K) log2((K-q)/K) + q (1/K) log2 K.
double mi_exact_nonadaptive_bits(int n, std::uint64_t q);

// Plug-in mutual information over the empirical joint distribution of
// (witness, transcript), transcripts bucketed by exact byte equality.
// The plug-in estimator has a positive, shrinking bias.
struct MiEstimate {
    double bits = 0.0;
    std::size_t samples = 0;
};
MiEstimate mi_estimate_bits(std::span<const std::pair<SubsetMask, Transcript>> samples);

// Fano error lower bound, relaxed form: 1 - (mi + 1)/log2 K, clamped to [0,1].
double fano_error_lower_bound(double mi_bits, std::uint64_t k_candidates);

// Numeric inversion of the exact Fano inequality
// h2(Pe) + Pe log2(K-1) >= log2 K - mi; returns the smallest admissible Pe.
double fano_exact_error_lower_bound(double mi_bits, std::uint64_t k_candidates);

struct AllZeroProbability {
    double exact = 0.0;           // (K - q)/K for q distinct queries
    double hit_union_bound = 0.0; // sum_k p_k, union bound on P(any hit)
};
AllZeroProbability all_zero_probability(int n, std::uint64_t q);

// Total variation distance between the episode-outcome distributions
// induced by two hidden witnesses: an episode ends either in no hit, or in
// a hit at a known position on a known mask. Supported for the exactly
// enumerable strategy families (deterministic sweeps, uniform with and
// without replacement); throws std::invalid_argument otherwise.
double transcript_tv_distance(int n, const Strategy& strategy, std::uint64_t q,
                              const SubsetMask& w, const SubsetMask& w2);

struct InfoReport {
    int n = 0;
    std::uint64_t candidates = 0; // K
    std::uint64_t q = 0;
    double prior_entropy_bits = 0.0;
    std::optional<double> mi_exact_bits;   // non-adaptive distinct-query strategies
    std::optional<double> mi_estimate_bits;
    std::optional<std::size_t> mi_estimate_samples;
    double mi_upper_bound_bits = 0.0;      // chain-rule bound
    double fano_error_lower = 0.0;         // from mi_exact when present, else the bound
    double all_zero_prob_exact = 0.0;
    double all_zero_prob_union_bound = 0.0; // 1 - sum p_k (can be negative: slack visible)
};

InfoReport make_info_report(int n, std::uint64_t q,
                            std::optional<double> mi_exact,
                            std::optional<MiEstimate> estimate);

} // namespace pmatrix
