#pragma once

#include <array>
#include <span>
#include <vector>

#include "pmatrix/matrix.hpp"

namespace pmatrix {

// Random matrix ensembles for the conditional-sign study.
//   iid_uniform:     entries i.i.d. uniform on [-1, 1]
//   shifted_pmatrix: diagonally dominant positive-diagonal base plus a
//                    rank-one shift scaled to straddle the P-matrix boundary
enum class EnsembleKind { iid_uniform, shifted_pmatrix };

const char* ensemble_name(EnsembleKind k);
EnsembleKind ensemble_by_name(std::string_view name);

struct EnsembleConfig {
    int n = 6;
    EnsembleKind kind = EnsembleKind::iid_uniform;
    std::uint64_t samples = 10000;
    std::uint64_t seed = 0;
};

// One matrix draw; sample index maps to an rng substream so tabulation is
// order-independent.
Matrix sample_ensemble(const EnsembleConfig& cfg, std::uint64_t index);

// Max relative deviation of det(A) from det(F) * det(C - D F^{-1} E) over
// random matrices with random block splits. Draws whose trailing block is
// near-singular are skipped and redrawn (the identity is about
// well-conditioned blocks, not numerical blow-ups).
double verify_schur_identity(std::uint64_t samples, int n, std::uint64_t seed);

// Canonical overlapping-pair layouts for dimension n >= 4.
enum class OverlapPattern { disjoint, overlap_one, overlap_all_but_one, containment };

const char* overlap_name(OverlapPattern p);
std::pair<SubsetMask, SubsetMask> overlap_pair(OverlapPattern p, int n);

// Joint sign statistics of (det A_alpha, det A_beta) over an ensemble.
// Index 0 = positive minor, 1 = nonpositive.
struct PairSignTable {
    SubsetMask alpha;
    SubsetMask beta;
    int overlap = 0;
    std::array<std::array<std::uint64_t, 2>, 2> counts{}; // [sign_a][sign_b]
    std::array<std::array<double, 2>, 2> cond_b_given_a{};
    double mi_bits = 0.0; // mutual information of the sign pair

    std::uint64_t total() const {
        return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
    }
};

struct ConditionalSignReport {
    EnsembleConfig config;
    std::vector<PairSignTable> pairs;
};

ConditionalSignReport conditional_sign_study(const EnsembleConfig& cfg, OverlapPattern pattern);
ConditionalSignReport conditional_sign_study(
    const EnsembleConfig& cfg, std::span<const std::pair<SubsetMask, SubsetMask>> pairs);

} // namespace pmatrix
