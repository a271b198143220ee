#pragma once

#include <functional>
#include <vector>

#include "pmatrix/matrix.hpp"

namespace pmatrix {

// Full principal-minor enumeration is O(2^n); this is the largest dimension
// we are willing to enumerate.
inline constexpr int kMaxEnumDim = 26;

struct MinorRecord {
    SubsetMask alpha;
    double value = 0.0;
};

enum class Regime { p_matrix, single_violation, sparse_violation, dense_violation };

const char* regime_name(Regime r);

// The violation set V(A) = { alpha : det(A_alpha) <= tau }, together with
// the global minimum minor and a regime label:
//   p_matrix          -> no violations
//   single_violation  -> exactly one
//   sparse_violation  -> between 2 and n^2
//   dense_violation   -> more than n^2
struct ViolationReport {
    int n = 0;
    double tau = 0.0;
    std::uint64_t total_minors = 0;
    std::vector<MinorRecord> violations; // ascending mask order
    MinorRecord min_minor;               // ties broken by smallest mask
    Regime regime = Regime::p_matrix;
    // Records with |value| below this are sign-marginal at double precision;
    // scale is 1e-9 * max(1, inf-norm of A).
    double marginal_threshold = 0.0;

    bool is_marginal(const MinorRecord& r) const {
        return std::abs(r.value) < marginal_threshold;
    }
};

using MinorVisitor = std::function<bool(const MinorRecord&)>; // return false to stop

// Yields all 2^n - 1 principal minors in ascending mask order, one LU
// factorization per subset. This is the correctness baseline every other
// enumeration path is checked against.
void enumerate_minors(const Matrix& a, const MinorVisitor& visit);

// Same multiset of records, computed by a nested Schur-complement recursion
// that shares elimination work across subsets sharing a prefix. Emission
// order is not the mask order; callers needing order must sort.
// Falls back to per-subset LU below a branch whose pivot is too small.
void enumerate_minors_fast(const Matrix& a, const MinorVisitor& visit);

std::vector<MinorRecord> all_minors(const Matrix& a);
std::vector<MinorRecord> all_minors_fast(const Matrix& a); // sorted by mask

struct ViolationOptions {
    double tau = 0.0;
    int threads = 1;       // naive path only; report is identical for any count
    bool use_fast = false; // single-threaded optimized enumerator
};

ViolationReport violation_set(const Matrix& a, double tau);
ViolationReport violation_set(const Matrix& a, const ViolationOptions& opts);

// True iff no principal minor is <= tau; stops at the first violation.
bool is_p_matrix(const Matrix& a, double tau = 0.0);

// Number of violations, counting at most `limit` before stopping.
std::uint64_t count_violations_up_to(const Matrix& a, double tau, std::uint64_t limit);

// Minors of the subsets near `center`: the center itself, all single-index
// additions and removals (radius 1) and, at radius 2, single-index swaps.
// Sorted ascending by (cardinality, mask). For a 2-element center in a 6x6
// matrix, radius 2 yields the 15-subset neighborhood.
std::vector<MinorRecord> neighborhood_minors(const Matrix& a, const SubsetMask& center,
                                             int radius);

} // namespace pmatrix
