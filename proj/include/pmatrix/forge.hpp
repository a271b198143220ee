#pragma once

#include <utility>
#include <vector>

#include "pmatrix/matrix.hpp"
#include "pmatrix/minors.hpp"

namespace pmatrix {

struct ForgeConfig {
    double epsilon = 1e-3;       // target violation magnitude at alpha*
    int lambda_search_steps = 64;
    double max_lambda_factor = 1.0; // scan starts at this multiple of the solved lambda0
};

struct ForgeResult {
    Instance instance;     // (M, u, v = lambda * vhat)
    SubsetMask witness;    // the unique violating subset w*
    double witness_value = 0.0;
    double lambda = 0.0;
    SubsetMask alpha_star; // minimizing subset the construction started from
    double f_m = 0.0;      // smallest principal minor of M
};

struct LambdaScanPoint {
    double lambda = 0.0;
    std::uint64_t violation_count = 0; // counted up to 2
};

// No scanned lambda produced a unique violation; carries the observed
// counts so callers can retry with a different epsilon or directions.
class ForgeError : public std::runtime_error {
public:
    ForgeError(const std::string& what, std::vector<LambdaScanPoint> scan)
        : std::runtime_error(what), scan_(std::move(scan)) {}
    const std::vector<LambdaScanPoint>& scan() const { return scan_; }

private:
    std::vector<LambdaScanPoint> scan_;
};

// (alpha*, f_M) by full enumeration; ties broken by smallest mask.
// Throws std::invalid_argument if m is not a P-matrix.
std::pair<SubsetMask, double> find_min_minor(const Matrix& m);

struct Directions {
    std::vector<double> u;     // 1 on alpha*, 0 elsewhere
    std::vector<double> v_hat; // -(M_a^{-1} u_a) on alpha*, 0 elsewhere
    double s = 0.0;            // <vhat_a, M_a^{-1} u_a> = -|M_a^{-1} u_a|^2 < 0
};

Directions choose_directions(const Matrix& m, const SubsetMask& alpha_star);

// Unique positive root of det_ma * (1 + lambda * s) = -epsilon.
double solve_lambda(double det_ma, double s, double epsilon);

// Rank-one construction of a single-violation instance: pick alpha* and
// perturbation directions, solve lambda0 for det(A(lambda0)_{alpha*}) = -eps,
// then search downward for the largest lambda whose violation set is a
// single subset. The first subset to cross zero as lambda grows need not
// be alpha*, so the search floor is the onset of the first violation
// anywhere (located by bisection), not the onset at alpha*.
ForgeResult forge_single_violation(const Matrix& m, const ForgeConfig& cfg = {});

// The 6x6 base matrix and perturbation vectors used throughout the tests:
// a P-matrix whose rank-one perturbation has the unique violating subset
// {1,5} with minor about -0.001.
Instance appendix_b_fixture();

} // namespace pmatrix
