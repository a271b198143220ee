#include "pmatrix/forge.hpp"

#include <cmath>
#include <limits>

namespace pmatrix {

std::pair<SubsetMask, double> find_min_minor(const Matrix& m) {
    const int n = m.dim();
    bool has_min = false;
    double min_value = 0.0;
    std::uint64_t min_mask = 0;
    bool violated = false;
    enumerate_minors(m, [&](const MinorRecord& r) {
        if (r.value <= 0.0) {
            violated = true;
            return false;
        }
        if (!has_min || r.value < min_value || (r.value == min_value && r.alpha.bits < min_mask)) {
            min_value = r.value;
            min_mask = r.alpha.bits;
            has_min = true;
        }
        return true;
    });
    if (violated) throw std::invalid_argument("find_min_minor: matrix is not a P-matrix");
    return {SubsetMask(min_mask, n), min_value};
}

Directions choose_directions(const Matrix& m, const SubsetMask& alpha_star) {
    const int n = m.dim();
    if (alpha_star.n != n)
        throw std::invalid_argument("choose_directions: mask dimension mismatch");
    const auto idx = alpha_star.indices();
    const Matrix ma = principal_submatrix(m, alpha_star);

    std::vector<double> ones(idx.size(), 1.0);
    const std::vector<double> t = solve(ma, ones); // M_a^{-1} u_a

    Directions d;
    d.u.assign(static_cast<std::size_t>(n), 0.0);
    d.v_hat.assign(static_cast<std::size_t>(n), 0.0);
    double s = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        d.u[static_cast<std::size_t>(idx[i])] = 1.0;
        d.v_hat[static_cast<std::size_t>(idx[i])] = -t[i];
        s -= t[i] * t[i];
    }
    if (s == 0.0)
        throw std::logic_error("choose_directions: degenerate directions (zero solve result)");
    d.s = s;
    return d;
}

double solve_lambda(double det_ma, double s, double epsilon) {
    if (det_ma <= 0.0) throw std::invalid_argument("solve_lambda: det(M_alpha) must be positive");
    if (s >= 0.0) throw std::invalid_argument("solve_lambda: s must be negative");
    if (epsilon < 0.0) throw std::invalid_argument("solve_lambda: epsilon must be nonnegative");
    return (1.0 + epsilon / det_ma) / (-s);
}

namespace {

Matrix perturbed(const Matrix& m, const std::vector<double>& u, const std::vector<double>& v_hat,
                 double lambda) {
    const int n = m.dim();
    Matrix a = m;
    for (int i = 0; i < n; ++i) {
        if (u[static_cast<std::size_t>(i)] == 0.0) continue;
        const double ui = lambda * u[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j) a(i, j) += ui * v_hat[static_cast<std::size_t>(j)];
    }
    return a;
}

} // namespace

ForgeResult forge_single_violation(const Matrix& m, const ForgeConfig& cfg) {
    if (cfg.epsilon <= 0.0) throw std::invalid_argument("forge: epsilon must be positive");
    if (cfg.lambda_search_steps < 1)
        throw std::invalid_argument("forge: lambda_search_steps must be at least 1");
    if (cfg.max_lambda_factor <= 0.0)
        throw std::invalid_argument("forge: max_lambda_factor must be positive");

    auto [alpha_star, f_m] = find_min_minor(m);
    const Directions dirs = choose_directions(m, alpha_star);
    const double lambda0 = solve_lambda(f_m, dirs.s, cfg.epsilon);
    const double lambda_start = cfg.max_lambda_factor * lambda0;

    auto count_at = [&](double lambda, std::uint64_t limit) {
        return count_violations_up_to(perturbed(m, dirs.u, dirs.v_hat, lambda), 0.0, limit);
    };

    std::vector<LambdaScanPoint> scan;
    auto fail = [&](const char* why) -> ForgeError {
        return ForgeError(std::string("forge: ") + why, scan);
    };

    if (count_at(lambda_start, 1) == 0) {
        scan.push_back({lambda_start, 0});
        throw fail("no violation at the top of the scan range");
    }

    // Bisect for the onset of the first violation anywhere. Below `lo`
    // the matrix is still a P-matrix, at `hi` something has crossed.
    double lo = 0.0;
    double hi = lambda_start;
    for (int it = 0; it < 200 && (hi - lo) > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (count_at(mid, 1) == 0)
            lo = mid;
        else
            hi = mid;
    }
    const double lambda_floor = lo;

    auto finish = [&](double lambda) {
        const Matrix a = perturbed(m, dirs.u, dirs.v_hat, lambda);
        const ViolationReport report = violation_set(a, 0.0);
        if (report.regime != Regime::single_violation)
            throw std::logic_error("forge: verification disagreed with the scan");
        ForgeResult result;
        result.instance.m = m;
        result.instance.u = dirs.u;
        result.instance.v.assign(dirs.v_hat.size(), 0.0);
        for (std::size_t i = 0; i < dirs.v_hat.size(); ++i)
            result.instance.v[i] = lambda * dirs.v_hat[i];
        result.witness = report.violations[0].alpha;
        result.witness_value = report.violations[0].value;
        result.lambda = lambda;
        result.alpha_star = alpha_star;
        result.f_m = f_m;
        return result;
    };

    // Geometric scan from lambda_start down toward the onset; the first
    // single-violation point (largest lambda, deepest violation) wins.
    const int steps = cfg.lambda_search_steps;
    const double ratio = lambda_floor > 0.0 ? lambda_floor / lambda_start : 1e-6;
    for (int k = 0; k < steps; ++k) {
        const double lambda = lambda_start * std::pow(ratio, static_cast<double>(k) / steps);
        if (lambda <= lambda_floor) break;
        const std::uint64_t count = count_at(lambda, 2);
        scan.push_back({lambda, count});
        if (count == 1) return finish(lambda);
    }

    // The grid skipped past the single-violation window; probe just above
    // the onset, where only the first crosser can be negative.
    const std::uint64_t count_hi = count_at(hi, 2);
    scan.push_back({hi, count_hi});
    if (count_hi == 1) return finish(hi);

    throw fail("no scanned lambda yields a unique violation");
}

Instance appendix_b_fixture() {
    Instance inst;
    inst.m = Matrix::from_rows({
        {2.3, -4.8, -1.9, 0.0, 0.0, 1.3},
        {2.6, 3.4, 3.8, 0.0, 0.0, 2.6},
        {-2.6, 4.8, 6.7, -1.1, 1.3, -1.3},
        {1.3, 2.4, -3.8, 5.4, 0.0, -1.3},
        {-2.6, 4.8, 0.0, -1.1, 4.9, -1.3},
        {0.0, -4.8, -1.9, 0.0, -2.6, 7.5},
    });
    inst.u = {0.25, 0.0, 0.0, 0.0, 2.0, 0.0};
    inst.v = {-1.740695, 0.0, 0.0, 0.0, -1.740695, 0.0};
    return inst;
}

} // namespace pmatrix
