#include "pmatrix/schurlab.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pmatrix/minors.hpp"
#include "pmatrix/rng.hpp"

namespace pmatrix {

const char* ensemble_name(EnsembleKind k) {
    switch (k) {
        case EnsembleKind::iid_uniform: return "iid_uniform";
        case EnsembleKind::shifted_pmatrix: return "shifted_pmatrix";
    }
    return "unknown";
}

EnsembleKind ensemble_by_name(std::string_view name) {
    if (name == "iid_uniform") return EnsembleKind::iid_uniform;
    if (name == "shifted_pmatrix") return EnsembleKind::shifted_pmatrix;
    throw std::invalid_argument("unknown ensemble: " + std::string(name));
}

namespace {

Matrix iid_uniform_matrix(int n, rng::Engine& rng) {
    Matrix a(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = rng.next_double(-1.0, 1.0);
    return a;
}

// Strictly diagonally dominant with positive diagonal, hence a P-matrix.
Matrix dominant_pmatrix(int n, rng::Engine& rng) {
    Matrix a(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) a(i, j) = rng.next_double(-1.0, 1.0);
    for (int i = 0; i < n; ++i) {
        double off = 0.0;
        for (int j = 0; j < n; ++j)
            if (j != i) off += std::abs(a(i, j));
        a(i, i) = off + rng.next_double(0.1, 1.1);
    }
    return a;
}

Matrix rank_one_shift(const Matrix& base, const std::vector<double>& u,
                      const std::vector<double>& v, double t) {
    const int n = base.dim();
    Matrix a = base;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            a(i, j) += t * u[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(j)];
    return a;
}

// Base P-matrix plus a rank-one shift whose magnitude is drawn around the
// P-boundary, so samples fall on both sides of it.
Matrix shifted_pmatrix_matrix(int n, rng::Engine& rng) {
    for (int attempt = 0; attempt < 16; ++attempt) {
        const Matrix base = dominant_pmatrix(n, rng);
        std::vector<double> u(static_cast<std::size_t>(n)), v(static_cast<std::size_t>(n));
        for (auto& x : u) x = rng.next_double(-1.0, 1.0);
        for (auto& x : v) x = rng.next_double(-1.0, 1.0);

        // Grow t until the P-property breaks, then bisect the boundary.
        double hi = 1.0;
        bool broke = false;
        for (int g = 0; g < 24; ++g) {
            if (!is_p_matrix(rank_one_shift(base, u, v, hi))) {
                broke = true;
                break;
            }
            hi *= 2.0;
        }
        if (!broke) continue; // this direction never crosses; redraw
        double lo = 0.0;
        for (int it = 0; it < 40; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (is_p_matrix(rank_one_shift(base, u, v, mid)))
                lo = mid;
            else
                hi = mid;
        }
        const double boundary = 0.5 * (lo + hi);
        return rank_one_shift(base, u, v, boundary * rng.next_double(0.8, 1.2));
    }
    throw std::runtime_error("shifted_pmatrix: could not reach the P-boundary");
}

} // namespace

Matrix sample_ensemble(const EnsembleConfig& cfg, std::uint64_t index) {
    rng::Engine rng(rng::substream_seed(cfg.seed, index));
    switch (cfg.kind) {
        case EnsembleKind::iid_uniform: return iid_uniform_matrix(cfg.n, rng);
        case EnsembleKind::shifted_pmatrix: return shifted_pmatrix_matrix(cfg.n, rng);
    }
    throw std::logic_error("sample_ensemble: unknown ensemble");
}

double verify_schur_identity(std::uint64_t samples, int n, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("verify_schur_identity: n must be at least 2");
    double max_rel = 0.0;
    std::uint64_t accepted = 0;
    for (std::uint64_t index = 0; accepted < samples; ++index) {
        rng::Engine rng(rng::substream_seed(seed, index));
        const Matrix a = iid_uniform_matrix(n, rng);
        const int k = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n - 1)));
        const int m = n - k;

        Matrix c(k), d(k, m), e(m, k), f(m);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) c(i, j) = a(i, j);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < m; ++j) d(i, j) = a(i, k + j);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < k; ++j) e(i, j) = a(k + i, j);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) f(i, j) = a(k + i, k + j);

        // Skip ill-conditioned trailing blocks; redraw instead.
        if (std::abs(det(f)) < 1e-6 * std::max(1.0, hadamard_bound(f))) continue;
        const SchurDetResult r = schur_det(c, d, e, f);
        const double rel =
            std::abs(r.det_full - r.det_f * r.det_schur) / std::max(1.0, std::abs(r.det_full));
        max_rel = std::max(max_rel, rel);
        ++accepted;
    }
    return max_rel;
}

const char* overlap_name(OverlapPattern p) {
    switch (p) {
        case OverlapPattern::disjoint: return "disjoint";
        case OverlapPattern::overlap_one: return "overlap_one";
        case OverlapPattern::overlap_all_but_one: return "overlap_all_but_one";
        case OverlapPattern::containment: return "containment";
    }
    return "unknown";
}

std::pair<SubsetMask, SubsetMask> overlap_pair(OverlapPattern p, int n) {
    if (n < 4) throw std::invalid_argument("overlap_pair: need dimension at least 4");
    switch (p) {
        case OverlapPattern::disjoint:
            return {SubsetMask::of_indices({1, 2}, n), SubsetMask::of_indices({3, 4}, n)};
        case OverlapPattern::overlap_one:
            return {SubsetMask::of_indices({1, 2}, n), SubsetMask::of_indices({2, 3}, n)};
        case OverlapPattern::overlap_all_but_one:
            return {SubsetMask::of_indices({1, 2, 3}, n), SubsetMask::of_indices({2, 3, 4}, n)};
        case OverlapPattern::containment:
            return {SubsetMask::of_indices({1, 2}, n), SubsetMask::of_indices({1, 2, 3}, n)};
    }
    throw std::logic_error("overlap_pair: unknown pattern");
}

ConditionalSignReport conditional_sign_study(const EnsembleConfig& cfg, OverlapPattern pattern) {
    const auto pair = overlap_pair(pattern, cfg.n);
    return conditional_sign_study(cfg, std::span(&pair, 1));
}

ConditionalSignReport conditional_sign_study(
    const EnsembleConfig& cfg, std::span<const std::pair<SubsetMask, SubsetMask>> pairs) {
    if (cfg.samples < 1) throw std::invalid_argument("conditional_sign_study: samples must be >= 1");
    if (pairs.empty()) throw std::invalid_argument("conditional_sign_study: no pairs given");
    for (const auto& [alpha, beta] : pairs) {
        alpha.validate();
        beta.validate();
        if (alpha.n != cfg.n || beta.n != cfg.n)
            throw std::invalid_argument("conditional_sign_study: mask dimension mismatch");
        if (alpha.bits == beta.bits)
            throw std::invalid_argument("conditional_sign_study: degenerate pair (alpha == beta)");
    }

    ConditionalSignReport report;
    report.config = cfg;
    report.pairs.resize(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        report.pairs[i].alpha = pairs[i].first;
        report.pairs[i].beta = pairs[i].second;
        report.pairs[i].overlap = std::popcount(pairs[i].first.bits & pairs[i].second.bits);
    }

    for (std::uint64_t s = 0; s < cfg.samples; ++s) {
        const Matrix a = sample_ensemble(cfg, s);
        for (auto& table : report.pairs) {
            const int sa = det(principal_submatrix(a, table.alpha)) > 0.0 ? 0 : 1;
            const int sb = det(principal_submatrix(a, table.beta)) > 0.0 ? 0 : 1;
            ++table.counts[sa][sb];
        }
    }

    for (auto& table : report.pairs) {
        const double total = static_cast<double>(table.total());
        for (int i = 0; i < 2; ++i) {
            const double row = static_cast<double>(table.counts[i][0] + table.counts[i][1]);
            for (int j = 0; j < 2; ++j)
                table.cond_b_given_a[i][j] =
                    row > 0.0 ? static_cast<double>(table.counts[i][j]) / row : 0.0;
        }
        double mi = 0.0;
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                const double p = static_cast<double>(table.counts[i][j]) / total;
                if (p <= 0.0) continue;
                const double pa =
                    static_cast<double>(table.counts[i][0] + table.counts[i][1]) / total;
                const double pb =
                    static_cast<double>(table.counts[0][j] + table.counts[1][j]) / total;
                mi += p * std::log2(p / (pa * pb));
            }
        }
        table.mi_bits = std::max(mi, 0.0);
    }
    return report;
}

} // namespace pmatrix
