#include "pmatrix/minors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <thread>

namespace pmatrix {

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::p_matrix: return "p_matrix";
        case Regime::single_violation: return "single_violation";
        case Regime::sparse_violation: return "sparse_violation";
        case Regime::dense_violation: return "dense_violation";
    }
    return "unknown";
}

namespace {

void check_enumerable(const Matrix& a) {
    const int n = a.dim();
    if (n < 1) throw std::invalid_argument("minor enumeration: empty matrix");
    if (n > kMaxEnumDim)
        throw std::invalid_argument("minor enumeration: dimension exceeds the enumeration cap");
    if (!a.all_finite()) throw std::invalid_argument("minor enumeration: non-finite entry");
}

// Determinant of the principal submatrix selected by `mask`, using caller
// scratch to avoid per-subset allocation.
double minor_value(const Matrix& a, std::uint64_t mask, std::vector<double>& scratch,
                   std::vector<int>& idx) {
    idx.clear();
    for (int i = 0; i < a.rows(); ++i)
        if ((mask >> i) & 1ULL) idx.push_back(i);
    const int k = static_cast<int>(idx.size());
    scratch.resize(static_cast<std::size_t>(k) * k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            scratch[static_cast<std::size_t>(i) * k + j] = a(idx[i], idx[j]);

    // Partially pivoted LU, smallest-row-index tie-break (same as det()).
    int sign = 1;
    for (int col = 0; col < k; ++col) {
        int pr = col;
        double pm = std::abs(scratch[static_cast<std::size_t>(col) * k + col]);
        for (int r = col + 1; r < k; ++r) {
            const double m = std::abs(scratch[static_cast<std::size_t>(r) * k + col]);
            if (m > pm) {
                pm = m;
                pr = r;
            }
        }
        if (pm == 0.0) return 0.0;
        if (pr != col) {
            for (int j = 0; j < k; ++j)
                std::swap(scratch[static_cast<std::size_t>(pr) * k + j],
                          scratch[static_cast<std::size_t>(col) * k + j]);
            sign = -sign;
        }
        const double pivot = scratch[static_cast<std::size_t>(col) * k + col];
        for (int r = col + 1; r < k; ++r) {
            const double f = scratch[static_cast<std::size_t>(r) * k + col] / pivot;
            for (int j = col + 1; j < k; ++j)
                scratch[static_cast<std::size_t>(r) * k + j] -=
                    f * scratch[static_cast<std::size_t>(col) * k + j];
        }
    }
    double d = sign;
    for (int i = 0; i < k; ++i) d *= scratch[static_cast<std::size_t>(i) * k + i];
    return d;
}

// True if (value_a, mask_a) precedes (value_b, mask_b) in min-minor order.
bool min_order(double va, std::uint64_t ma, double vb, std::uint64_t mb) {
    if (va != vb) return va < vb;
    return ma < mb;
}

} // namespace

void enumerate_minors(const Matrix& a, const MinorVisitor& visit) {
    check_enumerable(a);
    const int n = a.dim();
    const std::uint64_t end = 1ULL << n;
    std::vector<double> scratch;
    std::vector<int> idx;
    for (std::uint64_t mask = 1; mask < end; ++mask) {
        MinorRecord rec{SubsetMask(mask, n), minor_value(a, mask, scratch, idx)};
        if (!visit(rec)) return;
    }
}

std::vector<MinorRecord> all_minors(const Matrix& a) {
    std::vector<MinorRecord> out;
    out.reserve((1ULL << a.dim()) - 1);
    enumerate_minors(a, [&](const MinorRecord& r) {
        out.push_back(r);
        return true;
    });
    return out;
}

namespace {

// Nested Schur recursion. `work` is the submatrix over the still-active
// original indices `orig`; every subset already committed (prefix_mask) has
// accumulated pivot product prefix_factor. For any S containing the first
// active index t: det(A_{prefix+t+S'}) = prefix_factor * work(0,0) * det(schur_S').
struct FastEnum {
    const Matrix& a;
    const MinorVisitor& visit;
    int n;
    bool stopped = false;
    std::vector<double> scratch;
    std::vector<int> idx_scratch;

    bool emit(std::uint64_t mask, double value) {
        if (!visit(MinorRecord{SubsetMask(mask, n), value})) stopped = true;
        return !stopped;
    }

    // Plain LU enumeration of all subsets containing `prefix_mask | bit(t)`
    // drawn from rest[]; used when the pivot is too small for a stable
    // Schur step.
    void fallback(std::uint64_t base_mask, const std::vector<int>& rest) {
        const int r = static_cast<int>(rest.size());
        const std::uint64_t end = 1ULL << r;
        for (std::uint64_t s = 0; s < end && !stopped; ++s) {
            std::uint64_t mask = base_mask;
            for (int i = 0; i < r; ++i)
                if ((s >> i) & 1ULL) mask |= 1ULL << rest[static_cast<std::size_t>(i)];
            emit(mask, minor_value(a, mask, scratch, idx_scratch));
        }
    }

    void recurse(const Matrix& work, const std::vector<int>& orig, std::uint64_t prefix_mask,
                 double prefix_factor) {
        if (stopped || orig.empty()) return;
        const int k = static_cast<int>(orig.size());
        const int t = orig[0];
        std::vector<int> rest(orig.begin() + 1, orig.end());

        // Exclude t: drop its row and column.
        Matrix without(k - 1);
        for (int i = 1; i < k; ++i)
            for (int j = 1; j < k; ++j) without(i - 1, j - 1) = work(i, j);
        recurse(without, rest, prefix_mask, prefix_factor);
        if (stopped) return;

        // Include t: emit the committed subset, then eliminate t.
        const double pivot = work(0, 0);
        const std::uint64_t with_mask = prefix_mask | (1ULL << t);
        if (std::abs(pivot) < 1e-10 * std::max(1.0, work.max_abs())) {
            fallback(with_mask, rest);
            return;
        }
        if (!emit(with_mask, prefix_factor * pivot)) return;
        Matrix schur(k - 1);
        for (int i = 1; i < k; ++i)
            for (int j = 1; j < k; ++j)
                schur(i - 1, j - 1) = work(i, j) - work(i, 0) * work(0, j) / pivot;
        recurse(schur, rest, with_mask, prefix_factor * pivot);
    }
};

} // namespace

void enumerate_minors_fast(const Matrix& a, const MinorVisitor& visit) {
    check_enumerable(a);
    const int n = a.dim();
    std::vector<int> orig(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) orig[static_cast<std::size_t>(i)] = i;
    FastEnum fe{a, visit, n, false, {}, {}};
    fe.recurse(a, orig, 0, 1.0);
}

std::vector<MinorRecord> all_minors_fast(const Matrix& a) {
    std::vector<MinorRecord> out;
    out.reserve((1ULL << a.dim()) - 1);
    enumerate_minors_fast(a, [&](const MinorRecord& r) {
        out.push_back(r);
        return true;
    });
    std::sort(out.begin(), out.end(),
              [](const MinorRecord& x, const MinorRecord& y) { return x.alpha.bits < y.alpha.bits; });
    return out;
}

ViolationReport violation_set(const Matrix& a, double tau) {
    return violation_set(a, ViolationOptions{.tau = tau});
}

ViolationReport violation_set(const Matrix& a, const ViolationOptions& opts) {
    check_enumerable(a);
    const int n = a.dim();
    const double tau = opts.tau;
    const std::uint64_t end = 1ULL << n;

    ViolationReport report;
    report.n = n;
    report.tau = tau;
    report.total_minors = end - 1;
    report.marginal_threshold = 1e-9 * std::max(1.0, a.inf_norm());

    struct Partial {
        std::vector<MinorRecord> violations;
        double min_value = 0.0;
        std::uint64_t min_mask = 0;
        bool has_min = false;
    };

    if (opts.use_fast) {
        Partial p;
        enumerate_minors_fast(a, [&](const MinorRecord& r) {
            if (r.value <= tau) p.violations.push_back(r);
            if (!p.has_min || min_order(r.value, r.alpha.bits, p.min_value, p.min_mask)) {
                p.min_value = r.value;
                p.min_mask = r.alpha.bits;
                p.has_min = true;
            }
            return true;
        });
        std::sort(p.violations.begin(), p.violations.end(),
                  [](const MinorRecord& x, const MinorRecord& y) {
                      return x.alpha.bits < y.alpha.bits;
                  });
        report.violations = std::move(p.violations);
        report.min_minor = MinorRecord{SubsetMask(p.min_mask, n), p.min_value};
    } else {
        const int hw = static_cast<int>(std::thread::hardware_concurrency());
        const int threads =
            std::clamp(opts.threads <= 0 ? hw : opts.threads, 1,
                       static_cast<int>(std::min<std::uint64_t>(end - 1, 64)));
        std::vector<Partial> partials(static_cast<std::size_t>(threads));

        auto scan = [&](std::uint64_t lo, std::uint64_t hi, Partial& p) {
            std::vector<double> scratch;
            std::vector<int> idx;
            for (std::uint64_t mask = lo; mask < hi; ++mask) {
                const double value = minor_value(a, mask, scratch, idx);
                if (value <= tau) p.violations.push_back(MinorRecord{SubsetMask(mask, n), value});
                if (!p.has_min || min_order(value, mask, p.min_value, p.min_mask)) {
                    p.min_value = value;
                    p.min_mask = mask;
                    p.has_min = true;
                }
            }
        };

        if (threads == 1) {
            scan(1, end, partials[0]);
        } else {
            std::vector<std::thread> pool;
            const std::uint64_t chunk = (end - 1) / threads + 1;
            for (int w = 0; w < threads; ++w) {
                const std::uint64_t lo = 1 + chunk * static_cast<std::uint64_t>(w);
                const std::uint64_t hi = std::min(end, lo + chunk);
                if (lo >= hi) break;
                pool.emplace_back(scan, lo, hi, std::ref(partials[static_cast<std::size_t>(w)]));
            }
            for (auto& t : pool) t.join();
        }

        // Deterministic merge in worker (= mask range) order.
        Partial merged;
        for (auto& p : partials) {
            merged.violations.insert(merged.violations.end(), p.violations.begin(),
                                     p.violations.end());
            if (p.has_min && (!merged.has_min ||
                              min_order(p.min_value, p.min_mask, merged.min_value, merged.min_mask))) {
                merged.min_value = p.min_value;
                merged.min_mask = p.min_mask;
                merged.has_min = true;
            }
        }
        report.violations = std::move(merged.violations);
        report.min_minor = MinorRecord{SubsetMask(merged.min_mask, n), merged.min_value};
    }

    const std::uint64_t count = report.violations.size();
    const std::uint64_t sparse_cap = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n);
    if (count == 0)
        report.regime = Regime::p_matrix;
    else if (count == 1)
        report.regime = Regime::single_violation;
    else if (count <= sparse_cap)
        report.regime = Regime::sparse_violation;
    else
        report.regime = Regime::dense_violation;
    return report;
}

bool is_p_matrix(const Matrix& a, double tau) {
    return count_violations_up_to(a, tau, 1) == 0;
}

std::uint64_t count_violations_up_to(const Matrix& a, double tau, std::uint64_t limit) {
    check_enumerable(a);
    std::uint64_t count = 0;
    enumerate_minors(a, [&](const MinorRecord& r) {
        if (r.value <= tau && ++count >= limit) return false;
        return true;
    });
    return count;
}

std::vector<MinorRecord> neighborhood_minors(const Matrix& a, const SubsetMask& center,
                                             int radius) {
    center.validate();
    const int n = a.dim();
    if (center.n != n) throw std::invalid_argument("neighborhood_minors: mask dimension mismatch");
    if (radius != 1 && radius != 2)
        throw std::invalid_argument("neighborhood_minors: radius must be 1 or 2");

    std::vector<std::uint64_t> masks{center.bits};
    for (int i = 0; i < n; ++i) {
        const std::uint64_t flip = center.bits ^ (1ULL << i);
        if (flip != 0) masks.push_back(flip); // add or remove one index
    }
    if (radius == 2) {
        // Single-index swaps: same cardinality, symmetric difference two.
        for (int out = 0; out < n; ++out) {
            if (!((center.bits >> out) & 1ULL)) continue;
            for (int in = 0; in < n; ++in) {
                if ((center.bits >> in) & 1ULL) continue;
                masks.push_back((center.bits ^ (1ULL << out)) | (1ULL << in));
            }
        }
    }
    std::sort(masks.begin(), masks.end());
    masks.erase(std::unique(masks.begin(), masks.end()), masks.end());
    std::sort(masks.begin(), masks.end(), [](std::uint64_t x, std::uint64_t y) {
        const int cx = std::popcount(x), cy = std::popcount(y);
        if (cx != cy) return cx < cy;
        return x < y;
    });

    std::vector<MinorRecord> out;
    out.reserve(masks.size());
    std::vector<double> scratch;
    std::vector<int> idx;
    for (std::uint64_t m : masks)
        out.push_back(MinorRecord{SubsetMask(m, n), minor_value(a, m, scratch, idx)});
    return out;
}

} // namespace pmatrix
