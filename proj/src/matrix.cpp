#include "pmatrix/matrix.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace pmatrix {

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const int r = static_cast<int>(rows.size());
    const int c = r == 0 ? 0 : static_cast<int>(rows.begin()->size());
    Matrix m(r, c);
    int i = 0;
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != c)
            throw std::invalid_argument("Matrix::from_rows: ragged rows");
        int j = 0;
        for (double x : row) m(i, j++) = x;
        ++i;
    }
    return m;
}

bool Matrix::all_finite() const {
    for (double x : entries_)
        if (!std::isfinite(x)) return false;
    return true;
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double x : entries_) m = std::max(m, std::abs(x));
    return m;
}

double Matrix::inf_norm() const {
    double best = 0.0;
    for (int i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (int j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
        best = std::max(best, s);
    }
    return best;
}

SubsetMask SubsetMask::of_indices(std::initializer_list<int> one_based, int n) {
    std::uint64_t bits = 0;
    for (int i : one_based) {
        if (i < 1 || i > n) throw std::invalid_argument("SubsetMask: index out of range");
        bits |= 1ULL << (i - 1);
    }
    return SubsetMask(bits, n);
}

int SubsetMask::cardinality() const { return std::popcount(bits); }

std::vector<int> SubsetMask::indices() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(cardinality()));
    for (int i = 0; i < n; ++i)
        if ((bits >> i) & 1ULL) out.push_back(i);
    return out;
}

std::string SubsetMask::to_string() const {
    std::ostringstream os;
    os << '{';
    bool first = true;
    for (int i : indices()) {
        if (!first) os << ',';
        os << (i + 1);
        first = false;
    }
    os << '}';
    return os.str();
}

void Instance::validate() const {
    if (!m.is_square()) throw std::invalid_argument("Instance: base matrix not square");
    const auto n = static_cast<std::size_t>(m.rows());
    if (u.size() != n || v.size() != n)
        throw std::invalid_argument("Instance: vector length does not match matrix dimension");
    if (!m.all_finite()) throw std::invalid_argument("Instance: non-finite matrix entry");
    for (double x : u)
        if (!std::isfinite(x)) throw std::invalid_argument("Instance: non-finite entry in u");
    for (double x : v)
        if (!std::isfinite(x)) throw std::invalid_argument("Instance: non-finite entry in v");
}

Matrix principal_submatrix(const Matrix& a, const SubsetMask& alpha) {
    alpha.validate();
    if (alpha.n != a.dim())
        throw std::invalid_argument("principal_submatrix: mask dimension mismatch");
    const auto idx = alpha.indices();
    const int k = static_cast<int>(idx.size());
    Matrix sub(k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) sub(i, j) = a(idx[i], idx[j]);
    return sub;
}

namespace {

// In-place LU with partial pivoting on a scratch copy. Returns the sign of
// the row permutation, or 0 if an exact zero pivot was hit (singular).
// Pivot choice: strictly larger magnitude replaces, so the smallest row
// index wins ties.
int lu_factor(std::vector<double>& a, int n) {
    int sign = 1;
    for (int col = 0; col < n; ++col) {
        int pivot_row = col;
        double pivot_mag = std::abs(a[static_cast<std::size_t>(col) * n + col]);
        for (int r = col + 1; r < n; ++r) {
            const double mag = std::abs(a[static_cast<std::size_t>(r) * n + col]);
            if (mag > pivot_mag) {
                pivot_mag = mag;
                pivot_row = r;
            }
        }
        if (pivot_mag == 0.0) return 0;
        if (pivot_row != col) {
            for (int j = 0; j < n; ++j)
                std::swap(a[static_cast<std::size_t>(pivot_row) * n + j],
                          a[static_cast<std::size_t>(col) * n + j]);
            sign = -sign;
        }
        const double pivot = a[static_cast<std::size_t>(col) * n + col];
        for (int r = col + 1; r < n; ++r) {
            const double f = a[static_cast<std::size_t>(r) * n + col] / pivot;
            a[static_cast<std::size_t>(r) * n + col] = f;
            for (int j = col + 1; j < n; ++j)
                a[static_cast<std::size_t>(r) * n + j] -=
                    f * a[static_cast<std::size_t>(col) * n + j];
        }
    }
    return sign;
}

} // namespace

double det(const Matrix& a) {
    const int n = a.dim();
    if (!a.all_finite()) throw std::invalid_argument("det: non-finite entry");
    if (n == 0) return 1.0;
    std::vector<double> work(a.entries().begin(), a.entries().end());
    const int sign = lu_factor(work, n);
    if (sign == 0) return 0.0;
    double d = sign;
    for (int i = 0; i < n; ++i) d *= work[static_cast<std::size_t>(i) * n + i];
    return d;
}

std::vector<double> solve(const Matrix& a, std::span<const double> b) {
    const int n = a.dim();
    if (static_cast<int>(b.size()) != n) throw std::invalid_argument("solve: size mismatch");
    // Factor the augmented system with the same pivoting as det().
    std::vector<double> work(a.entries().begin(), a.entries().end());
    std::vector<double> x(b.begin(), b.end());
    for (int col = 0; col < n; ++col) {
        int pivot_row = col;
        double pivot_mag = std::abs(work[static_cast<std::size_t>(col) * n + col]);
        for (int r = col + 1; r < n; ++r) {
            const double mag = std::abs(work[static_cast<std::size_t>(r) * n + col]);
            if (mag > pivot_mag) {
                pivot_mag = mag;
                pivot_row = r;
            }
        }
        if (pivot_mag == 0.0) throw SingularBlockError("solve: singular matrix");
        if (pivot_row != col) {
            for (int j = 0; j < n; ++j)
                std::swap(work[static_cast<std::size_t>(pivot_row) * n + j],
                          work[static_cast<std::size_t>(col) * n + j]);
            std::swap(x[pivot_row], x[col]);
        }
        const double pivot = work[static_cast<std::size_t>(col) * n + col];
        for (int r = col + 1; r < n; ++r) {
            const double f = work[static_cast<std::size_t>(r) * n + col] / pivot;
            work[static_cast<std::size_t>(r) * n + col] = f;
            x[r] -= f * x[col];
            for (int j = col + 1; j < n; ++j)
                work[static_cast<std::size_t>(r) * n + j] -=
                    f * work[static_cast<std::size_t>(col) * n + j];
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = x[i];
        for (int j = i + 1; j < n; ++j) s -= work[static_cast<std::size_t>(i) * n + j] * x[j];
        x[i] = s / work[static_cast<std::size_t>(i) * n + i];
    }
    return x;
}

Matrix apply_perturbation(const Instance& inst) {
    inst.validate();
    const int n = inst.dim();
    Matrix a = inst.m;
    for (int i = 0; i < n; ++i) {
        if (inst.u[i] == 0.0) continue;
        for (int j = 0; j < n; ++j) a(i, j) += inst.u[i] * inst.v[j];
    }
    return a;
}

double det_lemma_update(double det_ma, std::span<const double> minv_u,
                        std::span<const double> v_alpha, double lambda) {
    if (det_ma == 0.0) throw std::invalid_argument("det_lemma_update: det(M_alpha) must be nonzero");
    if (minv_u.size() != v_alpha.size())
        throw std::invalid_argument("det_lemma_update: vector length mismatch");
    return det_ma * (1.0 + lambda * dot(v_alpha, minv_u));
}

double hadamard_bound(const Matrix& a) {
    double prod = 1.0;
    for (int i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (int j = 0; j < a.cols(); ++j) s += a(i, j) * a(i, j);
        prod *= std::sqrt(s);
    }
    return prod;
}

SchurDetResult schur_det(const Matrix& c, const Matrix& d, const Matrix& e, const Matrix& f) {
    const int k = c.dim();
    const int m = f.dim();
    if (d.rows() != k || d.cols() != m || e.rows() != m || e.cols() != k)
        throw std::invalid_argument("schur_det: block dimensions not conformal");

    const double det_f = det(f);
    if (std::abs(det_f) < 1e-12 * std::max(1.0, hadamard_bound(f)))
        throw SingularBlockError("schur_det: trailing block is singular");

    // S = C - D F^{-1} E, with F^{-1} E solved column by column.
    Matrix schur = c;
    std::vector<double> col(static_cast<std::size_t>(m));
    for (int j = 0; j < k; ++j) {
        for (int i = 0; i < m; ++i) col[static_cast<std::size_t>(i)] = e(i, j);
        const auto x = solve(f, col);
        for (int i = 0; i < k; ++i) {
            double s = 0.0;
            for (int t = 0; t < m; ++t) s += d(i, t) * x[static_cast<std::size_t>(t)];
            schur(i, j) -= s;
        }
    }

    Matrix full(k + m);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) full(i, j) = c(i, j);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < m; ++j) full(i, k + j) = d(i, j);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < k; ++j) full(k + i, j) = e(i, j);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) full(k + i, k + j) = f(i, j);

    return SchurDetResult{det(full), det_f, det(schur)};
}

} // namespace pmatrix
