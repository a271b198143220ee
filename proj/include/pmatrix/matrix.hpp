#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmatrix {

// Dense row-major real matrix. Storage is rectangular so that the
// off-diagonal blocks of a 2x2 block partition fit in the same type;
// every operation that is defined for square matrices only says so.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols)
        : rows_(rows), cols_(cols), entries_(static_cast<std::size_t>(rows) * cols, 0.0) {
        if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative dimension");
    }
    explicit Matrix(int n) : Matrix(n, n) {}

    static Matrix identity(int n) {
        Matrix m(n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool is_square() const { return rows_ == cols_; }

    // Dimension of a square matrix.
    int dim() const {
        if (!is_square()) throw std::logic_error("Matrix::dim: matrix is not square");
        return rows_;
    }

    double& operator()(int i, int j) { return entries_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const {
        return entries_[static_cast<std::size_t>(i) * cols_ + j];
    }

    std::span<const double> entries() const { return entries_; }
    std::span<double> entries() { return entries_; }

    bool all_finite() const;
    double max_abs() const;
    // Max absolute row sum.
    double inf_norm() const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> entries_;
};

// Nonempty subset of {1..n} stored as a bitmask; bit i-1 encodes index i.
// Indexes principal minors and candidate witnesses.
struct SubsetMask {
    std::uint64_t bits = 0;
    int n = 0;

    SubsetMask() = default;
    SubsetMask(std::uint64_t bits_, int n_) : bits(bits_), n(n_) { validate(); }

    static SubsetMask of_indices(std::initializer_list<int> one_based, int n);
    static SubsetMask full(int n) { return SubsetMask((n >= 64 ? ~0ULL : (1ULL << n) - 1), n); }

    void validate() const {
        if (n < 1 || n > 63) throw std::invalid_argument("SubsetMask: dimension out of range");
        if (bits == 0) throw std::invalid_argument("SubsetMask: empty subset");
        if (bits >= (1ULL << n)) throw std::invalid_argument("SubsetMask: bits exceed dimension");
    }

    int cardinality() const;
    bool contains(int one_based) const { return (bits >> (one_based - 1)) & 1ULL; }
    // Zero-based member indices, ascending.
    std::vector<int> indices() const;
    // Paper-style rendering, 1-indexed ascending: "{1,5}".
    std::string to_string() const;

    friend bool operator==(const SubsetMask& a, const SubsetMask& b) {
        return a.bits == b.bits && a.n == b.n;
    }
};

// A rank-one perturbation instance: base matrix plus the two vectors of
// the outer-product update. The base is expected to be a P-matrix, but
// checking that costs a full minor enumeration and is done on demand.
struct Instance {
    Matrix m;
    std::vector<double> u;
    std::vector<double> v;

    int dim() const { return m.dim(); }
    // Structural invariants: square, finite, consistent lengths.
    void validate() const;
};

// Thrown by schur_det when the trailing block is (numerically) singular.
class SingularBlockError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Rows and columns indexed by alpha, ascending index order.
Matrix principal_submatrix(const Matrix& a, const SubsetMask& alpha);

// Determinant via partially pivoted LU. Pivot: largest magnitude, ties
// broken by smallest row index, so results are bit-stable across runs.
double det(const Matrix& a);

// Solve a x = b for square a. Throws SingularBlockError on a zero pivot.
std::vector<double> solve(const Matrix& a, std::span<const double> b);

// M + u v^T.
Matrix apply_perturbation(const Instance& inst);

// Matrix determinant lemma specialised to the scaled rank-one update:
// det(M_a + lambda u_a vhat_a^T) = det(M_a) * (1 + lambda <vhat_a, M_a^{-1} u_a>).
double det_lemma_update(double det_ma, std::span<const double> minv_u,
                        std::span<const double> v_alpha, double lambda);

struct SchurDetResult {
    double det_full;  // det of the assembled [[C,D],[E,F]]
    double det_f;
    double det_schur; // det(C - D F^{-1} E)
};

// Block determinant identity det(A) = det(F) det(C - D F^{-1} E).
// F with |det F| below 1e-12 * max(1, Hadamard bound) is rejected as singular.
SchurDetResult schur_det(const Matrix& c, const Matrix& d, const Matrix& e, const Matrix& f);

// Product of row 2-norms; scale reference for singularity thresholds.
double hadamard_bound(const Matrix& a);

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace pmatrix
