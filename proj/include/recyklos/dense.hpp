#ifndef RECYKLOS_DENSE_HPP
#define RECYKLOS_DENSE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "recyklos/errors.hpp"
#include "recyklos/vec.hpp"

namespace recyklos {

/// Small dense matrix, row-major. All projected subproblems reduce to these.
struct DenseMatrix {
    std::size_t nrows = 0;
    std::size_t ncols = 0;
    std::vector<double> entries; // row-major, nrows*ncols

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c) : nrows(r), ncols(c), entries(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return entries[i * ncols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return entries[i * ncols + j]; }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static DenseMatrix from_columns(const std::vector<Vector>& cols) {
        if (cols.empty()) return DenseMatrix(0, 0);
        DenseMatrix m(cols[0].size(), cols.size());
        for (std::size_t j = 0; j < cols.size(); ++j)
            for (std::size_t i = 0; i < m.nrows; ++i) m(i, j) = cols[j][i];
        return m;
    }

    Vector col(std::size_t j) const {
        Vector c(nrows);
        for (std::size_t i = 0; i < nrows; ++i) c[i] = (*this)(i, j);
        return c;
    }

    std::vector<Vector> columns() const {
        std::vector<Vector> cs(ncols);
        for (std::size_t j = 0; j < ncols; ++j) cs[j] = col(j);
        return cs;
    }

    bool finite() const { return all_finite(entries); }

    double frob_norm() const { return norm2(entries); }

    DenseMatrix transposed() const {
        DenseMatrix t(ncols, nrows);
        for (std::size_t i = 0; i < nrows; ++i)
            for (std::size_t j = 0; j < ncols; ++j) t(j, i) = (*this)(i, j);
        return t;
    }
};

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix c(a.nrows, b.ncols);
    for (std::size_t i = 0; i < a.nrows; ++i)
        for (std::size_t l = 0; l < a.ncols; ++l) {
            const double ail = a(i, l);
            if (ail == 0.0) continue;
            for (std::size_t j = 0; j < b.ncols; ++j) c(i, j) += ail * b(l, j);
        }
    return c;
}

inline Vector matvec(const DenseMatrix& a, const Vector& x) {
    Vector y(a.nrows, 0.0);
    for (std::size_t i = 0; i < a.nrows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.ncols; ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

inline Vector matvec_t(const DenseMatrix& a, const Vector& x) {
    Vector y(a.ncols, 0.0);
    for (std::size_t i = 0; i < a.nrows; ++i)
        for (std::size_t j = 0; j < a.ncols; ++j) y[j] += a(i, j) * x[i];
    return y;
}

namespace detail {

inline Eigen::MatrixXd to_eigen(const DenseMatrix& m) {
    Eigen::MatrixXd e(m.nrows, m.ncols);
    for (std::size_t i = 0; i < m.nrows; ++i)
        for (std::size_t j = 0; j < m.ncols; ++j) e(i, j) = m(i, j);
    return e;
}

inline DenseMatrix from_eigen(const Eigen::MatrixXd& e) {
    DenseMatrix m(e.rows(), e.cols());
    for (Eigen::Index i = 0; i < e.rows(); ++i)
        for (Eigen::Index j = 0; j < e.cols(); ++j) m(i, j) = e(i, j);
    return m;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Thin QR with rank-revealing column drop
// ---------------------------------------------------------------------------

struct ThinQr {
    DenseMatrix Q;                        // n x r, orthonormal columns
    DenseMatrix R;                        // r x k, staircase upper-triangular
    std::size_t rank = 0;                 // r
    std::vector<std::size_t> pivot_cols;  // input columns that produced a Q column
};

/// Householder QR of an n x k matrix. Columns whose remaining component
/// (the would-be |R_ii|) is <= rank_tol * |R_11| contribute no Q column and
/// are recorded only in the rows of R built so far, so rank < k is possible.
inline ThinQr thin_qr(const DenseMatrix& m, double rank_tol) {
    if (m.nrows < 1 || m.ncols < 1) throw InvalidInput("thin_qr: empty matrix");
    if (!m.finite()) throw InvalidInput("thin_qr: non-finite entries");
    if (rank_tol < 0) throw InvalidInput("thin_qr: negative rank_tol");

    const std::size_t n = m.nrows, k = m.ncols;
    std::vector<Vector> reflectors; // Householder vectors, each length n - r
    ThinQr out;
    std::vector<Vector> rcols; // column j of R (length = rank at acceptance time, or current rank)
    double pivot_ref = -1.0;   // |R_11|

    for (std::size_t j = 0; j < k; ++j) {
        Vector x = m.col(j);
        // apply accepted reflectors in order
        for (std::size_t t = 0; t < reflectors.size(); ++t) {
            const Vector& v = reflectors[t];
            double s = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * x[t + i];
            s *= 2.0;
            for (std::size_t i = 0; i < v.size(); ++i) x[t + i] -= s * v[i];
        }
        const std::size_t r = reflectors.size();
        double tail = 0.0;
        for (std::size_t i = r; i < n; ++i) tail += x[i] * x[i];
        tail = std::sqrt(tail);

        if (pivot_ref < 0.0) pivot_ref = tail; // first column sets the scale
        const bool drop = (r >= n) || tail <= rank_tol * pivot_ref || tail == 0.0;

        Vector rc(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(r));
        if (!drop) {
            double alpha = (x[r] >= 0.0) ? -tail : tail;
            Vector v(n - r, 0.0);
            v[0] = x[r] - alpha;
            for (std::size_t i = r + 1; i < n; ++i) v[i - r] = x[i];
            double vn = norm2(v);
            if (vn > 0) scale(v, 1.0 / vn);
            reflectors.push_back(std::move(v));
            rc.push_back(alpha);
            out.pivot_cols.push_back(j);
        }
        rcols.push_back(std::move(rc));
    }

    const std::size_t r = reflectors.size();
    out.rank = r;
    out.R = DenseMatrix(r, k);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < rcols[j].size(); ++i) out.R(i, j) = rcols[j][i];

    // Q = (H_1 ... H_r) [e_1 .. e_r]
    out.Q = DenseMatrix(n, r);
    for (std::size_t c = 0; c < r; ++c) {
        Vector q = unit(n, c);
        for (std::size_t t = reflectors.size(); t-- > 0;) {
            const Vector& v = reflectors[t];
            double s = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * q[t + i];
            s *= 2.0;
            for (std::size_t i = 0; i < v.size(); ++i) q[t + i] -= s * v[i];
        }
        for (std::size_t i = 0; i < n; ++i) out.Q(i, c) = q[i];
    }

    // normalize diagonal signs to positive
    for (std::size_t c = 0; c < r; ++c) {
        const std::size_t pj = out.pivot_cols[c];
        if (out.R(c, pj) < 0.0) {
            for (std::size_t j = 0; j < k; ++j) out.R(c, j) = -out.R(c, j);
            for (std::size_t i = 0; i < n; ++i) out.Q(i, c) = -out.Q(i, c);
        }
    }
    return out;
}

/// Solve R_piv * y = rhs where R_piv is the square upper-triangular submatrix
/// of a ThinQr's R over its pivot columns. Used to renormalize bases after
/// rank drops (U <- U_piv * R_piv^{-1}).
inline Vector qr_pivot_backsolve(const ThinQr& qr, const Vector& rhs) {
    const std::size_t r = qr.rank;
    Vector y(rhs);
    for (std::size_t i = r; i-- > 0;) {
        for (std::size_t l = i + 1; l < r; ++l) y[i] -= qr.R(i, qr.pivot_cols[l]) * y[l];
        y[i] /= qr.R(i, qr.pivot_cols[i]);
    }
    return y;
}

// ---------------------------------------------------------------------------
// Hessenberg least squares via Givens rotations
// ---------------------------------------------------------------------------

/// Incremental Givens-rotation least squares for an upper-Hessenberg system
/// ||H y - rhs||. Columns are appended one at a time (column l has l+2
/// potentially nonzero entries), as in a GMRES/MINRES iteration; total cost
/// after j columns is O(j^2).
class GivensLs {
  public:
    explicit GivensLs(Vector rhs) : g_(std::move(rhs)) {}

    /// col holds entries H(0..l+1, l) where l is the current column count.
    void add_column(Vector col) {
        const std::size_t l = rcols_.size();
        // previous rotations
        for (std::size_t i = 0; i < l; ++i) {
            const double t1 = cs_[i] * col[i] + sn_[i] * col[i + 1];
            const double t2 = -sn_[i] * col[i] + cs_[i] * col[i + 1];
            col[i] = t1;
            col[i + 1] = t2;
        }
        // new rotation annihilating the subdiagonal
        double a = col[l], b = col[l + 1];
        double c, s;
        const double rho = std::hypot(a, b);
        if (rho == 0.0) {
            c = 1.0;
            s = 0.0;
        } else {
            c = a / rho;
            s = b / rho;
        }
        cs_.push_back(c);
        sn_.push_back(s);
        col[l] = rho;
        col[l + 1] = 0.0;
        if (g_.size() < l + 2) g_.push_back(0.0);
        const double t1 = c * g_[l] + s * g_[l + 1];
        const double t2 = -s * g_[l] + c * g_[l + 1];
        g_[l] = t1;
        g_[l + 1] = t2;
        col.resize(l + 1);
        rcols_.push_back(std::move(col));
    }

    std::size_t size() const { return rcols_.size(); }

    /// current minimum of ||H y - rhs||
    double resnorm() const {
        const std::size_t j = rcols_.size();
        double s = 0.0;
        for (std::size_t i = j; i < g_.size(); ++i) s += g_[i] * g_[i];
        return std::sqrt(s);
    }

    /// Back-substitution; exactly rank-deficient diagonals give y_i = 0
    /// (minimum-norm in the triangularized coordinates, not an error).
    Vector solve() const {
        const std::size_t j = rcols_.size();
        double rmax = 0.0;
        for (std::size_t i = 0; i < j; ++i) rmax = std::max(rmax, std::abs(rcols_[i][i]));
        Vector y(j, 0.0);
        const double tiny = rmax * 1e-300 + 1e-300;
        for (std::size_t i = j; i-- > 0;) {
            double s = g_[i];
            for (std::size_t l = i + 1; l < j; ++l) s -= rcols_[l][i] * y[l];
            const double d = rcols_[i][i];
            y[i] = (std::abs(d) > tiny && std::abs(d) > rmax * 1e-14) ? s / d : 0.0;
        }
        return y;
    }

  private:
    std::vector<Vector> rcols_; // triangularized columns, column l has l+1 rows
    std::vector<double> cs_, sn_;
    Vector g_; // rotated rhs
};

/// One-shot Hessenberg least squares: y minimizing ||H y - rhs|| and the
/// attained minimum.
inline std::pair<Vector, double> hessenberg_lstsq(const DenseMatrix& h, const Vector& rhs) {
    if (h.nrows != h.ncols + 1 || rhs.size() != h.nrows)
        throw InvalidInput("hessenberg_lstsq: shape mismatch");
    if (!h.finite() || !all_finite(rhs)) throw InvalidInput("hessenberg_lstsq: non-finite input");
    for (std::size_t j = 0; j < h.ncols; ++j)
        for (std::size_t i = j + 2; i < h.nrows; ++i)
            if (h(i, j) != 0.0) throw InvalidInput("hessenberg_lstsq: not upper-Hessenberg");
    GivensLs ls(rhs);
    for (std::size_t j = 0; j < h.ncols; ++j) {
        Vector col(j + 2);
        for (std::size_t i = 0; i < j + 2; ++i) col[i] = h(i, j);
        ls.add_column(std::move(col));
    }
    return {ls.solve(), ls.resnorm()};
}

// ---------------------------------------------------------------------------
// Small eigen/SVD kernels (dense, hard size cap; Eigen-backed)
// ---------------------------------------------------------------------------

inline constexpr std::size_t kSmallEigCap = 500;

struct SymEig {
    Vector values;      // ascending
    DenseMatrix vectors; // m x m, orthonormal, column i pairs with values[i]
};

inline SymEig sym_tridiag_eig(const Vector& diag, const Vector& offdiag) {
    if (!all_finite(diag) || !all_finite(offdiag)) throw InvalidInput("sym_tridiag_eig: non-finite");
    if (offdiag.size() + 1 != diag.size()) throw InvalidInput("sym_tridiag_eig: size mismatch");
    const std::size_t m = diag.size();
    Eigen::VectorXd d(m), e(m > 1 ? m - 1 : 0);
    for (std::size_t i = 0; i < m; ++i) d(i) = diag[i];
    for (std::size_t i = 0; i + 1 < m; ++i) e(i) = offdiag[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(d, e);
    if (es.info() != Eigen::Success) throw ConvergenceFailure("sym_tridiag_eig failed");
    SymEig out;
    out.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + m);
    out.vectors = detail::from_eigen(es.eigenvectors());
    return out;
}

/// Symmetric dense eigendecomposition (internal helper for selection).
inline SymEig sym_eig(const DenseMatrix& m) {
    if (!m.finite()) throw InvalidInput("sym_eig: non-finite");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(detail::to_eigen(m));
    if (es.info() != Eigen::Success) throw ConvergenceFailure("sym_eig failed");
    SymEig out;
    out.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + m.nrows);
    out.vectors = detail::from_eigen(es.eigenvectors());
    return out;
}

/// Eigen-decomposition of a small general real matrix. Real eigenvalues get
/// one unit eigenvector column; a complex-conjugate pair occupies two
/// consecutive entries (re +- i*im, im > 0 first) whose two columns form an
/// orthonormal basis of the real invariant plane.
struct GeneralEig {
    std::vector<double> values_re;
    std::vector<double> values_im; // 0 for real eigenvalues
    DenseMatrix vectors;           // m x m
};

inline GeneralEig small_eig_general(const DenseMatrix& m) {
    if (m.nrows != m.ncols) throw InvalidInput("small_eig_general: not square");
    if (m.nrows > kSmallEigCap) throw InvalidInput("small_eig_general: over size cap");
    if (!m.finite()) throw InvalidInput("small_eig_general: non-finite");
    Eigen::EigenSolver<Eigen::MatrixXd> es;
    es.setMaxIterations(static_cast<Eigen::Index>(30 * std::max<std::size_t>(m.nrows, 1)));
    es.compute(detail::to_eigen(m), true);
    if (es.info() != Eigen::Success)
        throw ConvergenceFailure("small_eig_general: QR iteration did not converge");
    const std::size_t n = m.nrows;
    GeneralEig out;
    out.values_re.resize(n);
    out.values_im.resize(n);
    Eigen::MatrixXd pv = es.pseudoEigenvectors();
    Eigen::MatrixXd v(n, n);
    for (std::size_t j = 0; j < n;) {
        const auto lam = es.eigenvalues()(static_cast<Eigen::Index>(j));
        if (std::abs(lam.imag()) > 0.0 && j + 1 < n) {
            // invariant plane: orthonormalize the two pseudo-eigenvector columns
            Eigen::VectorXd a = pv.col(static_cast<Eigen::Index>(j));
            Eigen::VectorXd b = pv.col(static_cast<Eigen::Index>(j + 1));
            a.normalize();
            b -= a.dot(b) * a;
            b.normalize();
            v.col(static_cast<Eigen::Index>(j)) = a;
            v.col(static_cast<Eigen::Index>(j + 1)) = b;
            out.values_re[j] = out.values_re[j + 1] = lam.real();
            out.values_im[j] = std::abs(lam.imag());
            out.values_im[j + 1] = -std::abs(lam.imag());
            j += 2;
        } else {
            Eigen::VectorXd a = pv.col(static_cast<Eigen::Index>(j));
            a.normalize();
            v.col(static_cast<Eigen::Index>(j)) = a;
            out.values_re[j] = lam.real();
            out.values_im[j] = 0.0;
            j += 1;
        }
    }
    out.vectors = detail::from_eigen(v);
    return out;
}

/// Frobenius-norm condition estimate ||M||_F ||M^{-1}||_F (infinite when
/// numerically singular).
inline double cond_estimate(const DenseMatrix& m) {
    if (m.nrows != m.ncols) throw InvalidInput("cond_estimate: not square");
    if (m.nrows == 0) return 1.0;
    Eigen::MatrixXd e = detail::to_eigen(m);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(e);
    const double c = e.norm() * lu.inverse().norm();
    return std::isfinite(c) ? c : std::numeric_limits<double>::infinity();
}

/// A v = theta B v by reduction to small_eig_general(B^{-1} A); B must be
/// numerically invertible (Frobenius condition estimate below 1e12).
inline GeneralEig generalized_eig_small(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.nrows != a.ncols || b.nrows != b.ncols || a.nrows != b.nrows)
        throw InvalidInput("generalized_eig_small: shape mismatch");
    if (a.nrows > kSmallEigCap) throw InvalidInput("generalized_eig_small: over size cap");
    if (!a.finite() || !b.finite()) throw InvalidInput("generalized_eig_small: non-finite");
    const double cond = cond_estimate(b);
    if (cond > 1e12)
        throw IllConditionedPencil("generalized_eig_small: B condition estimate " +
                                   std::to_string(cond));
    Eigen::MatrixXd c =
        Eigen::PartialPivLU<Eigen::MatrixXd>(detail::to_eigen(b)).solve(detail::to_eigen(a));
    return small_eig_general(detail::from_eigen(c));
}

struct Svd {
    DenseMatrix left;  // n x r, orthonormal
    Vector sing;       // nonincreasing, nonnegative
    DenseMatrix right; // s x r
};

inline Svd svd_small(const DenseMatrix& m) {
    if (m.ncols > kSmallEigCap) throw InvalidInput("svd_small: over size cap");
    if (!m.finite()) throw InvalidInput("svd_small: non-finite");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(detail::to_eigen(m),
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
    Svd out;
    out.left = detail::from_eigen(svd.matrixU());
    out.right = detail::from_eigen(svd.matrixV());
    const auto& s = svd.singularValues();
    out.sing.assign(s.data(), s.data() + s.size());
    return out;
}

/// Dense LU solve (partial pivoting), for small square systems inside the
/// library (projected FOM/Galerkin blocks). Throws SingularMatrix.
inline Vector lu_solve(const DenseMatrix& a, const Vector& rhs) {
    if (a.nrows != a.ncols || rhs.size() != a.nrows) throw InvalidInput("lu_solve: shape");
    const std::size_t n = a.nrows;
    DenseMatrix lu = a;
    Vector x = rhs;
    std::vector<std::size_t> piv(n);
    for (std::size_t i = 0; i < n; ++i) piv[i] = i;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t i = c + 1; i < n; ++i)
            if (std::abs(lu(i, c)) > std::abs(lu(p, c))) p = i;
        if (p != c) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu(c, j), lu(p, j));
            std::swap(x[c], x[p]);
        }
        const double d = lu(c, c);
        if (d == 0.0 || !std::isfinite(d)) throw SingularMatrix("lu_solve: singular pivot");
        for (std::size_t i = c + 1; i < n; ++i) {
            const double f = lu(i, c) / d;
            lu(i, c) = f;
            for (std::size_t j = c + 1; j < n; ++j) lu(i, j) -= f * lu(c, j);
            x[i] -= f * x[c];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu(i, j) * x[j];
        x[i] /= lu(i, i);
    }
    return x;
}

} // namespace recyklos

#endif
