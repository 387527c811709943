#ifndef RECYKLOS_ORACLE_HPP
#define RECYKLOS_ORACLE_HPP

// Brute-force references the optimality and equivalence tests compare
// against. Everything here is implemented independently of the solver code
// paths (own elimination, own Gram-Schmidt; the only shared kernel is
// thin_qr) and applies operators through the raw callable so oracle work
// never skews matvec accounting.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iostream>
#include <utility>
#include <vector>

#include "recyklos/csr.hpp"
#include "recyklos/dense.hpp"
#include "recyklos/errors.hpp"
#include "recyklos/vec.hpp"

namespace recyklos {
namespace oracle {

struct DenseSolveResult {
    Vector x;
    double resnorm; // ||A x - b||, reported alongside
};

/// Gaussian elimination with partial pivoting, written out here on purpose
/// (not the library's lu_solve).
inline DenseSolveResult dense_solve(const DenseMatrix& a, const Vector& b) {
    if (a.nrows != a.ncols || b.size() != a.nrows) throw InvalidInput("dense_solve: shape");
    if (a.nrows > 2000) throw InvalidInput("dense_solve: over size cap");
    const std::size_t n = a.nrows;
    std::vector<Vector> rows(n, Vector(n + 1));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) rows[i][j] = a(i, j);
        rows[i][n] = b[i];
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t i = c + 1; i < n; ++i)
            if (std::abs(rows[i][c]) > std::abs(rows[p][c])) p = i;
        if (rows[p][c] == 0.0) throw SingularMatrix("dense_solve: singular pivot");
        std::swap(rows[c], rows[p]);
        for (std::size_t i = c + 1; i < n; ++i) {
            const double f = rows[i][c] / rows[c][c];
            if (f == 0.0) continue;
            for (std::size_t j = c; j <= n; ++j) rows[i][j] -= f * rows[c][j];
        }
    }
    DenseSolveResult out;
    out.x = zeros(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = rows[i][n];
        for (std::size_t j = i + 1; j < n; ++j) s -= rows[i][j] * out.x[j];
        out.x[i] = s / rows[i][i];
    }
    Vector r = matvec(a, out.x);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    out.resnorm = norm2(r);
    return out;
}

/// min over c of || b - A (x0 + W c) ||: forms A·W densely, QR, explicit
/// residual evaluation for the reported minimum.
inline std::pair<double, Vector> bruteforce_min_residual(const LinearOperator& a,
                                                         const Vector& b, const Vector& x0,
                                                         const std::vector<Vector>& w) {
    if (w.size() > 300) throw InvalidInput("bruteforce_min_residual: basis over cap");
    Vector r0 = a.apply_fn(x0);
    for (std::size_t i = 0; i < r0.size(); ++i) r0[i] = b[i] - r0[i];
    if (w.empty()) return {norm2(r0), {}};
    std::vector<Vector> aw(w.size());
    for (std::size_t c = 0; c < w.size(); ++c) aw[c] = a.apply_fn(w[c]);
    const ThinQr qr = thin_qr(DenseMatrix::from_columns(aw), 1e-13);
    Vector qtr(qr.rank);
    for (std::size_t c = 0; c < qr.rank; ++c) qtr[c] = dot(qr.Q.col(c), r0);
    const Vector cpiv = qr_pivot_backsolve(qr, qtr);
    Vector coeffs = zeros(w.size());
    for (std::size_t c = 0; c < qr.rank; ++c) coeffs[qr.pivot_cols[c]] = cpiv[c];
    Vector r = r0;
    for (std::size_t c = 0; c < w.size(); ++c) axpy(-coeffs[c], aw[c], r);
    return {norm2(r), std::move(coeffs)};
}

/// min over c of || x* - (x0 + W c) ||_A for SPD A, solved exactly through
/// the d×d system WᵀAW c = Wᵀ(b - A x0); x* comes from dense_solve.
inline std::pair<double, Vector> bruteforce_min_anorm_error(const DenseMatrix& a,
                                                            const Vector& b, const Vector& x0,
                                                            const std::vector<Vector>& w) {
    if (w.size() > 300) throw InvalidInput("bruteforce_min_anorm_error: basis over cap");
    const DenseSolveResult ds = dense_solve(a, b);
    Vector r0 = matvec(a, x0);
    for (std::size_t i = 0; i < r0.size(); ++i) r0[i] = b[i] - r0[i];

    std::vector<Vector> wcols = w;
    Vector coeffs = zeros(w.size());
    for (std::size_t d = wcols.size(); d > 0; --d) {
        DenseMatrix g(d, d);
        Vector rhs(d);
        std::vector<Vector> awc(d);
        for (std::size_t c = 0; c < d; ++c) awc[c] = matvec(a, wcols[c]);
        for (std::size_t i = 0; i < d; ++i) {
            rhs[i] = dot(wcols[i], r0);
            for (std::size_t j = 0; j < d; ++j) g(i, j) = dot(wcols[i], awc[j]);
        }
        try {
            const DenseSolveResult sol = dense_solve(g, rhs);
            for (std::size_t c = 0; c < d; ++c) coeffs[c] = sol.x[c];
            break;
        } catch (const SingularMatrix&) {
            wcols.pop_back(); // rank-reduce and retry
            if (d == 1) break;
        }
    }
    Vector e = ds.x;
    axpy(-1.0, x0, e);
    for (std::size_t c = 0; c < wcols.size(); ++c) axpy(-coeffs[c], w[c], e);
    const Vector ae = matvec(a, e);
    return {std::sqrt(std::max(dot(e, ae), 0.0)), std::move(coeffs)};
}

/// Principal angles between span(X) and span(Y), from the singular values of
/// Q_XᵀQ_Y, sorted ascending and clamped to [0, π/2]. Rank-deficient inputs
/// reduce the count (with a warning).
inline Vector subspace_angles(const std::vector<Vector>& x, const std::vector<Vector>& y) {
    if (x.empty() || y.empty()) throw InvalidInput("subspace_angles: empty basis");
    const ThinQr qx = thin_qr(DenseMatrix::from_columns(x), 1e-12);
    const ThinQr qy = thin_qr(DenseMatrix::from_columns(y), 1e-12);
    if (qx.rank < x.size() || qy.rank < y.size())
        std::cerr << "recyklos: subspace_angles got rank-deficient input; "
                  << "comparing " << qx.rank << " vs " << qy.rank << " directions\n";
    DenseMatrix m(qx.rank, qy.rank);
    for (std::size_t i = 0; i < qx.rank; ++i)
        for (std::size_t j = 0; j < qy.rank; ++j) m(i, j) = dot(qx.Q.col(i), qy.Q.col(j));
    const Svd cos_svd = svd_small(m); // cosines, descending
    // small angles are unreadable through acos (noise floor ~sqrt(eps)):
    // recover them from the sines, the singular values of (I - QxQxᵀ) Qy
    DenseMatrix r(qx.Q.nrows, qy.rank);
    for (std::size_t j = 0; j < qy.rank; ++j)
        for (std::size_t i = 0; i < qx.Q.nrows; ++i) {
            double v = qy.Q(i, j);
            for (std::size_t c = 0; c < qx.rank; ++c) v -= qx.Q(i, c) * m(c, j);
            r(i, j) = v;
        }
    Vector sines = svd_small(r).sing;           // descending
    std::sort(sines.begin(), sines.end());      // ascending, matches cosines desc
    const std::size_t p = std::min(qx.rank, qy.rank);
    Vector angles;
    for (std::size_t i = 0; i < p; ++i) {
        const double c = std::clamp(cos_svd.sing[i], 0.0, 1.0);
        const double s = std::clamp(sines[i], 0.0, 1.0);
        angles.push_back(c * c > 0.5 ? std::asin(s) : std::acos(c));
    }
    std::sort(angles.begin(), angles.end());
    return angles;
}

/// Orthonormal basis of K_j(A, v) by progressive classical Gram-Schmidt with
/// reorthogonalization (the raw power basis is numerically useless). Stops
/// early when the space becomes invariant; an oracle-side routine, distinct
/// from the Arnoldi machinery under test.
inline std::vector<Vector> krylov_basis(const LinearOperator& a, const Vector& v,
                                        std::size_t j) {
    std::vector<Vector> basis;
    Vector w = v;
    for (std::size_t l = 0; l < j; ++l) {
        for (int pass = 0; pass < 2; ++pass)
            for (const Vector& q : basis) axpy(-dot(q, w), q, w);
        const double nrm = norm2(w);
        if (nrm <= 1e-13 * (1.0 + norm2(v))) break;
        scale(w, 1.0 / nrm);
        basis.push_back(w);
        w = a.apply_fn(basis.back());
    }
    return basis;
}

} // namespace oracle
} // namespace recyklos

#endif
