#ifndef RECYKLOS_CSR_HPP
#define RECYKLOS_CSR_HPP

#include <algorithm>
#include <cstddef>
#include <functional>
#include <memory>
#include <tuple>
#include <vector>

#include "recyklos/dense.hpp"
#include "recyklos/errors.hpp"
#include "recyklos/vec.hpp"

namespace recyklos {

/// Sparse operator in compressed-row form. Immutable after construction;
/// matvec is safe to call concurrently.
struct CsrMatrix {
    std::size_t nrows = 0;
    std::size_t ncols = 0;
    std::vector<std::size_t> row_ptr; // length nrows+1, nondecreasing
    std::vector<std::size_t> col_idx; // strictly increasing within each row
    std::vector<double> vals;

    std::size_t nnz() const { return vals.size(); }

    /// Build from (row, col, value) triplets; duplicates are summed
    /// (Matrix Market convention).
    static CsrMatrix from_triplets(std::size_t nr, std::size_t nc,
                                   std::vector<std::tuple<std::size_t, std::size_t, double>> t) {
        for (const auto& [i, j, v] : t) {
            if (i >= nr || j >= nc) throw InvalidInput("from_triplets: index out of range");
            if (!std::isfinite(v)) throw InvalidInput("from_triplets: non-finite value");
        }
        std::sort(t.begin(), t.end(), [](const auto& a, const auto& b) {
            return std::tie(std::get<0>(a), std::get<1>(a)) <
                   std::tie(std::get<0>(b), std::get<1>(b));
        });
        CsrMatrix m;
        m.nrows = nr;
        m.ncols = nc;
        m.row_ptr.assign(nr + 1, 0);
        for (std::size_t p = 0; p < t.size();) {
            auto [i, j, v] = t[p];
            double sum = v;
            std::size_t q = p + 1;
            while (q < t.size() && std::get<0>(t[q]) == i && std::get<1>(t[q]) == j)
                sum += std::get<2>(t[q++]);
            m.col_idx.push_back(j);
            m.vals.push_back(sum);
            m.row_ptr[i + 1] = m.col_idx.size();
            p = q;
        }
        for (std::size_t i = 1; i <= nr; ++i)
            m.row_ptr[i] = std::max(m.row_ptr[i], m.row_ptr[i - 1]);
        return m;
    }

    bool operator==(const CsrMatrix&) const = default;
};

inline Vector matvec(const CsrMatrix& a, const Vector& v) {
    if (v.size() != a.ncols) throw InvalidInput("matvec: dimension mismatch");
    Vector y(a.nrows, 0.0);
    for (std::size_t i = 0; i < a.nrows; ++i) {
        double s = 0.0;
        for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p)
            s += a.vals[p] * v[a.col_idx[p]];
        y[i] = s;
    }
    return y;
}

inline CsrMatrix transpose(const CsrMatrix& a) {
    std::vector<std::tuple<std::size_t, std::size_t, double>> t;
    t.reserve(a.nnz());
    for (std::size_t i = 0; i < a.nrows; ++i)
        for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p)
            t.emplace_back(a.col_idx[p], i, a.vals[p]);
    return CsrMatrix::from_triplets(a.ncols, a.nrows, std::move(t));
}

inline DenseMatrix densify(const CsrMatrix& a) {
    DenseMatrix d(a.nrows, a.ncols);
    for (std::size_t i = 0; i < a.nrows; ++i)
        for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p)
            d(i, a.col_idx[p]) += a.vals[p];
    return d;
}

inline double frob_norm(const CsrMatrix& a) { return norm2(a.vals); }

/// Abstract square operator: a deterministic linear apply plus an optional
/// transpose apply. Applications are counted through a shared counter so
/// drivers can report matvec totals across composed operators.
struct LinearOperator {
    std::size_t n = 0;
    std::function<Vector(const Vector&)> apply_fn;
    std::function<Vector(const Vector&)> apply_transpose_fn; // optional
    std::shared_ptr<std::size_t> matvec_count = std::make_shared<std::size_t>(0);

    Vector apply(const Vector& v) const {
        if (v.size() != n) throw InvalidInput("LinearOperator: dimension mismatch");
        ++*matvec_count;
        return apply_fn(v);
    }
    bool has_transpose() const { return static_cast<bool>(apply_transpose_fn); }
    Vector apply_transpose(const Vector& v) const {
        ++*matvec_count;
        return apply_transpose_fn(v);
    }
};

inline LinearOperator make_operator(const CsrMatrix& a) {
    if (a.nrows != a.ncols) throw InvalidInput("make_operator: matrix not square");
    LinearOperator op;
    op.n = a.nrows;
    op.apply_fn = [&a](const Vector& v) { return matvec(a, v); };
    auto at = std::make_shared<CsrMatrix>(transpose(a));
    op.apply_transpose_fn = [at](const Vector& v) { return matvec(*at, v); };
    return op;
}

/// Operator that owns its matrix (for drivers that build systems on the fly).
inline LinearOperator make_owning_operator(CsrMatrix a) {
    if (a.nrows != a.ncols) throw InvalidInput("make_operator: matrix not square");
    auto m = std::make_shared<CsrMatrix>(std::move(a));
    LinearOperator op;
    op.n = m->nrows;
    op.apply_fn = [m](const Vector& v) { return matvec(*m, v); };
    auto at = std::make_shared<CsrMatrix>(transpose(*m));
    op.apply_transpose_fn = [at](const Vector& v) { return matvec(*at, v); };
    return op;
}

inline LinearOperator make_dense_operator(std::shared_ptr<DenseMatrix> d) {
    LinearOperator op;
    op.n = d->nrows;
    op.apply_fn = [d](const Vector& v) { return matvec(*d, v); };
    op.apply_transpose_fn = [d](const Vector& v) { return matvec_t(*d, v); };
    return op;
}

/// Shifted operator A + gamma I sharing A's matvec counter.
inline LinearOperator make_shifted_operator(const LinearOperator& a, double gamma) {
    LinearOperator op;
    op.n = a.n;
    op.matvec_count = a.matvec_count;
    op.apply_fn = [f = a.apply_fn, gamma](const Vector& v) {
        Vector y = f(v);
        axpy(gamma, v, y);
        return y;
    };
    if (a.apply_transpose_fn) {
        op.apply_transpose_fn = [f = a.apply_transpose_fn, gamma](const Vector& v) {
            Vector y = f(v);
            axpy(gamma, v, y);
            return y;
        };
    }
    return op;
}

/// Power-iteration 2-norm estimate. Uses op^T op when the transpose is
/// available, otherwise iterates the operator itself (estimating the spectral
/// radius of the symmetric part up to the iteration budget). Always a lower
/// bound on the true norm, up to roundoff.
inline double norm_estimate(const LinearOperator& op, std::size_t iters) {
    if (iters < 1) throw InvalidInput("norm_estimate: iters >= 1 required");
    std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
    Vector v = random_vector(op.n, rng);
    double vn = norm2(v);
    if (vn == 0.0) return 0.0;
    scale(v, 1.0 / vn);
    double est = 0.0;
    for (std::size_t it = 0; it < iters; ++it) {
        Vector w = op.apply(v);
        if (op.has_transpose()) {
            const double wn = norm2(w);
            est = wn;
            if (wn == 0.0) return 0.0;
            Vector u = op.apply_transpose(w);
            const double un = norm2(u);
            if (un == 0.0) return est;
            v = std::move(u);
            scale(v, 1.0 / un);
        } else {
            const double wn = norm2(w);
            est = wn;
            if (wn == 0.0) return 0.0;
            v = std::move(w);
            scale(v, 1.0 / wn);
        }
    }
    return est;
}

} // namespace recyklos

#endif
