#ifndef RECYKLOS_RECYCLE_HPP
#define RECYKLOS_RECYCLE_HPP

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "recyklos/arnoldi.hpp"
#include "recyklos/csr.hpp"
#include "recyklos/dense.hpp"
#include "recyklos/errors.hpp"
#include "recyklos/vec.hpp"

namespace recyklos {

/// How the pair (U, C) is normalized, i.e. which residual projector
/// Q the space realizes. Q is never formed as a matrix; see
/// apply_q_complement.
///   Orthogonal — A·U = C with C orthonormal; Q = C Cᵀ (GCRO convention).
///   ObliqueFOM — U orthonormal, C = A·U; Q = AU (UᵀAU)⁻¹ Uᵀ.
///   ObliqueMR  — same stored data and projector as ObliqueFOM; the label
///                marks its use as the alternative rGMRES projector, where the
///                minimization interpretation (not the algebra) differs.
///   GalerkinA  — U normalized in the A-inner product (UᵀAU = I, A SPD),
///                C = A·U; Q = C Uᵀ. Projected-CG convention.
enum class RecycleVariant { Orthogonal, ObliqueFOM, ObliqueMR, GalerkinA };

struct RecycleSpace {
    RecycleVariant variant = RecycleVariant::Orthogonal;
    std::vector<Vector> U;
    std::vector<Vector> C; // A·U under each variant's normalization
    DenseMatrix uau;       // UᵀAU, kept for the oblique variants only

    std::size_t k() const { return U.size(); }
};

namespace detail {

inline Vector dots_against(const std::vector<Vector>& cols, const Vector& v) {
    Vector d(cols.size());
    for (std::size_t i = 0; i < cols.size(); ++i) d[i] = dot(cols[i], v);
    return d;
}

/// x += sign * cols * coeffs
inline void add_combo(const std::vector<Vector>& cols, const Vector& coeffs, Vector& x,
                      double sign = 1.0) {
    for (std::size_t i = 0; i < cols.size(); ++i) axpy(sign * coeffs[i], cols[i], x);
}

inline void recycle_debug_invariants(const LinearOperator& a, const RecycleSpace& rs) {
    if (rs.k() == 0) return;
    double unorm = 0.0;
    for (const Vector& u : rs.U) unorm = std::max(unorm, norm2(u));
    double cscale = 0.0;
    for (const Vector& c : rs.C) cscale = std::max(cscale, norm2(c));
    for (std::size_t i = 0; i < rs.k(); ++i) {
        // A·u_i = c_i under every variant (apply_fn: uncounted diagnostic)
        Vector au = a.apply_fn(rs.U[i]);
        axpy(-1.0, rs.C[i], au);
        if (norm2(au) > 1e-10 * std::max(1.0, cscale) * std::max(1.0, unorm))
            throw NumericalFailure("recycle: A U != C beyond tolerance");
    }
    if (rs.variant == RecycleVariant::Orthogonal) {
        for (std::size_t i = 0; i < rs.k(); ++i)
            for (std::size_t j = i; j < rs.k(); ++j) {
                const double g = dot(rs.C[i], rs.C[j]) - (i == j ? 1.0 : 0.0);
                if (std::abs(g) > 1e-10) throw NumericalFailure("recycle: CᵀC != I");
            }
    }
    if (rs.variant == RecycleVariant::GalerkinA) {
        for (std::size_t i = 0; i < rs.k(); ++i)
            for (std::size_t j = i; j < rs.k(); ++j) {
                const double g = dot(rs.U[i], rs.C[j]) - (i == j ? 1.0 : 0.0);
                if (std::abs(g) > 1e-8) throw NumericalFailure("recycle: UᵀAU != I");
            }
    }
}

} // namespace detail

inline constexpr std::size_t kRecycleCap = 100;

/// Normalize a raw augmentation basis against the current operator.
/// Near-dependent columns are dropped; a nonempty input whose columns are all
/// dropped throws EmptyRecycleSpace (callers fall back to k = 0). Costs
/// k matvecs (k' for the Galerkin variant, where dropped columns still paid).
inline RecycleSpace prepare_recycle(const LinearOperator& a, const std::vector<Vector>& u_raw,
                                    RecycleVariant variant, double rank_tol = 1e-12) {
    if (u_raw.size() > kRecycleCap) throw InvalidInput("prepare_recycle: k over cap");
    for (const Vector& u : u_raw) {
        if (u.size() != a.n) throw InvalidInput("prepare_recycle: dimension mismatch");
        if (!all_finite(u)) throw InvalidInput("prepare_recycle: non-finite column");
    }
    RecycleSpace rs;
    rs.variant = variant;
    if (u_raw.empty()) return rs;

    if (variant == RecycleVariant::Orthogonal) {
        std::vector<Vector> au(u_raw.size());
        for (std::size_t i = 0; i < u_raw.size(); ++i) au[i] = a.apply(u_raw[i]);
        const ThinQr qr = thin_qr(DenseMatrix::from_columns(au), rank_tol);
        if (qr.rank == 0) throw EmptyRecycleSpace("prepare_recycle: rank 0");
        rs.C = qr.Q.columns();
        // U <- U_piv R_piv^{-1} so A U = C holds column by column
        for (std::size_t c = 0; c < qr.rank; ++c) {
            const Vector rinv_col = qr_pivot_backsolve(qr, unit(qr.rank, c));
            Vector u = zeros(a.n);
            for (std::size_t i = 0; i < qr.rank; ++i)
                axpy(rinv_col[i], u_raw[qr.pivot_cols[i]], u);
            rs.U.push_back(std::move(u));
        }
    } else if (variant == RecycleVariant::ObliqueFOM || variant == RecycleVariant::ObliqueMR) {
        const ThinQr qr = thin_qr(DenseMatrix::from_columns(u_raw), rank_tol);
        if (qr.rank == 0) throw EmptyRecycleSpace("prepare_recycle: rank 0");
        rs.U = qr.Q.columns();
        for (const Vector& u : rs.U) rs.C.push_back(a.apply(u));
        // UᵀAU must stay numerically invertible; shed trailing columns until
        // the condition estimate clears
        for (;;) {
            const std::size_t k = rs.k();
            rs.uau = DenseMatrix(k, k);
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j) rs.uau(i, j) = dot(rs.U[i], rs.C[j]);
            if (cond_estimate(rs.uau) <= 1e12) break;
            rs.U.pop_back();
            rs.C.pop_back();
            if (rs.U.empty())
                throw EmptyRecycleSpace("prepare_recycle: UᵀAU singular to working precision");
        }
    } else { // GalerkinA
        const ThinQr qr = thin_qr(DenseMatrix::from_columns(u_raw), rank_tol);
        if (qr.rank == 0) throw EmptyRecycleSpace("prepare_recycle: rank 0");
        double aref = 0.0;
        for (const Vector& q : qr.Q.columns()) {
            Vector w = q;
            for (int pass = 0; pass < 2; ++pass) // A-inner-product MGS, twice
                for (std::size_t i = 0; i < rs.U.size(); ++i)
                    axpy(-dot(rs.C[i], w), rs.U[i], w);
            Vector aw = a.apply(w);
            const double wa2 = dot(w, aw);
            if (wa2 < 0.0) throw NotPositiveDefinite("prepare_recycle: wᵀAw < 0");
            const double anorm = std::sqrt(std::max(wa2, 0.0));
            aref = std::max(aref, anorm);
            if (anorm <= 1e-10 * aref || anorm == 0.0) continue; // A-dependent, drop
            scale(w, 1.0 / anorm);
            scale(aw, 1.0 / anorm);
            rs.U.push_back(std::move(w));
            rs.C.push_back(std::move(aw));
        }
        if (rs.U.empty()) throw EmptyRecycleSpace("prepare_recycle: rank 0 in A-inner product");
    }
    if (debug_checks::enabled()) detail::recycle_debug_invariants(a, rs);
    return rs;
}

/// Apply (I - Q) to v, returning the deflated vector and the coefficients Q
/// extracted against the variant's left basis. One re-projection pass keeps
/// the constraint (Cᵀw for Orthogonal, Uᵀw otherwise) at roundoff.
inline std::pair<Vector, Vector> apply_q_complement(const RecycleSpace& rs, const Vector& v) {
    Vector w = v;
    Vector coeffs(rs.k(), 0.0);
    if (rs.k() == 0) return {std::move(w), std::move(coeffs)};
    for (int pass = 0; pass < 2; ++pass) {
        Vector c;
        switch (rs.variant) {
            case RecycleVariant::Orthogonal: c = detail::dots_against(rs.C, w); break;
            case RecycleVariant::GalerkinA: c = detail::dots_against(rs.U, w); break;
            default: c = lu_solve(rs.uau, detail::dots_against(rs.U, w)); break;
        }
        detail::add_combo(rs.C, c, w, -1.0);
        for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += c[i];
    }
    return {std::move(w), std::move(coeffs)};
}

/// Coefficients of the pure-recycle correction U·c0 for a residual r0:
/// c0 = Ũᵀr0 in the appropriate oblique sense per variant.
inline Vector recycle_correction_coeffs(const RecycleSpace& rs, const Vector& r0) {
    switch (rs.variant) {
        case RecycleVariant::Orthogonal: return detail::dots_against(rs.C, r0);
        case RecycleVariant::GalerkinA: return detail::dots_against(rs.U, r0);
        default: return lu_solve(rs.uau, detail::dots_against(rs.U, r0));
    }
}

/// Full approximation from the projected subproblem data:
///   x = x0 + U·c0 + V·y - U·(B y),   c0 = recycle_correction_coeffs(rs, r0).
/// With k = 0 this is structurally the base update x0 + V y.
inline Vector assemble_solution(const RecycleSpace& rs, const Vector& x0, const Vector& r0,
                                const std::vector<Vector>& v, const Vector& y,
                                const DenseMatrix& b) {
    Vector x = x0;
    for (std::size_t l = 0; l < y.size(); ++l) axpy(y[l], v[l], x);
    if (rs.k() == 0) return x;
    Vector c0 = recycle_correction_coeffs(rs, r0);
    for (std::size_t i = 0; i < rs.k(); ++i) {
        double byi = 0.0;
        for (std::size_t l = 0; l < y.size(); ++l) byi += b(i, l) * y[l];
        axpy(c0[i] - byi, rs.U[i], x);
    }
    return x;
}

/// |  ||b - A x||  -  inner_resnorm |, the discrepancy of the residual
/// identity between the projected subproblem and the full system. Uses the
/// raw apply (uncounted) so diagnostics never skew matvec totals. Debug
/// builds assert the discrepancy is <= 1e-8 ||b||.
inline double residual_consistency_check(const LinearOperator& a, const Vector& b,
                                         const Vector& x, double inner_resnorm) {
    Vector r = a.apply_fn(x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    const double d = std::abs(norm2(r) - inner_resnorm);
    if (debug_checks::enabled() && d > 1e-8 * norm2(b))
        throw NumericalFailure("residual identity violated: discrepancy " + std::to_string(d));
    return d;
}

/// Arnoldi for the deflated operator (I - Q) A, capturing per column the
/// Q-coefficients of A v_l (column l of B, so A V_j = C B_j + V_{j+1} H_j for
/// the Orthogonal variant).
struct ProjectedArnoldiState {
    ArnoldiState inner;
    std::vector<Vector> bcols; // column l: coefficients of Q against C, length k

    std::size_t j() const { return inner.j(); }

    DenseMatrix b() const {
        const std::size_t k = bcols.empty() ? 0 : bcols[0].size();
        DenseMatrix m(k, bcols.size());
        for (std::size_t l = 0; l < bcols.size(); ++l)
            for (std::size_t i = 0; i < k; ++i) m(i, l) = bcols[l][i];
        return m;
    }
};

inline ProjectedArnoldiState projected_arnoldi_start(const Vector& deflated_r0) {
    ProjectedArnoldiState s;
    s.inner = arnoldi_start(deflated_r0);
    return s;
}

namespace detail {

inline void projected_arnoldi_debug_invariants(const LinearOperator& a, const RecycleSpace& rs,
                                               const ProjectedArnoldiState& s) {
    arnoldi_debug_invariants(s.inner);
    // newest column of the modified Arnoldi relation A v_l = C b_l + V h_l
    const std::size_t l = s.j() - 1;
    Vector lhs = a.apply_fn(s.inner.V[l]);
    add_combo(rs.C, s.bcols[l], lhs, -1.0);
    for (std::size_t i = 0; i < s.inner.hcols[l].size() && i < s.inner.V.size(); ++i)
        axpy(-s.inner.hcols[l][i], s.inner.V[i], lhs);
    if (norm2(lhs) > 1e-9 * std::max(1.0, s.inner.op_norm_scale))
        throw NumericalFailure("projected arnoldi: modified relation violated");
}

} // namespace detail

/// One step of the projected Arnoldi process. Returns the raw product A v_j
/// (before deflation) so selectors can accumulate coupling data matvec-free.
inline Vector projected_arnoldi_extend(const LinearOperator& a, const RecycleSpace& rs,
                                       ProjectedArnoldiState& state) {
    if (state.inner.breakdown)
        throw InvalidInput("projected_arnoldi_extend: state already broke down");
    const std::size_t j = state.j();
    if (j + 1 > a.n) throw InvalidInput("projected_arnoldi_extend: j = n reached");

    const Vector av = a.apply(state.inner.V[j]);
    auto [w, coeffs] = apply_q_complement(rs, av);
    state.bcols.push_back(std::move(coeffs));
    state.inner.op_norm_scale = std::max(state.inner.op_norm_scale, norm2(w));
    Vector h(j + 2, 0.0);
    for (std::size_t i = 0; i <= j; ++i) {
        const double c = dot(state.inner.V[i], w);
        axpy(-c, state.inner.V[i], w);
        h[i] = c;
    }
    for (std::size_t i = 0; i <= j; ++i) { // one full reorthogonalization pass
        const double c = dot(state.inner.V[i], w);
        axpy(-c, state.inner.V[i], w);
        h[i] += c;
    }
    const double hh = norm2(w);
    h[j + 1] = hh;
    state.inner.hcols.push_back(std::move(h));
    if (hh <= kBreakdownRelTol * state.inner.op_norm_scale) {
        state.inner.breakdown = true;
    } else {
        scale(w, 1.0 / hh);
        state.inner.V.push_back(std::move(w));
    }
    if (debug_checks::enabled()) detail::projected_arnoldi_debug_invariants(a, rs, state);
    return av;
}

} // namespace recyklos

#endif
