#ifndef RECYKLOS_RECYCLE_SOLVERS_HPP
#define RECYKLOS_RECYCLE_SOLVERS_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "recyklos/csr.hpp"
#include "recyklos/dense.hpp"
#include "recyklos/errors.hpp"
#include "recyklos/recycle.hpp"
#include "recyklos/report.hpp"
#include "recyklos/selection.hpp"
#include "recyklos/solvers.hpp"
#include "recyklos/vec.hpp"

namespace recyklos {

/// "inherit the dimension of the incoming recycle space"
inline constexpr std::size_t kAutoK = std::numeric_limits<std::size_t>::max();

namespace detail {

inline RecycleSpace empty_space(RecycleVariant v) {
    RecycleSpace rs;
    rs.variant = v;
    return rs;
}

/// Selector dispatch at the end of a projected-Arnoldi cycle (Orthogonal
/// spaces only; other kinds and variants leave the space as-is).
inline RecycleSpace reselect(const LinearOperator& a, const RecycleSpace& rs,
                             const ProjectedArnoldiState& pas, const SelectorSpec& sel) {
    if (sel.kind == SelectorKind::None || sel.k == 0 ||
        rs.variant != RecycleVariant::Orthogonal)
        return rs;
    std::vector<Vector> u_raw;
    switch (sel.kind) {
        case SelectorKind::HarmonicRitz:
            u_raw = harmonic_ritz_select(rs, pas, std::min(sel.k, rs.k() + pas.j()), sel.which);
            break;
        case SelectorKind::Ritz:
            u_raw = ritz_select(rs, pas, std::min(sel.k, rs.k() + pas.j()), sel.which);
            break;
        default: return rs;
    }
    try {
        return prepare_recycle(a, u_raw, RecycleVariant::Orthogonal);
    } catch (const EmptyRecycleSpace&) {
        return empty_space(RecycleVariant::Orthogonal);
    }
}

} // namespace detail

/// GCRO-DR: residual-minimizing recycled GMRES. Per cycle the Arnoldi
/// process runs on the deflated operator (I-Q)A while the coefficients B are
/// captured; the blocked least-squares problem is solved blockwise (the
/// Hessenberg part for y, then the direct update against C), and the
/// selector downselects the space carried into the next cycle/system.
/// Accepts an Orthogonal space (Q = CCᵀ) or, as the alternative-projector
/// configuration, an ObliqueMR space, where the cycle minimum is found by an
/// explicit small dense least-squares over [A·U | A·V_j] instead.
inline std::pair<SolveReport, RecycleSpace> rgmres_gcrodr(const LinearOperator& a,
                                                          const Vector& b, const Vector& x0,
                                                          const RecycleSpace& rs,
                                                          std::size_t restart, double tol,
                                                          std::size_t maxit,
                                                          const SelectorSpec& sel = {}) {
    if (b.size() != a.n || x0.size() != a.n) throw InvalidInput("rgmres: dimension mismatch");
    if (tol <= 0.0) throw InvalidInput("rgmres: tol must be positive");
    if (restart == 0) throw InvalidInput("rgmres: restart must be >= 1");
    const bool oblique = rs.variant == RecycleVariant::ObliqueMR;
    if (!oblique && rs.variant != RecycleVariant::Orthogonal && rs.k() > 0)
        throw InvalidInput("rgmres: recycle space must be Orthogonal (or ObliqueMR)");

    SolveReport rep;
    const std::size_t mv0 = *a.matvec_count;
    RecycleSpace cur = rs;
    const double bnorm = norm2(b);
    rep.x = x0;
    if (bnorm == 0.0) {
        rep.x = zeros(a.n);
        rep.resnorms = {0.0};
        rep.converged = true;
        rep.termination = Termination::Tolerance;
        rep.matvecs = *a.matvec_count - mv0;
        return {rep, cur};
    }
    const double target = tol * bnorm;
    bool first = true;
    while (true) {
        Vector r0 = detail::residual(a, b, rep.x);
        const double rn = norm2(r0);
        if (first) {
            rep.resnorms.push_back(rn);
            first = false;
        }
        if (rn <= target) {
            rep.converged = true;
            rep.termination = Termination::Tolerance;
            break;
        }
        if (rep.iterations >= maxit) {
            rep.termination = Termination::MaxIter;
            break;
        }
        auto [rhat, c0] = apply_q_complement(cur, r0);
        ProjectedArnoldiState pas = projected_arnoldi_start(rhat);
        const std::size_t k = cur.k();

        // oblique-path Gram data for W = [C V_{j+1}] (C = A U, not orthonormal)
        DenseMatrix wtw;
        Vector wtr;
        if (oblique && k > 0) {
            wtw = DenseMatrix(k, k);
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j) wtw(i, j) = dot(cur.C[i], cur.C[j]);
            wtr = detail::dots_against(cur.C, r0);
        }
        auto wvec = [&](std::size_t i) -> const Vector& {
            return i < k ? cur.C[i] : pas.inner.V[i - k];
        };

        GivensLs ls(Vector{pas.inner.beta});
        double res = rn;
        Vector q_obl; // oblique joint coefficients [c; y]
        bool hit_breakdown = pas.inner.breakdown;
        while (!hit_breakdown && pas.j() < restart && rep.iterations < maxit) {
            projected_arnoldi_extend(a, cur, pas);
            ++rep.iterations;
            const std::size_t j = pas.j();
            hit_breakdown = pas.inner.breakdown;
            if (!oblique || k == 0) {
                ls.add_column(pas.inner.hcols[j - 1]);
                res = ls.resnorm();
            } else {
                // grow Gram blocks for every basis vector added since the
                // last step, then solve the normal equations of
                // min ||r0 - W M q|| explicitly
                const std::size_t wd = k + pas.inner.V.size();
                const std::size_t old = wtw.nrows;
                DenseMatrix g2(wd, wd);
                for (std::size_t i = 0; i < old; ++i)
                    for (std::size_t l = 0; l < old; ++l) g2(i, l) = wtw(i, l);
                for (std::size_t t = old; t < wd; ++t) {
                    for (std::size_t i = 0; i <= t; ++i)
                        g2(i, t) = g2(t, i) = dot(wvec(i), wvec(t));
                    wtr.push_back(dot(wvec(t), r0));
                }
                wtw = std::move(g2);
                DenseMatrix m(k + pas.inner.V.size(), k + j); // [[I, B],[0, H]]
                for (std::size_t i = 0; i < k; ++i) m(i, i) = 1.0;
                for (std::size_t l = 0; l < j; ++l) {
                    for (std::size_t i = 0; i < k; ++i) m(i, k + l) = pas.bcols[l][i];
                    for (std::size_t i = 0;
                         i < pas.inner.hcols[l].size() && k + i < m.nrows; ++i)
                        m(k + i, k + l) = pas.inner.hcols[l][i];
                }
                const DenseMatrix mt = m.transposed();
                q_obl = lu_solve(matmul(mt, matmul(wtw, m)), matvec(mt, wtr));
                // explicit residual r0 - W (M q): no cancellation in the norm
                const Vector mq = matvec(m, q_obl);
                Vector rv = r0;
                for (std::size_t i = 0; i < k; ++i) axpy(-mq[i], cur.C[i], rv);
                for (std::size_t i = k; i < mq.size(); ++i)
                    axpy(-mq[i], pas.inner.V[i - k], rv);
                res = norm2(rv);
            }
            if (!std::isfinite(res)) throw NumericalFailure("rgmres: non-finite residual");
            rep.resnorms.push_back(res);
            if (debug_checks::enabled() && !oblique) {
                const Vector yj = ls.solve();
                const Vector xj = assemble_solution(cur, rep.x, r0, pas.inner.V, yj, pas.b());
                residual_consistency_check(a, b, xj, res);
            }
            if (res <= target) break;
        }
        if (!oblique || k == 0) {
            const Vector y = ls.solve();
            rep.x = assemble_solution(cur, rep.x, r0, pas.inner.V, y, pas.b());
        } else {
            for (std::size_t i = 0; i < k; ++i) axpy(q_obl[i], cur.U[i], rep.x);
            for (std::size_t i = k; i < q_obl.size(); ++i)
                axpy(q_obl[i], pas.inner.V[i - k], rep.x);
        }
        cur = detail::reselect(a, cur, pas, sel);
        if (res <= target) {
            rep.converged = true;
            rep.termination = hit_breakdown ? Termination::Breakdown : Termination::Tolerance;
            break;
        }
        if (hit_breakdown) {
            rep.converged = norm2(detail::residual(a, b, rep.x)) <= target;
            rep.termination = Termination::Breakdown;
            break;
        }
        if (rep.iterations >= maxit) {
            rep.termination = Termination::MaxIter;
            break;
        }
    }
    rep.matvecs = *a.matvec_count - mv0;
    return {rep, cur};
}

/// Recycled FOM: the Galerkin method on the obliquely deflated system
/// (I - Q)A with Q = AU (UᵀAU)⁻¹ Uᵀ. The final residual is orthogonal to
/// both U and the Krylov basis (Galerkin over the augmented pair).
inline SolveReport rfom(const LinearOperator& a, const Vector& b, const Vector& x0,
                        const RecycleSpace& rs, std::size_t restart, double tol,
                        std::size_t maxit) {
    if (b.size() != a.n || x0.size() != a.n) throw InvalidInput("rfom: dimension mismatch");
    if (tol <= 0.0) throw InvalidInput("rfom: tol must be positive");
    if (rs.variant != RecycleVariant::ObliqueFOM && rs.k() > 0)
        throw InvalidInput("rfom: recycle space must be ObliqueFOM");

    SolveReport rep;
    const std::size_t mv0 = *a.matvec_count;
    const double bnorm = norm2(b);
    rep.x = x0;
    if (bnorm == 0.0) {
        rep.x = zeros(a.n);
        rep.resnorms = {0.0};
        rep.converged = true;
        rep.termination = Termination::Tolerance;
        return rep;
    }
    const double target = tol * bnorm;
    bool first = true;
    while (true) {
        Vector r0 = detail::residual(a, b, rep.x);
        const double rn = norm2(r0);
        if (first) {
            rep.resnorms.push_back(rn);
            first = false;
        }
        if (rn <= target) {
            rep.converged = true;
            rep.termination = Termination::Tolerance;
            break;
        }
        if (rep.iterations >= maxit) {
            rep.termination = Termination::MaxIter;
            break;
        }
        auto [rhat, c0] = apply_q_complement(rs, r0);
        ProjectedArnoldiState pas = projected_arnoldi_start(rhat);
        Vector y_good;
        double res = norm2(rhat);
        bool hit_breakdown = pas.inner.breakdown;
        while (!hit_breakdown && pas.j() < restart && rep.iterations < maxit) {
            projected_arnoldi_extend(a, rs, pas);
            ++rep.iterations;
            hit_breakdown = pas.inner.breakdown;
            const std::size_t j = pas.j();
            DenseMatrix hj(j, j);
            for (std::size_t l = 0; l < j; ++l)
                for (std::size_t i = 0; i < std::min(j, l + 2); ++i)
                    hj(i, l) = pas.inner.hcols[l][i];
            Vector rhs = zeros(j);
            rhs[0] = pas.inner.beta;
            try {
                Vector y = lu_solve(hj, rhs);
                res = pas.inner.hcols[j - 1][j] * std::abs(y[j - 1]);
                y_good = std::move(y);
            } catch (const SingularMatrix&) {
                // documented FOM behavior: no Galerkin iterate this step
            }
            if (!std::isfinite(res)) throw NumericalFailure("rfom: non-finite residual");
            rep.resnorms.push_back(res);
            if (debug_checks::enabled() && !y_good.empty()) {
                const Vector xj =
                    assemble_solution(rs, rep.x, r0, pas.inner.V, y_good, pas.b());
                residual_consistency_check(a, b, xj, res);
            }
            if (res <= target) break;
        }
        rep.x = assemble_solution(rs, rep.x, r0, pas.inner.V, y_good, pas.b());
        if (res <= target) {
            rep.converged = true;
            rep.termination = hit_breakdown ? Termination::Breakdown : Termination::Tolerance;
            break;
        }
        if (hit_breakdown) {
            rep.converged = norm2(detail::residual(a, b, rep.x)) <= target;
            rep.termination = Termination::Breakdown;
            break;
        }
        if (rep.iterations >= maxit) {
            rep.termination = Termination::MaxIter;
            break;
        }
    }
    rep.matvecs = *a.matvec_count - mv0;
    return rep;
}

/// Recycled MINRES: three-term Lanczos on (I - CCᵀ)A, which is self-adjoint
/// on range(C)ᵀ's complement, with all U-corrections postponed behind a
/// small running accumulator (columns of B R⁻¹). A rolling window of at most
/// p Lanczos vectors feeds the Ritz tracker that produces the next recycle
/// space; memory stays O((k+p) n).
inline std::pair<SolveReport, RecycleSpace> rminres(const LinearOperator& a, const Vector& b,
                                                    const Vector& x0, const RecycleSpace& rs,
                                                    double tol, std::size_t maxit,
                                                    std::size_t p, std::size_t k_next = kAutoK,
                                                    Which which = Which::SmallestMagnitude) {
    if (b.size() != a.n || x0.size() != a.n) throw InvalidInput("rminres: dimension mismatch");
    if (rs.variant != RecycleVariant::Orthogonal && rs.k() > 0)
        throw InvalidInput("rminres: recycle space must be Orthogonal");
    detail::check_declared_symmetric(a);
    if (k_next == kAutoK) k_next = rs.k();

    RitzWindowTracker tracker(k_next, p, which);
    tracker.seed(rs.U, rs.C);
    const std::size_t kc = rs.k();
    SolveReport rep;
    const std::size_t mv0 = *a.matvec_count;
    const double bnorm = norm2(b);
    rep.x = x0;

    auto next_space = [&]() -> RecycleSpace {
        if (k_next == 0) return detail::empty_space(RecycleVariant::Orthogonal);
        std::vector<Vector> u_raw = tracker.finalize();
        if (u_raw.empty()) return detail::empty_space(RecycleVariant::Orthogonal);
        try {
            return prepare_recycle(a, u_raw, RecycleVariant::Orthogonal);
        } catch (const EmptyRecycleSpace&) {
            return detail::empty_space(RecycleVariant::Orthogonal);
        }
    };

    if (bnorm == 0.0) {
        rep.x = zeros(a.n);
        rep.resnorms = {0.0};
        rep.converged = true;
        rep.termination = Termination::Tolerance;
        RecycleSpace nxt = next_space();
        rep.matvecs = *a.matvec_count - mv0;
        return {rep, nxt};
    }
    const double target = tol * bnorm;
    Vector r0 = detail::residual(a, b, rep.x);
    rep.resnorms.push_back(norm2(r0));
    if (rep.resnorms.back() <= target) {
        rep.converged = true;
        rep.termination = Termination::Tolerance;
        RecycleSpace nxt = next_space();
        rep.matvecs = *a.matvec_count - mv0;
        return {rep, nxt};
    }
    auto [rhat, c0] = apply_q_complement(rs, r0);
    detail::add_combo(rs.U, c0, rep.x); // pure-recycle correction, applied upfront
    const double beta1 = norm2(rhat);
    double res = beta1;
    if (beta1 > 0.0) {
        Vector v = rhat;
        scale(v, 1.0 / beta1);
        Vector v_prev = zeros(a.n);
        Vector w1 = zeros(a.n), w2 = zeros(a.n);
        Vector bt1 = zeros(kc), bt2 = zeros(kc), sacc = zeros(kc);
        double c1 = 1.0, s1 = 0.0, c2 = 1.0, s2 = 0.0;
        double phibar = beta1;
        double beta_in = 0.0;
        double scale_est = 0.0;

        while (rep.iterations < maxit) {
            const Vector av = a.apply(v);
            tracker.add(v, av);
            auto [w, bcol] = apply_q_complement(rs, av);
            scale_est = std::max(scale_est, norm2(w));
            const double alpha = dot(v, w);
            axpy(-alpha, v, w);
            axpy(-beta_in, v_prev, w);
            const double beta_next = norm2(w);

            const double eps = s2 * beta_in;
            const double delta = c2 * beta_in;
            const double delta_hat = c1 * delta + s1 * alpha;
            const double gamma_hat = -s1 * delta + c1 * alpha;
            const double gamma = std::hypot(gamma_hat, beta_next);
            double c = 1.0, s = 0.0;
            if (gamma > 0.0) {
                c = gamma_hat / gamma;
                s = beta_next / gamma;
            }
            ++rep.iterations;
            if (gamma == 0.0) {
                rep.resnorms.push_back(std::abs(phibar));
                rep.termination = Termination::Breakdown;
                break;
            }
            Vector wcol = v;
            axpy(-delta_hat, w1, wcol);
            axpy(-eps, w2, wcol);
            scale(wcol, 1.0 / gamma);
            Vector btcol(kc);
            for (std::size_t i = 0; i < kc; ++i)
                btcol[i] = (bcol[i] - delta_hat * bt1[i] - eps * bt2[i]) / gamma;
            const double phi = c * phibar;
            phibar = -s * phibar;
            axpy(phi, wcol, rep.x);
            for (std::size_t i = 0; i < kc; ++i) sacc[i] += phi * btcol[i];
            res = std::abs(phibar);
            rep.resnorms.push_back(res);
            if (!std::isfinite(res)) throw NumericalFailure("rminres: non-finite residual");
            if (debug_checks::enabled()) {
                Vector xfull = rep.x;
                detail::add_combo(rs.U, sacc, xfull, -1.0);
                residual_consistency_check(a, b, xfull, res);
            }
            if (res <= target) {
                rep.converged = true;
                rep.termination = Termination::Tolerance;
                break;
            }
            if (beta_next <= kBreakdownRelTol * scale_est) {
                rep.converged = res <= target;
                rep.termination = Termination::Breakdown;
                break;
            }
            w2 = std::move(w1);
            w1 = std::move(wcol);
            v_prev = v;
            v = std::move(w);
            scale(v, 1.0 / beta_next);
            beta_in = beta_next;
            c2 = c1;
            s2 = s1;
            c1 = c;
            s1 = s;
            bt2 = std::move(bt1);
            bt1 = std::move(btcol);
        }
        detail::add_combo(rs.U, sacc, rep.x, -1.0); // the single postponed U-update
    } else {
        // r0 lay entirely in range(C); the upfront correction already solved
        res = norm2(detail::residual(a, b, rep.x));
        rep.resnorms.push_back(res);
        rep.converged = res <= target;
        rep.termination = rep.converged ? Termination::Tolerance : Termination::Breakdown;
    }
    if (!rep.converged && rep.iterations >= maxit && rep.termination != Termination::Breakdown)
        rep.termination = Termination::MaxIter;
    RecycleSpace nxt = next_space();
    rep.matvecs = *a.matvec_count - mv0;
    return {rep, nxt};
}

/// Recycled CG for SPD systems: standard deflated CG with the Galerkin
/// convention (UᵀAU = I, C = AU). The residual stays orthogonal to U and to
/// all previous residuals; search directions stay A-orthogonal to U at the
/// cost of k dot products per iteration and no extra matvecs. The Ritz
/// tracker is fed the normalized residuals (the Lanczos vectors of the
/// deflated operator), with A·r reconstructed from the q = A·p products.
inline std::pair<SolveReport, RecycleSpace> rcg(const LinearOperator& a, const Vector& b,
                                                const Vector& x0, const RecycleSpace& rs,
                                                double tol, std::size_t maxit, std::size_t p,
                                                std::size_t k_next = kAutoK,
                                                Which which = Which::SmallestMagnitude) {
    if (b.size() != a.n || x0.size() != a.n) throw InvalidInput("rcg: dimension mismatch");
    if (rs.variant != RecycleVariant::GalerkinA && rs.k() > 0)
        throw InvalidInput("rcg: recycle space must be GalerkinA");
    detail::check_declared_spd(a);
    if (k_next == kAutoK) k_next = rs.k();
    const std::size_t kc = rs.k();

    RitzWindowTracker tracker(k_next, p, which);
    tracker.seed(rs.U, rs.C);
    SolveReport rep;
    const std::size_t mv0 = *a.matvec_count;
    const double bnorm = norm2(b);
    rep.x = x0;

    auto next_space = [&]() -> RecycleSpace {
        if (k_next == 0) return detail::empty_space(RecycleVariant::GalerkinA);
        std::vector<Vector> u_raw = tracker.finalize();
        if (u_raw.empty()) return detail::empty_space(RecycleVariant::GalerkinA);
        try {
            return prepare_recycle(a, u_raw, RecycleVariant::GalerkinA);
        } catch (const EmptyRecycleSpace&) {
            return detail::empty_space(RecycleVariant::GalerkinA);
        }
    };

    if (bnorm == 0.0) {
        rep.x = zeros(a.n);
        rep.resnorms = {0.0};
        rep.converged = true;
        rep.termination = Termination::Tolerance;
        RecycleSpace nxt = next_space();
        rep.matvecs = *a.matvec_count - mv0;
        return {rep, nxt};
    }
    const double target = tol * bnorm;
    Vector r = detail::residual(a, b, rep.x);
    rep.resnorms.push_back(norm2(r));
    bool done = rep.resnorms.back() <= target;
    if (!done && kc > 0) {
        for (int pass = 0; pass < 2; ++pass) { // x += U Uᵀr, r -= C Uᵀr
            const Vector cc = detail::dots_against(rs.U, r);
            detail::add_combo(rs.U, cc, rep.x);
            detail::add_combo(rs.C, cc, r, -1.0);
        }
        if (norm2(r) <= target) {
            rep.resnorms.push_back(norm2(r));
            done = true;
        }
    }
    if (done) {
        rep.converged = true;
        rep.termination = Termination::Tolerance;
        RecycleSpace nxt = next_space();
        rep.matvecs = *a.matvec_count - mv0;
        return {rep, nxt};
    }

    double rs_now = dot(r, r);
    Vector mu = kc > 0 ? detail::dots_against(rs.C, r) : Vector();
    Vector pdir = r;
    if (kc > 0) detail::add_combo(rs.U, mu, pdir, -1.0);
    // tracker feed state: the residual that built the current direction
    Vector r_saved = r;
    double r_saved_norm = std::sqrt(rs_now);
    Vector q_prev;
    double beta_saved = 0.0;

    while (rep.iterations < maxit) {
        Vector q = a.apply(pdir);
        if (k_next > 0 && r_saved_norm > 0.0) {
            // A r = q - beta q_prev + C mu, all already in hand
            Vector ar = q;
            if (!q_prev.empty()) axpy(-beta_saved, q_prev, ar);
            if (kc > 0) detail::add_combo(rs.C, mu, ar);
            Vector v = r_saved;
            scale(v, 1.0 / r_saved_norm);
            scale(ar, 1.0 / r_saved_norm);
            tracker.add(v, ar);
        }
        const double pq = dot(pdir, q);
        if (pq <= 0.0) throw NotPositiveDefinite("rcg: p^T A p <= 0");
        const double alpha = rs_now / pq;
        axpy(alpha, pdir, rep.x);
        axpy(-alpha, q, r);
        const double rs_new = dot(r, r);
        ++rep.iterations;
        rep.resnorms.push_back(std::sqrt(rs_new));
        if (!std::isfinite(rs_new)) throw NumericalFailure("rcg: non-finite residual");
        if (debug_checks::enabled()) {
            residual_consistency_check(a, b, rep.x, std::sqrt(rs_new));
            for (const Vector& u : rs.U) // Galerkin constraint r ⊥ range(U)
                if (std::abs(dot(u, r)) > 1e-8 * bnorm * std::max(1.0, norm2(u)))
                    throw NumericalFailure("rcg: residual lost U-orthogonality");
        }
        if (rep.resnorms.back() <= target) {
            rep.converged = true;
            rep.termination = Termination::Tolerance;
            break;
        }
        const double betaf = rs_new / rs_now;
        rs_now = rs_new;
        if (k_next > 0) {
            r_saved = r;
            r_saved_norm = std::sqrt(rs_new);
            q_prev = q;
            beta_saved = betaf;
        }
        if (kc > 0) mu = detail::dots_against(rs.C, r);
        for (std::size_t i = 0; i < pdir.size(); ++i) pdir[i] = r[i] + betaf * pdir[i];
        if (kc > 0) detail::add_combo(rs.U, mu, pdir, -1.0);
    }
    if (!rep.converged && rep.iterations >= maxit) rep.termination = Termination::MaxIter;
    RecycleSpace nxt = next_space();
    rep.matvecs = *a.matvec_count - mv0;
    return {rep, nxt};
}

/// A family (A + γ_ℓ I) x = b sharing the matrix and right-hand side across
/// shifts; γ_1 = 0 is the seed system.
struct ShiftedFamily {
    LinearOperator a; // symmetric
    Vector b;
    std::vector<double> shifts;
};

/// One projected Lanczos basis for (I - CCᵀ)A serves every shift (the
/// deflated Krylov space is shift-invariant for starting vectors in
/// range(C)ᵀ's complement). Each shift then solves the right-hand-form
/// block LS   min || [Cᵀb; ξe1] - [[I + γ CᵀU, B_m],[0, T_m + γ I_m]] [z; y] ||
/// blockwise: Givens on the (shifted) tridiagonal part for y, then the k×k
/// direct solve for z; x = V y + U z. The left form (explicit γVᵀU and γN
/// blocks) is available behind `left_form` as a dense one-shot LS.
/// The shared basis matvecs are attributed to the γ = 0 report.
inline std::vector<SolveReport> solve_shifted_family(const ShiftedFamily& fam,
                                                     const RecycleSpace& rs, std::size_t m,
                                                     double tol, bool left_form = false) {
    const LinearOperator& a = fam.a;
    if (fam.b.size() != a.n) throw InvalidInput("shifted family: dimension mismatch");
    if (fam.shifts.empty() || fam.shifts[0] != 0.0)
        throw InvalidInput("shifted family: shifts must start with 0");
    for (std::size_t i = 0; i < fam.shifts.size(); ++i)
        for (std::size_t j = i + 1; j < fam.shifts.size(); ++j)
            if (fam.shifts[i] == fam.shifts[j])
                throw InvalidInput("shifted family: shifts must be distinct");
    if (rs.variant != RecycleVariant::Orthogonal && rs.k() > 0)
        throw InvalidInput("shifted family: recycle space must be Orthogonal");
    detail::check_declared_symmetric(a);

    const std::size_t k = rs.k();
    const double bnorm = norm2(fam.b);
    const std::size_t mv0 = *a.matvec_count;
    auto [bhat, cb] = apply_q_complement(rs, fam.b);
    const double xi = norm2(bhat);

    ProjectedArnoldiState pas = projected_arnoldi_start(bhat);
    while (!pas.inner.breakdown && pas.j() < m && pas.j() + 1 <= a.n)
        projected_arnoldi_extend(a, rs, pas);
    const std::size_t jmax = pas.j();
    const std::size_t basis_matvecs = *a.matvec_count - mv0;

    DenseMatrix cu(k, k); // CᵀU
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) cu(i, j) = dot(rs.C[i], rs.U[j]);

    // left form only: N from orthogonalizing U against [V_{m+1}, C]
    std::vector<Vector> ncols;
    DenseMatrix nu; // NᵀU
    if (left_form && k > 0) {
        std::vector<Vector> resid;
        for (const Vector& u : rs.U) {
            Vector w = u;
            for (int pass = 0; pass < 2; ++pass) {
                for (const Vector& v : pas.inner.V) axpy(-dot(v, w), v, w);
                for (const Vector& c : rs.C) axpy(-dot(c, w), c, w);
            }
            resid.push_back(std::move(w));
        }
        const ThinQr qr = thin_qr(DenseMatrix::from_columns(resid), 1e-12);
        ncols = qr.Q.columns();
        nu = DenseMatrix(ncols.size(), k);
        for (std::size_t i = 0; i < ncols.size(); ++i)
            for (std::size_t j = 0; j < k; ++j) nu(i, j) = dot(ncols[i], rs.U[j]);
    }

    std::vector<SolveReport> out;
    for (std::size_t sh = 0; sh < fam.shifts.size(); ++sh) {
        const double gamma = fam.shifts[sh];
        SolveReport rep;
        rep.resnorms.push_back(bnorm); // x0 = 0 for every shift
        const double target = tol * bnorm;
        Vector y, z;

        if (!left_form) {
            GivensLs ls(Vector{xi});
            double res = xi;
            std::size_t used = 0;
            for (std::size_t l = 0; l < jmax; ++l) {
                Vector col = pas.inner.hcols[l];
                col[l] += gamma;
                ls.add_column(std::move(col));
                ++used;
                res = ls.resnorm();
                rep.resnorms.push_back(res);
                if (res <= target) break;
            }
            rep.iterations = used;
            y = ls.solve();
            // top block: (I + γ CᵀU) z = Cᵀb - B y, solvable exactly
            if (k > 0) {
                DenseMatrix top = DenseMatrix::identity(k);
                for (std::size_t i = 0; i < k; ++i)
                    for (std::size_t j = 0; j < k; ++j) top(i, j) += gamma * cu(i, j);
                rep.ls_condition = cond_estimate(top);
                Vector rhs = cb;
                for (std::size_t i = 0; i < k; ++i)
                    for (std::size_t l = 0; l < used; ++l)
                        rhs[i] -= pas.bcols[l][i] * y[l];
                if (rep.ls_condition > 1e12) {
                    rep.converged = false;
                    rep.termination = Termination::Breakdown;
                    out.push_back(std::move(rep));
                    continue;
                }
                z = lu_solve(top, rhs);
            }
            rep.converged = res <= target;
            rep.termination = rep.converged
                                  ? Termination::Tolerance
                                  : (pas.inner.breakdown ? Termination::Breakdown
                                                         : Termination::MaxIter);
        } else {
            // full LS over rows [V-block; C-block; N-block]
            const std::size_t vrows = pas.inner.V.size();
            const std::size_t nrows = vrows + k + ncols.size();
            DenseMatrix ls(nrows, jmax + k);
            Vector rhs = zeros(nrows);
            rhs[0] = xi;
            for (std::size_t l = 0; l < jmax; ++l)
                for (std::size_t i = 0; i < pas.inner.hcols[l].size() && i < vrows; ++i)
                    ls(i, l) = pas.inner.hcols[l][i] + (i == l ? gamma : 0.0);
            for (std::size_t i = 0; i < vrows; ++i)
                for (std::size_t j = 0; j < k; ++j)
                    ls(i, jmax + j) = gamma * dot(pas.inner.V[i], rs.U[j]);
            for (std::size_t i = 0; i < k; ++i) {
                rhs[vrows + i] = cb[i];
                for (std::size_t l = 0; l < jmax; ++l) ls(vrows + i, l) = pas.bcols[l][i];
                for (std::size_t j = 0; j < k; ++j)
                    ls(vrows + i, jmax + j) = (i == j ? 1.0 : 0.0) + gamma * cu(i, j);
            }
            for (std::size_t i = 0; i < ncols.size(); ++i)
                for (std::size_t j = 0; j < k; ++j)
                    ls(vrows + k + i, jmax + j) = gamma * nu(i, j);
            const ThinQr qr = thin_qr(ls, 1e-13);
            if (qr.rank > 0)
                rep.ls_condition = std::abs(qr.R(0, qr.pivot_cols[0])) /
                                   std::abs(qr.R(qr.rank - 1, qr.pivot_cols[qr.rank - 1]));
            Vector qtr(qr.rank);
            for (std::size_t c = 0; c < qr.rank; ++c) qtr[c] = dot(qr.Q.col(c), rhs);
            const Vector ypiv = qr_pivot_backsolve(qr, qtr);
            Vector full = zeros(jmax + k);
            for (std::size_t c = 0; c < qr.rank; ++c) full[qr.pivot_cols[c]] = ypiv[c];
            y.assign(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(jmax));
            z.assign(full.begin() + static_cast<std::ptrdiff_t>(jmax), full.end());
            Vector lsr = matvec(ls, full);
            for (std::size_t i = 0; i < nrows; ++i) lsr[i] = rhs[i] - lsr[i];
            const double res = norm2(lsr);
            rep.resnorms.push_back(res);
            rep.iterations = jmax;
            rep.converged = res <= target;
            rep.termination = rep.converged ? Termination::Tolerance : Termination::MaxIter;
        }

        rep.x = zeros(a.n);
        for (std::size_t l = 0; l < y.size(); ++l) axpy(y[l], pas.inner.V[l], rep.x);
        for (std::size_t i = 0; i < z.size(); ++i) axpy(z[i], rs.U[i], rep.x);
        rep.matvecs = sh == 0 ? basis_matvecs : 0;
        if (debug_checks::enabled() && !left_form && rs.k() == 0) {
            // with k = 0 the LS residual is the exact shifted residual
            Vector rr = a.apply_fn(rep.x);
            axpy(gamma, rep.x, rr);
            for (std::size_t i = 0; i < rr.size(); ++i) rr[i] = fam.b[i] - rr[i];
            if (std::abs(norm2(rr) - rep.resnorms.back()) > 1e-8 * bnorm)
                throw NumericalFailure("shifted family: residual identity violated");
        }
        out.push_back(std::move(rep));
    }
    return out;
}

} // namespace recyklos

#endif
