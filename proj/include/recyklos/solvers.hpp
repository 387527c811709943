#ifndef RECYKLOS_SOLVERS_HPP
#define RECYKLOS_SOLVERS_HPP

#include <cmath>
#include <cstddef>

#include "recyklos/arnoldi.hpp"
#include "recyklos/csr.hpp"
#include "recyklos/dense.hpp"
#include "recyklos/errors.hpp"
#include "recyklos/report.hpp"
#include "recyklos/vec.hpp"

namespace recyklos {

namespace detail {

inline Vector residual(const LinearOperator& op, const Vector& b, const Vector& x) {
    Vector r = op.apply(x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    return r;
}

/// Spot-check |u^T A v - v^T A u| on random pairs; symmetry is declared in
/// the manifest, never auto-detected, so this only guards against misuse.
inline void check_declared_symmetric(const LinearOperator& op) {
    std::mt19937_64 rng(0x5ca1ab1ull);
    for (int t = 0; t < 2; ++t) {
        Vector u = random_vector(op.n, rng);
        Vector v = random_vector(op.n, rng);
        Vector au = op.apply(u);
        Vector av = op.apply(v);
        const double scalef = norm2(au) * norm2(v) + norm2(av) * norm2(u) + 1e-300;
        if (std::abs(dot(u, av) - dot(v, au)) > 1e-10 * scalef)
            throw NotSymmetric("operator failed the declared-symmetric spot check");
    }
}

inline void check_declared_spd(const LinearOperator& op) {
    check_declared_symmetric(op);
    std::mt19937_64 rng(0xdecafull);
    for (int t = 0; t < 2; ++t) {
        Vector v = random_vector(op.n, rng);
        Vector av = op.apply(v);
        if (dot(v, av) <= 0.0)
            throw NotPositiveDefinite("operator failed the declared-SPD spot check");
    }
}

} // namespace detail

/// Restarted GMRES; tol is relative to ||b||.
inline SolveReport gmres(const LinearOperator& op, const Vector& b, const Vector& x0,
                         std::size_t restart, double tol, std::size_t maxit) {
    if (b.size() != op.n || x0.size() != op.n) throw InvalidInput("gmres: dimension mismatch");
    if (tol <= 0.0) throw InvalidInput("gmres: tol must be positive");
    if (restart == 0) throw InvalidInput("gmres: restart must be >= 1");
    SolveReport rep;
    const std::size_t mv0 = *op.matvec_count;
    const double bnorm = norm2(b);
    rep.x = x0;
    if (bnorm == 0.0) {
        rep.x = zeros(op.n);
        rep.resnorms = {norm2(detail::residual(op, b, rep.x))};
        rep.converged = true;
        rep.termination = Termination::Tolerance;
        rep.matvecs = *op.matvec_count - mv0;
        return rep;
    }
    const double target = tol * bnorm;
    bool first = true;
    while (true) {
        Vector r = detail::residual(op, b, rep.x);
        const double rn = norm2(r);
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
        ArnoldiState ars = arnoldi_start(r);
        GivensLs ls(Vector{ars.beta});
        double res = rn;
        bool hit_breakdown = false;
        while (ls.size() < restart && rep.iterations < maxit) {
            arnoldi_extend(op, ars);
            ls.add_column(ars.hcols.back());
            ++rep.iterations;
            res = ls.resnorm();
            if (!std::isfinite(res)) throw NumericalFailure("gmres: non-finite residual");
            rep.resnorms.push_back(res);
            if (res <= target || ars.breakdown) {
                hit_breakdown = ars.breakdown;
                break;
            }
        }
        const Vector y = ls.solve();
        for (std::size_t l = 0; l < y.size(); ++l) axpy(y[l], ars.V[l], rep.x);
        if (res <= target) {
            rep.converged = true;
            rep.termination = hit_breakdown ? Termination::Breakdown : Termination::Tolerance;
            break;
        }
        if (hit_breakdown) {
            // the Krylov space is invariant; the LS solution is exact
            rep.converged = norm2(detail::residual(op, b, rep.x)) <= target;
            rep.termination = Termination::Breakdown;
            break;
        }
        if (rep.iterations >= maxit) {
            rep.termination = Termination::MaxIter;
            break;
        }
    }
    rep.matvecs = *op.matvec_count - mv0;
    return rep;
}

/// Restarted FOM: Galerkin condition H_j y = beta e_1; the residual norm is
/// h_{j+1,j} |e_j^T y|. A singular H_j skips the update at that step.
inline SolveReport fom(const LinearOperator& op, const Vector& b, const Vector& x0,
                       std::size_t restart, double tol, std::size_t maxit) {
    if (b.size() != op.n || x0.size() != op.n) throw InvalidInput("fom: dimension mismatch");
    if (tol <= 0.0) throw InvalidInput("fom: tol must be positive");
    SolveReport rep;
    const std::size_t mv0 = *op.matvec_count;
    const double bnorm = norm2(b);
    rep.x = x0;
    if (bnorm == 0.0) {
        rep.x = zeros(op.n);
        rep.resnorms = {0.0};
        rep.converged = true;
        rep.termination = Termination::Tolerance;
        return rep;
    }
    const double target = tol * bnorm;
    bool first = true;
    while (true) {
        Vector r = detail::residual(op, b, rep.x);
        const double rn = norm2(r);
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
        ArnoldiState ars = arnoldi_start(r);
        Vector y_good;
        double res = rn;
        bool hit_breakdown = false;
        while (ars.j() < restart && rep.iterations < maxit) {
            arnoldi_extend(op, ars);
            ++rep.iterations;
            const std::size_t j = ars.j();
            DenseMatrix hj(j, j);
            for (std::size_t l = 0; l < j; ++l)
                for (std::size_t i = 0; i < std::min(j, l + 2); ++i) hj(i, l) = ars.hcols[l][i];
            Vector rhs = zeros(j);
            rhs[0] = ars.beta;
            try {
                Vector y = lu_solve(hj, rhs);
                res = ars.hcols[j - 1][j] * std::abs(y[j - 1]);
                y_good = std::move(y);
            } catch (const SingularMatrix&) {
                // documented FOM behavior: no Galerkin iterate this step
            }
            if (!std::isfinite(res)) throw NumericalFailure("fom: non-finite residual");
            rep.resnorms.push_back(res);
            if (res <= target || ars.breakdown) {
                hit_breakdown = ars.breakdown;
                break;
            }
        }
        for (std::size_t l = 0; l < y_good.size(); ++l) axpy(y_good[l], ars.V[l], rep.x);
        if (res <= target) {
            rep.converged = true;
            rep.termination = hit_breakdown ? Termination::Breakdown : Termination::Tolerance;
            break;
        }
        if (hit_breakdown) {
            rep.converged = norm2(detail::residual(op, b, rep.x)) <= target;
            rep.termination = Termination::Breakdown;
            break;
        }
        if (rep.iterations >= maxit) {
            rep.termination = Termination::MaxIter;
            break;
        }
    }
    rep.matvecs = *op.matvec_count - mv0;
    return rep;
}

/// MINRES for symmetric (possibly indefinite) operators. Three-term Lanczos
/// with the change of basis W_j = V_j R_j^{-1}; memory O(n).
inline SolveReport minres(const LinearOperator& op, const Vector& b, const Vector& x0,
                          double tol, std::size_t maxit) {
    if (b.size() != op.n || x0.size() != op.n) throw InvalidInput("minres: dimension mismatch");
    detail::check_declared_symmetric(op);
    SolveReport rep;
    const std::size_t mv0 = *op.matvec_count;
    const double bnorm = norm2(b);
    rep.x = x0;
    if (bnorm == 0.0) {
        rep.x = zeros(op.n);
        rep.resnorms = {0.0};
        rep.converged = true;
        rep.termination = Termination::Tolerance;
        rep.matvecs = *op.matvec_count - mv0;
        return rep;
    }
    const double target = tol * bnorm;
    Vector r = detail::residual(op, b, rep.x);
    double beta = norm2(r);
    rep.resnorms.push_back(beta);
    if (beta <= target) {
        rep.converged = true;
        rep.termination = Termination::Tolerance;
        rep.matvecs = *op.matvec_count - mv0;
        return rep;
    }
    Vector v = r;
    scale(v, 1.0 / beta);
    Vector v_prev = zeros(op.n);
    Vector w1 = zeros(op.n), w2 = zeros(op.n);
    double c1 = 1.0, s1 = 0.0, c2 = 1.0, s2 = 0.0;
    double phibar = beta;
    double beta_in = 0.0; // subdiagonal entering the current column
    double scale_est = 0.0;

    while (rep.iterations < maxit) {
        Vector p = op.apply(v);
        scale_est = std::max(scale_est, norm2(p));
        const double alpha = dot(v, p);
        axpy(-alpha, v, p);
        axpy(-beta_in, v_prev, p);
        const double beta_next = norm2(p);

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
            // T is exactly singular in this direction; nothing to update
            rep.resnorms.push_back(std::abs(phibar));
            rep.termination = Termination::Breakdown;
            break;
        }
        Vector w = v;
        axpy(-delta_hat, w1, w);
        axpy(-eps, w2, w);
        scale(w, 1.0 / gamma);
        const double phi = c * phibar;
        phibar = -s * phibar;
        axpy(phi, w, rep.x);
        rep.resnorms.push_back(std::abs(phibar));
        if (!std::isfinite(phibar)) throw NumericalFailure("minres: non-finite residual");
        if (std::abs(phibar) <= target) {
            rep.converged = true;
            rep.termination = Termination::Tolerance;
            break;
        }
        if (beta_next <= kBreakdownRelTol * scale_est) {
            rep.converged = std::abs(phibar) <= target;
            rep.termination = Termination::Breakdown;
            break;
        }
        w2 = std::move(w1);
        w1 = std::move(w);
        v_prev = v;
        v = std::move(p);
        scale(v, 1.0 / beta_next);
        beta_in = beta_next;
        c2 = c1;
        s2 = s1;
        c1 = c;
        s1 = s;
    }
    if (!rep.converged && rep.iterations >= maxit && rep.termination != Termination::Breakdown)
        rep.termination = Termination::MaxIter;
    rep.matvecs = *op.matvec_count - mv0;
    return rep;
}

/// Conjugate gradients for SPD operators.
inline SolveReport cg(const LinearOperator& op, const Vector& b, const Vector& x0, double tol,
                      std::size_t maxit) {
    if (b.size() != op.n || x0.size() != op.n) throw InvalidInput("cg: dimension mismatch");
    detail::check_declared_spd(op);
    SolveReport rep;
    const std::size_t mv0 = *op.matvec_count;
    const double bnorm = norm2(b);
    rep.x = x0;
    if (bnorm == 0.0) {
        rep.x = zeros(op.n);
        rep.resnorms = {0.0};
        rep.converged = true;
        rep.termination = Termination::Tolerance;
        rep.matvecs = *op.matvec_count - mv0;
        return rep;
    }
    const double target = tol * bnorm;
    Vector r = detail::residual(op, b, rep.x);
    double rs = dot(r, r);
    rep.resnorms.push_back(std::sqrt(rs));
    if (rep.resnorms.back() <= target) {
        rep.converged = true;
        rep.termination = Termination::Tolerance;
        rep.matvecs = *op.matvec_count - mv0;
        return rep;
    }
    Vector p = r;
    while (rep.iterations < maxit) {
        Vector q = op.apply(p);
        const double pq = dot(p, q);
        if (pq <= 0.0) throw NotPositiveDefinite("cg: p^T A p <= 0");
        const double alpha = rs / pq;
        axpy(alpha, p, rep.x);
        axpy(-alpha, q, r);
        const double rs_new = dot(r, r);
        ++rep.iterations;
        rep.resnorms.push_back(std::sqrt(rs_new));
        if (!std::isfinite(rs_new)) throw NumericalFailure("cg: non-finite residual");
        if (rep.resnorms.back() <= target) {
            rep.converged = true;
            rep.termination = Termination::Tolerance;
            break;
        }
        const double betaf = rs_new / rs;
        rs = rs_new;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + betaf * p[i];
    }
    if (!rep.converged && rep.iterations >= maxit) rep.termination = Termination::MaxIter;
    rep.matvecs = *op.matvec_count - mv0;
    return rep;
}

} // namespace recyklos

#endif
