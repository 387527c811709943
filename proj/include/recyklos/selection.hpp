#ifndef RECYKLOS_SELECTION_HPP
#define RECYKLOS_SELECTION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "recyklos/csr.hpp"
#include "recyklos/dense.hpp"
#include "recyklos/errors.hpp"
#include "recyklos/recycle.hpp"
#include "recyklos/vec.hpp"

namespace recyklos {

enum class SelectorKind { HarmonicRitz, Ritz, PodSnapshots, PreviousSolutions, None };
enum class Which { SmallestMagnitude, LargestMagnitude };

/// Selector configuration (from the manifest). p = 0 means the default
/// window of 2k. The default which targets small-magnitude modes: for
/// SPD/elliptic problems the low end of the spectrum is what hampers
/// convergence and is stable under local matrix changes.
struct SelectorSpec {
    SelectorKind kind = SelectorKind::None;
    std::size_t k = 0;
    Which which = Which::SmallestMagnitude;
    std::size_t p = 0;

    std::size_t window() const { return p > 0 ? p : 2 * k; }
};

namespace detail {

/// indices of values ordered by |value|, per `which`
inline std::vector<std::size_t> order_by_magnitude(const std::vector<double>& mag, Which which) {
    std::vector<std::size_t> idx(mag.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return which == Which::SmallestMagnitude ? mag[a] < mag[b] : mag[a] > mag[b];
    });
    return idx;
}

} // namespace detail

/// Harmonic Ritz vectors from the augmented Arnoldi data of a cycle.
/// With S = [U V_j], W = [C V_{j+1}] (orthonormal since the v's live in
/// range(C)^⊥) and G = [[I, B_j], [0, H_j]] so that A S = W G, the harmonic
/// condition  A w - θ w ⊥ A·range(S), w = S z  becomes the small generalized
/// problem  GᵀG z = θ Gᵀ(WᵀS) z.  Selection is by |θ| per `which`; an
/// ill-conditioned pencil falls back to plain Ritz (SᵀA S z = θ SᵀS z in the
/// same coordinates) with a warning.
inline std::vector<Vector> harmonic_ritz_select(const RecycleSpace& rs,
                                                const ProjectedArnoldiState& pas, std::size_t k,
                                                Which which) {
    const std::size_t kc = rs.k();
    const std::size_t j = pas.j();
    if (kc + j < k) throw InvalidInput("harmonic_ritz_select: space smaller than k");
    if (k == 0) return {};

    // S columns (not materialized as a matrix; combos formed at the end)
    std::vector<const Vector*> s_cols;
    for (const Vector& u : rs.U) s_cols.push_back(&u);
    for (std::size_t l = 0; l < j; ++l) s_cols.push_back(&pas.inner.V[l]);
    const std::size_t sdim = kc + j;
    const std::size_t wdim = kc + pas.inner.V.size(); // kc + j (+1 unless breakdown)

    DenseMatrix g(wdim, sdim); // [[I, B],[0, H]]
    for (std::size_t i = 0; i < kc; ++i) g(i, i) = 1.0;
    for (std::size_t l = 0; l < j; ++l) {
        for (std::size_t i = 0; i < kc; ++i) g(i, l + kc) = pas.bcols[l][i];
        for (std::size_t i = 0; i < pas.inner.hcols[l].size() && kc + i < wdim; ++i)
            g(kc + i, kc + l) = pas.inner.hcols[l][i];
    }
    DenseMatrix ws(wdim, sdim); // WᵀS, by inner products
    for (std::size_t i = 0; i < kc; ++i)
        for (std::size_t c = 0; c < sdim; ++c) ws(i, c) = dot(rs.C[i], *s_cols[c]);
    for (std::size_t i = kc; i < wdim; ++i)
        for (std::size_t c = 0; c < sdim; ++c) ws(i, c) = dot(pas.inner.V[i - kc], *s_cols[c]);

    const DenseMatrix gt = g.transposed();
    GeneralEig eig;
    try {
        eig = generalized_eig_small(matmul(gt, g), matmul(gt, ws));
    } catch (const IllConditionedPencil&) {
        std::cerr << "recyklos: harmonic Ritz pencil ill-conditioned, falling back to Ritz\n";
        DenseMatrix ss(sdim, sdim);
        for (std::size_t a = 0; a < sdim; ++a)
            for (std::size_t b = 0; b < sdim; ++b) ss(a, b) = dot(*s_cols[a], *s_cols[b]);
        eig = generalized_eig_small(matmul(ws.transposed(), g), ss);
    }

    std::vector<double> mag(eig.values_re.size());
    for (std::size_t i = 0; i < mag.size(); ++i)
        mag[i] = std::hypot(eig.values_re[i], eig.values_im[i]);
    std::vector<Vector> out;
    for (std::size_t i : detail::order_by_magnitude(mag, which)) {
        if (out.size() == k) break;
        Vector w = zeros(s_cols.empty() ? 0 : s_cols[0]->size());
        for (std::size_t c = 0; c < sdim; ++c) axpy(eig.vectors(c, i), *s_cols[c], w);
        const double nrm = norm2(w);
        if (nrm == 0.0) continue;
        scale(w, 1.0 / nrm);
        out.push_back(std::move(w));
    }
    return out;
}

/// Plain Ritz vectors from the same augmented Arnoldi data:
/// Aw - θw ⊥ range(S) gives (SᵀW) G z = θ (SᵀS) z. Matvec-free companion to
/// harmonic_ritz_select (and its documented fallback target).
inline std::vector<Vector> ritz_select(const RecycleSpace& rs, const ProjectedArnoldiState& pas,
                                       std::size_t k, Which which) {
    const std::size_t kc = rs.k();
    const std::size_t j = pas.j();
    if (kc + j < k) throw InvalidInput("ritz_select: space smaller than k");
    if (k == 0) return {};
    std::vector<const Vector*> s_cols;
    for (const Vector& u : rs.U) s_cols.push_back(&u);
    for (std::size_t l = 0; l < j; ++l) s_cols.push_back(&pas.inner.V[l]);
    const std::size_t sdim = kc + j;
    const std::size_t wdim = kc + pas.inner.V.size();
    DenseMatrix g(wdim, sdim);
    for (std::size_t i = 0; i < kc; ++i) g(i, i) = 1.0;
    for (std::size_t l = 0; l < j; ++l) {
        for (std::size_t i = 0; i < kc; ++i) g(i, l + kc) = pas.bcols[l][i];
        for (std::size_t i = 0; i < pas.inner.hcols[l].size() && kc + i < wdim; ++i)
            g(kc + i, kc + l) = pas.inner.hcols[l][i];
    }
    DenseMatrix sw(sdim, wdim), ss(sdim, sdim);
    for (std::size_t r = 0; r < sdim; ++r) {
        for (std::size_t i = 0; i < kc; ++i) sw(r, i) = dot(*s_cols[r], rs.C[i]);
        for (std::size_t i = kc; i < wdim; ++i) sw(r, i) = dot(*s_cols[r], pas.inner.V[i - kc]);
        for (std::size_t c = 0; c < sdim; ++c) ss(r, c) = dot(*s_cols[r], *s_cols[c]);
    }
    const GeneralEig eig = generalized_eig_small(matmul(sw, g), ss);
    std::vector<double> mag(eig.values_re.size());
    for (std::size_t i = 0; i < mag.size(); ++i)
        mag[i] = std::hypot(eig.values_re[i], eig.values_im[i]);
    std::vector<Vector> out;
    for (std::size_t i : detail::order_by_magnitude(mag, which)) {
        if (out.size() == k) break;
        Vector w = zeros(s_cols[0]->size());
        for (std::size_t c = 0; c < sdim; ++c) axpy(eig.vectors(c, i), *s_cols[c], w);
        const double nrm = norm2(w);
        if (nrm == 0.0) continue;
        scale(w, 1.0 / nrm);
        out.push_back(std::move(w));
    }
    return out;
}

/// Rayleigh-Ritz over span(U) + span(window): orthonormalize the combined
/// columns, assemble the restriction of A explicitly, and return the k Ritz
/// vectors chosen by |θ|. Reference implementation — it spends matvecs to
/// form the restriction; solvers use RitzWindowTracker, which assembles the
/// same small problem from quantities already available in the iteration.
inline std::vector<Vector> ritz_window_select(const LinearOperator& a,
                                              const std::vector<Vector>& u,
                                              const std::vector<Vector>& window, std::size_t k,
                                              Which which) {
    if (k == 0) return {};
    std::vector<Vector> all = u;
    all.insert(all.end(), window.begin(), window.end());
    if (all.empty()) return {};
    const ThinQr qr = thin_qr(DenseMatrix::from_columns(all), 1e-12);
    const std::vector<Vector> s = qr.Q.columns();
    const std::size_t m = s.size();
    DenseMatrix g(m, m);
    for (std::size_t c = 0; c < m; ++c) {
        const Vector as = a.apply(s[c]);
        for (std::size_t r = 0; r < m; ++r) g(r, c) = dot(s[r], as);
    }
    for (std::size_t r = 0; r < m; ++r) // symmetrize (A is symmetric by contract)
        for (std::size_t c = r + 1; c < m; ++c) g(r, c) = g(c, r) = 0.5 * (g(r, c) + g(c, r));
    const SymEig eig = sym_eig(g);
    std::vector<double> mag(m);
    for (std::size_t i = 0; i < m; ++i) mag[i] = std::abs(eig.values[i]);
    std::vector<Vector> out;
    for (std::size_t i : detail::order_by_magnitude(mag, which)) {
        if (out.size() == std::min(k, m)) break;
        Vector w = zeros(a.n);
        for (std::size_t c = 0; c < m; ++c) axpy(eig.vectors(c, i), s[c], w);
        out.push_back(std::move(w));
    }
    return out;
}

/// Leading left singular vectors of the snapshot matrix (columns as-is, not
/// mean-centered).
inline std::vector<Vector> pod_select(const DenseMatrix& snapshots, std::size_t k) {
    if (snapshots.ncols < 1) throw InvalidInput("pod_select: no snapshots");
    const Svd svd = svd_small(snapshots);
    std::vector<Vector> out;
    for (std::size_t c = 0; c < std::min(k, svd.left.ncols); ++c) out.push_back(svd.left.col(c));
    return out;
}

/// The k most recent solutions, orthonormalized; dependent directions drop.
inline std::vector<Vector> previous_solutions_select(const std::vector<Vector>& history,
                                                     std::size_t k) {
    if (history.empty()) throw InvalidInput("previous_solutions_select: empty history");
    if (k == 0) return {};
    std::vector<Vector> recent;
    const std::size_t take = std::min(k, history.size());
    for (std::size_t i = history.size() - take; i < history.size(); ++i)
        recent.push_back(history[i]);
    const ThinQr qr = thin_qr(DenseMatrix::from_columns(recent), 1e-12);
    return qr.Q.columns();
}

/// Running Ritz selection for the short-recurrence solvers: holds the
/// candidate recycle basis U_next plus a rolling window of at most p recent
/// basis vectors. Every time the window fills, U_next is overwritten by the
/// k best Ritz vectors of A restricted to span(U_next) + span(window)
/// (thick-restart style). No matvecs are spent: the restriction of A is
/// assembled from the raw products A·v that the iteration computes anyway
/// (entries sᵀ(Av) are exact for symmetric A), and after an overwrite the
/// locked block satisfies U_nextᵀA U_next = diag(θ), U_nextᵀU_next = I by
/// construction.
class RitzWindowTracker {
  public:
    RitzWindowTracker(std::size_t k, std::size_t p, Which which)
        : k_(k), p_(std::max<std::size_t>(p, 1)), which_(which) {}

    /// Seed with the current recycle pair (U, C = A·U); their A-restriction
    /// UᵀAU = UᵀC comes free of matvecs.
    void seed(const std::vector<Vector>& u, const std::vector<Vector>& c) {
        if (k_ == 0) return;
        s_ = u;
        locked_ = s_.size();
        const std::size_t m = s_.size();
        sas_ = DenseMatrix(m, m);
        ss_ = DenseMatrix(m, m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                sas_(i, j) = dot(u[i], c[j]);
                ss_(i, j) = dot(u[i], u[j]);
            }
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j)
                sas_(i, j) = sas_(j, i) = 0.5 * (sas_(i, j) + sas_(j, i));
    }

    /// Offer one unit basis vector together with its raw product A·v.
    void add(const Vector& v, const Vector& av) {
        if (k_ == 0) return;
        const std::size_t m = s_.size();
        DenseMatrix sas(m + 1, m + 1), ss(m + 1, m + 1);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                sas(i, j) = sas_(i, j);
                ss(i, j) = ss_(i, j);
            }
        for (std::size_t i = 0; i < m; ++i) {
            const double g = dot(s_[i], av);
            sas(i, m) = sas(m, i) = g;
            const double h = dot(s_[i], v);
            ss(i, m) = ss(m, i) = h;
        }
        sas(m, m) = dot(v, av);
        ss(m, m) = dot(v, v);
        sas_ = std::move(sas);
        ss_ = std::move(ss);
        s_.push_back(v);
        if (s_.size() - locked_ >= p_) compress();
    }

    /// Final downselect; returns at most k vectors spanning the kept Ritz
    /// directions (empty when nothing was tracked).
    std::vector<Vector> finalize() {
        if (k_ == 0 || s_.empty()) return {};
        compress();
        return s_;
    }

  private:
    void compress() {
        const std::size_t m = s_.size();
        if (m == 0) return;
        // orthonormalize in coefficient space: ss = V D Vᵀ, keep solid modes
        const SymEig gram = sym_eig(ss_);
        double dmax = 0.0;
        for (double d : gram.values) dmax = std::max(dmax, d);
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < m; ++i)
            if (gram.values[i] > 1e-10 * dmax) keep.push_back(i);
        const std::size_t r = keep.size();
        if (r == 0) {
            s_.clear();
            locked_ = 0;
            return;
        }
        DenseMatrix t(m, r); // T = V D^{-1/2}: SᵀS-orthonormal coordinates
        for (std::size_t c = 0; c < r; ++c) {
            const double d = 1.0 / std::sqrt(gram.values[keep[c]]);
            for (std::size_t i = 0; i < m; ++i) t(i, c) = gram.vectors(i, keep[c]) * d;
        }
        DenseMatrix rest = matmul(matmul(t.transposed(), sas_), t);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = i + 1; j < r; ++j)
                rest(i, j) = rest(j, i) = 0.5 * (rest(i, j) + rest(j, i));
        const SymEig eig = sym_eig(rest);
        std::vector<double> mag(r);
        for (std::size_t i = 0; i < r; ++i) mag[i] = std::abs(eig.values[i]);
        std::vector<std::size_t> order = detail::order_by_magnitude(mag, which_);
        const std::size_t kept = std::min(k_, r);

        std::vector<Vector> next;
        Vector theta;
        for (std::size_t o = 0; o < kept; ++o) {
            const std::size_t e = order[o];
            Vector w = zeros(s_[0].size());
            for (std::size_t i = 0; i < m; ++i) {
                double zi = 0.0;
                for (std::size_t c = 0; c < r; ++c) zi += t(i, c) * eig.vectors(c, e);
                axpy(zi, s_[i], w);
            }
            next.push_back(std::move(w));
            theta.push_back(eig.values[e]);
        }
        s_ = std::move(next);
        locked_ = s_.size();
        sas_ = DenseMatrix(locked_, locked_);
        ss_ = DenseMatrix::identity(locked_);
        for (std::size_t i = 0; i < locked_; ++i) sas_(i, i) = theta[i];
    }

    std::size_t k_;
    std::size_t p_;
    Which which_;
    std::size_t locked_ = 0;     // leading columns of s_ that are Ritz-locked
    std::vector<Vector> s_;      // locked block followed by the window
    DenseMatrix sas_;            // SᵀAS
    DenseMatrix ss_;             // SᵀS
};

} // namespace recyklos

#endif
