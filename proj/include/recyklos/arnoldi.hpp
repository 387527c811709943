#ifndef RECYKLOS_ARNOLDI_HPP
#define RECYKLOS_ARNOLDI_HPP

#include <cstddef>
#include <vector>

#include "recyklos/csr.hpp"
#include "recyklos/dense.hpp"
#include "recyklos/errors.hpp"
#include "recyklos/vec.hpp"

namespace recyklos {

/// Arnoldi factorization op V_j = V_{j+1} H_j, grown one column per call.
/// V has orthonormal columns, H is upper Hessenberg (stored by column),
/// beta = norm of the starting vector.
struct ArnoldiState {
    std::vector<Vector> V;      // j+1 basis vectors (j+2 after extension without breakdown)
    std::vector<Vector> hcols;  // column l has l+2 entries
    double beta = 0.0;
    bool breakdown = false;
    double op_norm_scale = 0.0; // running max of ||op v_l||; breakdown threshold scale

    std::size_t j() const { return hcols.size(); }

    DenseMatrix hessenberg() const {
        const std::size_t m = hcols.size();
        DenseMatrix h(m + 1, m);
        for (std::size_t l = 0; l < m; ++l)
            for (std::size_t i = 0; i < hcols[l].size() && i <= l + 1; ++i)
                h(i, l) = hcols[l][i];
        return h;
    }
};

inline ArnoldiState arnoldi_start(const Vector& start) {
    ArnoldiState s;
    s.beta = norm2(start);
    if (s.beta == 0.0) {
        s.breakdown = true;
        return s;
    }
    Vector v = start;
    scale(v, 1.0 / s.beta);
    s.V.push_back(std::move(v));
    return s;
}

inline constexpr double kBreakdownRelTol = 1e-14;

namespace detail {

inline void arnoldi_debug_invariants(const ArnoldiState& s) {
    // orthonormality of V
    for (std::size_t a = 0; a < s.V.size(); ++a)
        for (std::size_t b = a; b < s.V.size(); ++b) {
            const double g = dot(s.V[a], s.V[b]) - (a == b ? 1.0 : 0.0);
            if (std::abs(g) > 1e-10)
                throw NumericalFailure("arnoldi: basis lost orthonormality");
        }
}

} // namespace detail

/// One Arnoldi step: modified Gram-Schmidt plus one full reorthogonalization
/// pass. Appends column j+1 of H and basis vector v_{j+2}. A subdiagonal
/// entry below 1e-14 * (running norm scale) flags happy breakdown; the state
/// is still extended with the new H column, but no new basis vector.
inline void arnoldi_extend(const LinearOperator& op, ArnoldiState& state) {
    if (state.breakdown) throw InvalidInput("arnoldi_extend: state already broke down");
    const std::size_t j = state.j();
    if (j + 1 > op.n) throw InvalidInput("arnoldi_extend: j = n reached");

    Vector w = op.apply(state.V[j]);
    state.op_norm_scale = std::max(state.op_norm_scale, norm2(w));
    Vector h(j + 2, 0.0);
    for (std::size_t i = 0; i <= j; ++i) {
        const double c = dot(state.V[i], w);
        axpy(-c, state.V[i], w);
        h[i] = c;
    }
    // one full reorthogonalization pass, always on
    for (std::size_t i = 0; i <= j; ++i) {
        const double c = dot(state.V[i], w);
        axpy(-c, state.V[i], w);
        h[i] += c;
    }
    const double hh = norm2(w);
    h[j + 1] = hh;
    state.hcols.push_back(std::move(h));
    if (hh <= kBreakdownRelTol * state.op_norm_scale) {
        state.breakdown = true;
    } else {
        scale(w, 1.0 / hh);
        state.V.push_back(std::move(w));
    }
    if (debug_checks::enabled()) detail::arnoldi_debug_invariants(state);
}

} // namespace recyklos

#endif
