#ifndef RECYKLOS_GENERATE_HPP
#define RECYKLOS_GENERATE_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "recyklos/csr.hpp"
#include "recyklos/errors.hpp"
#include "recyklos/vec.hpp"

namespace recyklos {

struct GeneratedSystem {
    CsrMatrix a;
    Vector b;
    bool symmetric = false;
    bool spd = false;
};

struct GenSpec {
    std::string kind; // "laplacian2d" or "diag_perturb"
    std::size_t n = 0;
    std::size_t count = 1;
    double perturb = 0.0;
    std::uint64_t seed = 0;
};

namespace detail {

/// 5-point finite-volume Laplacian on a sqrt(n) x sqrt(n) grid with
/// Dirichlet boundary, per-edge conductivities ch (horizontal) and cv
/// (vertical).
inline CsrMatrix assemble_laplacian2d(std::size_t g, const std::vector<double>& ch,
                                      const std::vector<double>& cv) {
    const std::size_t n = g * g;
    auto idx = [g](std::size_t r, std::size_t c) { return r * g + c; };
    // ch[r * (g+1) + c]: edge between (r, c-1) and (r, c), c = 0..g
    // cv[r * g + c]: edge between (r-1, c) and (r, c), r = 0..g
    std::vector<std::tuple<std::size_t, std::size_t, double>> t;
    for (std::size_t r = 0; r < g; ++r)
        for (std::size_t c = 0; c < g; ++c) {
            const double left = ch[r * (g + 1) + c];
            const double right = ch[r * (g + 1) + c + 1];
            const double up = cv[r * g + c];
            const double down = cv[(r + 1) * g + c];
            t.emplace_back(idx(r, c), idx(r, c), left + right + up + down);
            if (c > 0) t.emplace_back(idx(r, c), idx(r, c - 1), -left);
            if (c + 1 < g) t.emplace_back(idx(r, c), idx(r, c + 1), -right);
            if (r > 0) t.emplace_back(idx(r, c), idx(r - 1, c), -up);
            if (r + 1 < g) t.emplace_back(idx(r, c), idx(r + 1, c), -down);
        }
    return CsrMatrix::from_triplets(n, n, std::move(t));
}

} // namespace detail

/// Deterministic sequences of slowly changing systems, sized for desk-scale
/// experiments.
///   laplacian2d — SPD 5-point stencil; each system multiplies every edge
///   conductivity of the previous one by (1 + perturb * u), |u| < 1, so
///   ||A_{i+1} - A_i||_F <= perturb * ||A_i||_F entry by entry.
///   diag_perturb — diagonally dominant nonsymmetric matrix; each system
///   edits a handful of diagonal entries by a relative amount.
inline std::vector<GeneratedSystem> generate_sequence(const GenSpec& spec) {
    if (spec.n < 4) throw InvalidInput("generate_sequence: n >= 4 required");
    if (spec.count < 1) throw InvalidInput("generate_sequence: count >= 1 required");
    if (spec.perturb < 0.0 || spec.perturb >= 1.0)
        throw InvalidInput("generate_sequence: perturbation must be in [0, 1)");
    std::mt19937_64 rng(spec.seed);
    std::vector<GeneratedSystem> out;

    if (spec.kind == "laplacian2d") {
        const std::size_t g = static_cast<std::size_t>(std::lround(std::sqrt(double(spec.n))));
        if (g * g != spec.n)
            throw InvalidInput("generate_sequence: laplacian2d needs a perfect-square n");
        std::vector<double> ch(g * (g + 1), 1.0), cv((g + 1) * g, 1.0);
        for (std::size_t i = 0; i < spec.count; ++i) {
            if (i > 0 && spec.perturb > 0.0) {
                for (double& c : ch) c *= 1.0 + spec.perturb * rand_sym(rng);
                for (double& c : cv) c *= 1.0 + spec.perturb * rand_sym(rng);
            }
            GeneratedSystem s;
            s.a = detail::assemble_laplacian2d(g, ch, cv);
            s.b = ones(spec.n);
            s.symmetric = true;
            s.spd = true;
            out.push_back(std::move(s));
        }
    } else if (spec.kind == "diag_perturb") {
        const std::size_t n = spec.n;
        std::vector<double> diag(n);
        std::vector<std::tuple<std::size_t, std::size_t, double>> off;
        for (std::size_t i = 0; i < n; ++i) diag[i] = 4.0 + 2.0 * rand_unit(rng);
        for (std::size_t i = 0; i < n; ++i)
            for (int e = 0; e < 3; ++e) {
                const std::size_t j = rng() % n;
                if (j != i) off.emplace_back(i, j, rand_sym(rng));
            }
        for (std::size_t i = 0; i < spec.count; ++i) {
            if (i > 0 && spec.perturb > 0.0) {
                const std::size_t edits = std::max<std::size_t>(1, n / 10);
                for (std::size_t e = 0; e < edits; ++e)
                    diag[rng() % n] *= 1.0 + spec.perturb * rand_sym(rng);
            }
            auto t = off;
            for (std::size_t d = 0; d < n; ++d) t.emplace_back(d, d, diag[d]);
            GeneratedSystem s;
            s.a = CsrMatrix::from_triplets(n, n, std::move(t));
            s.b = ones(n);
            out.push_back(std::move(s));
        }
    } else {
        throw InvalidInput("generate_sequence: unknown kind '" + spec.kind + "'");
    }
    return out;
}

} // namespace recyklos

#endif
