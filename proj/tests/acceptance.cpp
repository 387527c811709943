// Acceptance gate: one line per criterion, exit 0 only when all pass.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "recyklos/recyklos.hpp"
#include "test_helpers.hpp"

using namespace recyklos;
using testutil::diag_matrix;
using testutil::random_shifted;
using testutil::random_spd;
using testutil::random_sym;

namespace {

int g_failures = 0;

void report(int criterion, bool ok, const std::string& what) {
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, what.c_str());
    if (!ok) ++g_failures;
}

std::vector<Vector> random_columns(std::size_t n, std::size_t k, std::mt19937_64& rng) {
    std::vector<Vector> u(k);
    for (Vector& c : u) c = random_vector(n, rng);
    return u;
}

// symmetric with log-spaced spectrum in [1, 16]: short-recurrence solvers keep
// per-iteration optimality in floating point only while solves stay short
std::shared_ptr<DenseMatrix> spectrum_sym(std::size_t n, std::mt19937_64& rng) {
    std::vector<Vector> cols(n);
    for (Vector& c : cols) c = random_vector(n, rng);
    const ThinQr qr = thin_qr(DenseMatrix::from_columns(cols), 1e-14);
    auto m = std::make_shared<DenseMatrix>(n, n);
    for (std::size_t l = 0; l < n; ++l) {
        const double lam = std::pow(16.0, double(l) / double(n - 1));
        const Vector q = qr.Q.col(l);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) (*m)(i, j) += lam * q[i] * q[j];
    }
    return m;
}

Vector unit_rhs(std::size_t n, std::mt19937_64& rng) {
    Vector b = random_vector(n, rng);
    scale(b, 1.0 / norm2(b));
    return b;
}

LinearOperator deflate(const RecycleSpace& rs, const LinearOperator& a) {
    LinearOperator d;
    d.n = a.n;
    d.apply_fn = [&rs, f = a.apply_fn](const Vector& x) {
        return apply_q_complement(rs, f(x)).first;
    };
    return d;
}

// --------------------------------------------------------------- criterion 1
bool optimality_suite() {
    std::mt19937_64 rng(2001);
    double worst = 0.0;
    const std::size_t sizes[] = {24, 32, 48, 64, 96, 128, 160, 192, 224, 256};
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = sizes[trial % 10];
        const Vector b = unit_rhs(n, rng);
        const Vector x0 = zeros(n);
        const int which = trial % 3;
        if (which == 0) { // gmres
            const LinearOperator op = make_dense_operator(random_shifted(n, rng));
            const SolveReport rep = gmres(op, b, x0, n, 1e-8, n);
            for (std::size_t j = 1; j < rep.resnorms.size(); ++j) {
                const auto basis = oracle::krylov_basis(op, b, j);
                const auto [best, c] = oracle::bruteforce_min_residual(op, b, x0, basis);
                worst = std::max(worst, std::abs(rep.resnorms[j] - best));
            }
        } else if (which == 1) { // rgmres (GCRO-DR, orthogonal space)
            const LinearOperator op = make_dense_operator(random_shifted(n, rng));
            const RecycleSpace rs =
                prepare_recycle(op, random_columns(n, 4, rng), RecycleVariant::Orthogonal);
            const auto [rep, rs2] = rgmres_gcrodr(op, b, x0, rs, n, 1e-8, n);
            const auto [rhat, c0] = apply_q_complement(rs, b);
            const LinearOperator dop = deflate(rs, op);
            for (std::size_t j = 1; j < rep.resnorms.size(); ++j) {
                std::vector<Vector> w = rs.U;
                const auto kb = oracle::krylov_basis(dop, rhat, j);
                w.insert(w.end(), kb.begin(), kb.end());
                const auto [best, c] = oracle::bruteforce_min_residual(op, b, x0, w);
                worst = std::max(worst, std::abs(rep.resnorms[j] - best));
            }
        } else { // rminres
            const LinearOperator op = make_dense_operator(spectrum_sym(n, rng));
            const RecycleSpace rs =
                prepare_recycle(op, random_columns(n, 4, rng), RecycleVariant::Orthogonal);
            const auto [rep, rs2] = rminres(op, b, x0, rs, 1e-8, n, 8, 0);
            const auto [rhat, c0] = apply_q_complement(rs, b);
            const LinearOperator dop = deflate(rs, op);
            for (std::size_t j = 1; j < rep.resnorms.size(); ++j) {
                std::vector<Vector> w = rs.U;
                const auto kb = oracle::krylov_basis(dop, rhat, j);
                w.insert(w.end(), kb.begin(), kb.end());
                const auto [best, c] = oracle::bruteforce_min_residual(op, b, x0, w);
                worst = std::max(worst, std::abs(rep.resnorms[j] - best));
            }
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "optimality vs brute-force basis, worst gap %.2e (allowed 1e-7)", worst);
    report(1, worst <= 1e-7, buf);
    return worst <= 1e-7;
}

// --------------------------------------------------------------- criterion 2
bool degenerate_equivalence() {
    std::mt19937_64 rng(2002);
    double worst = 0.0;
    auto gap = [&](const SolveReport& a, const SolveReport& c) {
        if (a.resnorms.size() != c.resnorms.size()) return 1.0;
        double g = 0.0;
        for (std::size_t j = 0; j < a.resnorms.size(); ++j)
            g = std::max(g, std::abs(a.resnorms[j] - c.resnorms[j]));
        return g;
    };
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 16 + 3 * (trial % 8);
        auto spd = random_spd(n, rng);
        auto gen = random_shifted(n, rng);
        const LinearOperator aspd = make_dense_operator(spd);
        const LinearOperator agen = make_dense_operator(gen);
        const Vector b = unit_rhs(n, rng);
        const Vector x0 = zeros(n);
        worst = std::max(
            worst, gap(gmres(agen, b, x0, 12, 1e-9, 200),
                       rgmres_gcrodr(agen, b, x0,
                                     detail::empty_space(RecycleVariant::Orthogonal), 12,
                                     1e-9, 200)
                           .first));
        worst = std::max(
            worst, gap(fom(agen, b, x0, 12, 1e-9, 200),
                       rfom(agen, b, x0, detail::empty_space(RecycleVariant::ObliqueFOM), 12,
                            1e-9, 200)));
        worst = std::max(
            worst,
            gap(minres(aspd, b, x0, 1e-9, 200),
                rminres(aspd, b, x0, detail::empty_space(RecycleVariant::Orthogonal), 1e-9,
                        200, 4, 0)
                    .first));
        worst = std::max(
            worst, gap(cg(aspd, b, x0, 1e-9, 200),
                       rcg(aspd, b, x0, detail::empty_space(RecycleVariant::GalerkinA), 1e-9,
                           200, 4, 0)
                           .first));
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "k = 0 recycled solvers match base histories, worst gap %.2e (allowed 1e-10)",
                  worst);
    report(2, worst <= 1e-10, buf);
    return worst <= 1e-10;
}

// --------------------------------------------------------------- criterion 3
bool residual_identity_checks() {
    debug_checks::force(true);
    bool ok = true;
    std::string note = "residual identity holds each iteration under debug checks";
    try {
        std::mt19937_64 rng(2003);
        for (int trial = 0; trial < 10; ++trial) {
            const std::size_t n = 24 + 4 * trial, k = 3;
            auto spd = random_spd(n, rng);
            const LinearOperator aspd = make_dense_operator(spd);
            const LinearOperator agen = make_dense_operator(random_shifted(n, rng));
            const Vector b = unit_rhs(n, rng);
            const RecycleSpace ro =
                prepare_recycle(agen, random_columns(n, k, rng), RecycleVariant::Orthogonal);
            rgmres_gcrodr(agen, b, zeros(n), ro, 10, 1e-9, 10 * n);
            const RecycleSpace rf =
                prepare_recycle(agen, random_columns(n, k, rng), RecycleVariant::ObliqueFOM);
            rfom(agen, b, zeros(n), rf, 10, 1e-9, 10 * n);
            const RecycleSpace rm =
                prepare_recycle(aspd, random_columns(n, k, rng), RecycleVariant::Orthogonal);
            rminres(aspd, b, zeros(n), rm, 1e-9, 10 * n, 2 * k, k);
            const RecycleSpace rg =
                prepare_recycle(aspd, random_columns(n, k, rng), RecycleVariant::GalerkinA);
            rcg(aspd, b, zeros(n), rg, 1e-9, 10 * n, 2 * k, k);
        }
    } catch (const Error& e) {
        ok = false;
        note = std::string("debug invariant tripped: ") + e.what();
    }
    debug_checks::force(false);
    report(3, ok, note);
    return ok;
}

// --------------------------------------------------------------- criterion 4
bool shift_invariance() {
    std::mt19937_64 rng(2004);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 64, k = 4, depth = 5;
        const LinearOperator op = make_dense_operator(random_sym(n, rng));
        const RecycleSpace rs =
            prepare_recycle(op, random_columns(n, k, rng), RecycleVariant::Orthogonal);
        const auto [v, cv] = apply_q_complement(rs, random_vector(n, rng));
        const auto bx = oracle::krylov_basis(deflate(rs, op), v, depth);
        for (double gamma : {0.1, 1.0, 10.0}) {
            const LinearOperator sh = make_shifted_operator(op, gamma);
            const auto by = oracle::krylov_basis(deflate(rs, sh), v, depth);
            const Vector angles = oracle::subspace_angles(bx, by);
            for (double a : angles) worst = std::max(worst, a);
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "deflated Krylov shift invariance, worst principal angle %.2e (allowed 1e-8)",
                  worst);
    report(4, worst <= 1e-8, buf);
    return worst <= 1e-8;
}

// --------------------------------------------------------------- criterion 5
bool exact_deflation_counts() {
    const std::size_t k = 4, nrest = 28, n = k + nrest;
    Vector d(n);
    for (std::size_t i = 0; i < k; ++i) d[i] = 500.0 + 11.0 * double(i);
    for (std::size_t i = 0; i < nrest; ++i) d[k + i] = 1.0 + 0.4 * double(i);
    const LinearOperator op = make_owning_operator(diag_matrix(d));
    std::mt19937_64 rng(2005);
    const Vector b = unit_rhs(n, rng);
    std::vector<Vector> u;
    for (std::size_t i = 0; i < k; ++i) u.push_back(unit(n, i));
    Vector drest(d.begin() + k, d.end());
    const LinearOperator oprest = make_owning_operator(diag_matrix(drest));
    const Vector brest(b.begin() + k, b.end());

    long worst = 0;
    auto tally = [&](std::size_t got, std::size_t base) {
        worst = std::max(worst, std::labs(long(got) - long(base)));
    };
    {
        const RecycleSpace rs = prepare_recycle(op, u, RecycleVariant::Orthogonal);
        tally(rgmres_gcrodr(op, b, zeros(n), rs, n, 1e-9, 5 * n).first.iterations,
              gmres(oprest, brest, zeros(nrest), nrest, 1e-9, 5 * nrest).iterations);
        tally(rminres(op, b, zeros(n), rs, 1e-9, 5 * n, 4, 0).first.iterations,
              minres(oprest, brest, zeros(nrest), 1e-9, 5 * nrest).iterations);
    }
    {
        const RecycleSpace rs = prepare_recycle(op, u, RecycleVariant::GalerkinA);
        tally(rcg(op, b, zeros(n), rs, 1e-9, 5 * n, 4, 0).first.iterations,
              cg(oprest, brest, zeros(nrest), 1e-9, 5 * nrest).iterations);
    }
    {
        const RecycleSpace rs = prepare_recycle(op, u, RecycleVariant::ObliqueFOM);
        tally(rfom(op, b, zeros(n), rs, n, 1e-9, 5 * n).iterations,
              fom(oprest, brest, zeros(nrest), nrest, 1e-9, 5 * nrest).iterations);
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "exact deflation reduces to the complementary block, worst gap %ld iterations "
                  "(allowed 1)",
                  worst);
    report(5, worst <= 1, buf);
    return worst <= 1;
}

// --------------------------------------------------------------- criterion 6
bool galerkin_suite() {
    std::mt19937_64 rng(2006);
    double worst_orth = 0.0, worst_err = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t n = 24 + 4 * trial, k = 3;
        const Vector b = unit_rhs(n, rng);
        { // rfom: final residual orthogonal to U and the generated Krylov basis
            const LinearOperator op = make_dense_operator(random_shifted(n, rng));
            const RecycleSpace rs =
                prepare_recycle(op, random_columns(n, k, rng), RecycleVariant::ObliqueFOM);
            const SolveReport rep = rfom(op, b, zeros(n), rs, n, 1e-10, n);
            const Vector r = detail::residual(op, b, rep.x);
            for (const Vector& uc : rs.U) worst_orth = std::max(worst_orth, std::abs(dot(uc, r)));
            LinearOperator dop;
            dop.n = n;
            dop.apply_fn = [&rs, f = op.apply_fn](const Vector& x) {
                Vector y = f(x);
                const Vector mu = lu_solve(rs.uau, detail::dots_against(rs.U, y));
                for (std::size_t i = 0; i < rs.k(); ++i) axpy(-mu[i], rs.C[i], y);
                return y;
            };
            Vector rstart = b;
            const Vector mu = lu_solve(rs.uau, detail::dots_against(rs.U, b));
            for (std::size_t i = 0; i < rs.k(); ++i) axpy(-mu[i], rs.C[i], rstart);
            for (const Vector& vc : oracle::krylov_basis(dop, rstart, rep.iterations))
                worst_orth = std::max(worst_orth, std::abs(dot(vc, r)));
        }
        { // rcg: residual orthogonality and A-norm optimal error
            auto mp = random_spd(n, rng);
            const LinearOperator op = make_dense_operator(mp);
            const RecycleSpace rs =
                prepare_recycle(op, random_columns(n, k, rng), RecycleVariant::GalerkinA);
            const std::size_t j = 6;
            const auto [part, rsp] = rcg(op, b, zeros(n), rs, 1e-30, j, 4, 0);
            const Vector r = detail::residual(op, b, part.x);
            for (const Vector& uc : rs.U) worst_orth = std::max(worst_orth, std::abs(dot(uc, r)));

            LinearOperator dop;
            dop.n = n;
            dop.apply_fn = [&rs, f = op.apply_fn](const Vector& x) {
                Vector y = f(x);
                const Vector mu = detail::dots_against(rs.U, y);
                for (std::size_t i = 0; i < rs.k(); ++i) axpy(-mu[i], rs.C[i], y);
                return y;
            };
            Vector rstart = b;
            const Vector mu = detail::dots_against(rs.U, b);
            for (std::size_t i = 0; i < rs.k(); ++i) axpy(-mu[i], rs.C[i], rstart);
            std::vector<Vector> w = rs.U;
            const auto kb = oracle::krylov_basis(dop, rstart, j);
            w.insert(w.end(), kb.begin(), kb.end());
            for (const Vector& vc : kb) worst_orth = std::max(worst_orth, std::abs(dot(vc, r)));
            const auto [best, cw] = oracle::bruteforce_min_anorm_error(*mp, b, zeros(n), w);
            const auto ds = oracle::dense_solve(*mp, b);
            Vector e = ds.x;
            axpy(-1.0, part.x, e);
            const double anorm = std::sqrt(std::max(dot(e, matvec(*mp, e)), 0.0));
            worst_err = std::max(worst_err, std::abs(anorm - best));
        }
    }
    const bool ok = worst_orth <= 1e-8 && worst_err <= 1e-7;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "Galerkin orthogonality worst %.2e (allowed 1e-8), rcg A-norm error gap %.2e "
                  "(allowed 1e-7)",
                  worst_orth, worst_err);
    report(6, ok, buf);
    return ok;
}

// --------------------------------------------------------------- criterion 7
bool shifted_family_reduction() {
    const std::size_t n = 20, k = 4;
    Vector d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = double(i + 1);
    const LinearOperator op = make_owning_operator(diag_matrix(d));
    std::mt19937_64 rng(2007);
    const Vector b = unit_rhs(n, rng);
    const std::vector<double> shifts{0.0, 0.5, 1.0};
    double worst_base = 0.0, worst_rmin = 0.0, worst_oracle = 0.0;

    { // k = 0 vs per-shift minres histories
        ShiftedFamily fam{op, b, shifts};
        const auto reps = solve_shifted_family(
            fam, detail::empty_space(RecycleVariant::Orthogonal), n, 1e-10);
        for (std::size_t s = 0; s < shifts.size(); ++s) {
            const LinearOperator sh = make_shifted_operator(op, shifts[s]);
            const SolveReport base = minres(sh, b, zeros(n), 1e-10, 5 * n);
            const std::size_t common = std::min(reps[s].resnorms.size(), base.resnorms.size());
            for (std::size_t j = 0; j < common; ++j) {
                if (base.resnorms[j] < 1e-8 * base.resnorms[0]) break;
                worst_base =
                    std::max(worst_base, std::abs(reps[s].resnorms[j] - base.resnorms[j]));
            }
        }
    }

    std::vector<Vector> u; // exact eigenvectors: the preferred form is exact
    for (std::size_t i = 0; i < k; ++i) u.push_back(unit(n, i));
    const RecycleSpace rs = prepare_recycle(op, u, RecycleVariant::Orthogonal);
    {
        ShiftedFamily fam{op, b, shifts};
        const auto reps = solve_shifted_family(fam, rs, n, 1e-10);
        // gamma = 0 output vs rminres
        const auto [rm, rs2] = rminres(op, b, zeros(n), rs, 1e-10, 5 * n, 4, 0);
        Vector diff = reps[0].x;
        axpy(-1.0, rm.x, diff);
        worst_rmin = norm2(diff);
        // per-shift residual vs the brute-force oracle over the shared basis
        const auto [rhat, c0] = apply_q_complement(rs, b);
        const auto kb = oracle::krylov_basis(deflate(rs, op), rhat, reps[0].iterations);
        for (std::size_t s = 0; s < shifts.size(); ++s) {
            const LinearOperator sh = make_shifted_operator(op, shifts[s]);
            std::vector<Vector> w = rs.U;
            w.insert(w.end(), kb.begin(), kb.end());
            const auto [best, c] = oracle::bruteforce_min_residual(sh, b, zeros(n), w);
            const double got = norm2(detail::residual(sh, b, reps[s].x));
            worst_oracle = std::max(worst_oracle, std::abs(got - best));
        }
    }
    const bool ok = worst_base <= 1e-9 && worst_rmin <= 1e-9 && worst_oracle <= 1e-7;
    char buf[220];
    std::snprintf(buf, sizeof(buf),
                  "shifted family: vs per-shift minres %.2e (1e-9), vs rminres %.2e (1e-9), vs "
                  "oracle %.2e (1e-7)",
                  worst_base, worst_rmin, worst_oracle);
    report(7, ok, buf);
    return ok;
}

// --------------------------------------------------------------- criterion 8
bool sequence_benefit() {
    auto manifest = [](bool recycle) {
        SequenceManifest m;
        m.generator.kind = "laplacian2d";
        m.generator.n = 2500;
        m.generator.count = 10;
        m.generator.perturb = 0.05;
        m.generator.seed = 7;
        m.solver.kind = recycle ? "rcg" : "cg";
        m.solver.tol = 1e-8;
        m.solver.maxit = 2000;
        if (recycle) {
            m.selector.kind = SelectorKind::Ritz;
            m.selector.k = 10;
            m.recycle_across_systems = true;
        }
        return m;
    };
    const auto on = run_sequence(manifest(true));
    const auto off = run_sequence(manifest(false));
    std::size_t mv_on = 0, mv_off = 0;
    for (const auto& r : on) mv_on += r.matvecs;
    for (const auto& r : off) mv_off += r.matvecs;
    bool ok = mv_on < mv_off && on.size() == 10;
    for (const auto& r : on) ok = ok && r.converged;
    for (std::size_t i = 2; i < on.size(); ++i)
        ok = ok && on[i].iterations <= on[1].iterations;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "10-system Laplacian sequence: %zu matvecs recycled vs %zu plain, iterations "
                  "nonincreasing from system 1",
                  mv_on, mv_off);
    report(8, ok, buf);
    return ok;
}

// --------------------------------------------------------------- criterion 9
bool selection_contracts() {
    std::mt19937_64 rng(2009);
    double worst_hr = 0.0, worst_pod = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t n = 40, k = 3, j = 8;
        const LinearOperator op = make_dense_operator(random_sym(n, rng));
        const RecycleSpace rs =
            prepare_recycle(op, random_columns(n, k, rng), RecycleVariant::Orthogonal);
        const auto [rhat, c0] = apply_q_complement(rs, random_vector(n, rng));
        ProjectedArnoldiState pas = projected_arnoldi_start(rhat);
        for (std::size_t l = 0; l < j; ++l) projected_arnoldi_extend(op, rs, pas);
        // orthonormal basis of A·range(S) for the constraint projector
        std::vector<Vector> as_cols;
        for (const Vector& uc : rs.U) as_cols.push_back(op.apply_fn(uc));
        for (std::size_t l = 0; l < pas.j(); ++l)
            as_cols.push_back(op.apply_fn(pas.inner.V[l]));
        const ThinQr asq = thin_qr(DenseMatrix::from_columns(as_cols), 1e-12);
        for (const Vector& w : harmonic_ritz_select(rs, pas, k, Which::SmallestMagnitude)) {
            const Vector aw = op.apply_fn(w);
            const double theta = dot(aw, aw) / dot(aw, w); // harmonic Rayleigh quotient
            Vector res = aw;
            axpy(-theta, w, res);
            double proj2 = 0.0;
            for (std::size_t c = 0; c < asq.rank; ++c) {
                const double p = dot(asq.Q.col(c), res);
                proj2 += p * p;
            }
            worst_hr = std::max(worst_hr, std::sqrt(proj2) / norm2(aw));
        }
    }
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t n = 20, cols = 7, k = 3;
        const DenseMatrix snaps = DenseMatrix::from_columns(random_columns(n, cols, rng));
        const auto u = pod_select(snaps, k);
        DenseMatrix resid = snaps;
        for (std::size_t c = 0; c < cols; ++c) {
            Vector col = snaps.col(c);
            for (const Vector& uu : u) axpy(-dot(uu, col), uu, col);
            for (std::size_t i = 0; i < n; ++i) resid(i, c) = col[i];
        }
        const Svd svd = svd_small(snaps);
        double tail = 0.0;
        for (std::size_t i = k; i < svd.sing.size(); ++i) tail += svd.sing[i] * svd.sing[i];
        worst_pod = std::max(worst_pod, std::abs(resid.frob_norm() - std::sqrt(tail)));
    }
    const bool ok = worst_hr <= 1e-6 && worst_pod <= 1e-10;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "harmonic Ritz projected residual %.2e (allowed 1e-6), POD Eckart-Young gap "
                  "%.2e (allowed 1e-10)",
                  worst_hr, worst_pod);
    report(9, ok, buf);
    return ok;
}

} // namespace

int main() {
    optimality_suite();
    degenerate_equivalence();
    residual_identity_checks();
    shift_invariance();
    exact_deflation_counts();
    galerkin_suite();
    shifted_family_reduction();
    sequence_benefit();
    selection_contracts();
    if (g_failures == 0) {
        std::printf("acceptance: all 9 criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criterion(s) FAILED\n", g_failures);
    return 1;
}
