#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "recyklos/oracle.hpp"
#include "recyklos/recycle.hpp"
#include "test_helpers.hpp"

using namespace recyklos;
using testutil::random_shifted;
using testutil::random_spd;

namespace {

std::vector<Vector> random_columns(std::size_t n, std::size_t k, std::mt19937_64& rng) {
    std::vector<Vector> u(k);
    for (Vector& c : u) c = random_vector(n, rng);
    return u;
}

} // namespace

TEST_CASE("prepare_recycle Orthogonal: C orthonormal, C = A U") {
    std::mt19937_64 rng(12);
    const std::size_t n = 30, k = 5;
    const LinearOperator op = make_dense_operator(random_shifted(n, rng));
    const RecycleSpace rs = prepare_recycle(op, random_columns(n, k, rng), RecycleVariant::Orthogonal);
    REQUIRE(rs.k() == k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            REQUIRE(std::abs(dot(rs.C[i], rs.C[j]) - (i == j ? 1.0 : 0.0)) < 1e-12);
    for (std::size_t i = 0; i < k; ++i) {
        Vector au = op.apply_fn(rs.U[i]);
        axpy(-1.0, rs.C[i], au);
        REQUIRE(norm2(au) < 1e-10 * (1.0 + norm2(op.apply_fn(rs.U[i]))));
    }
}

TEST_CASE("prepare_recycle GalerkinA: UᵀAU = I, C = AU") {
    std::mt19937_64 rng(13);
    const std::size_t n = 25, k = 4;
    auto mp = random_spd(n, rng);
    const LinearOperator op = make_dense_operator(mp);
    const RecycleSpace rs = prepare_recycle(op, random_columns(n, k, rng), RecycleVariant::GalerkinA);
    REQUIRE(rs.k() == k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            REQUIRE(std::abs(dot(rs.U[i], rs.C[j]) - (i == j ? 1.0 : 0.0)) < 1e-9);
    for (std::size_t i = 0; i < k; ++i) {
        Vector au = op.apply_fn(rs.U[i]);
        axpy(-1.0, rs.C[i], au);
        REQUIRE(norm2(au) < 1e-9 * (1.0 + norm2(op.apply_fn(rs.U[i]))));
    }
}

TEST_CASE("prepare_recycle oblique variants store an invertible UᵀAU") {
    std::mt19937_64 rng(14);
    const std::size_t n = 22, k = 3;
    const LinearOperator op = make_dense_operator(random_shifted(n, rng));
    for (RecycleVariant v : {RecycleVariant::ObliqueFOM, RecycleVariant::ObliqueMR}) {
        const RecycleSpace rs = prepare_recycle(op, random_columns(n, k, rng), v);
        REQUIRE(rs.k() == k);
        // U orthonormal for the oblique variants
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                REQUIRE(std::abs(dot(rs.U[i], rs.U[j]) - (i == j ? 1.0 : 0.0)) < 1e-12);
        REQUIRE(rs.uau.nrows == k);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                REQUIRE(std::abs(rs.uau(i, j) - dot(rs.U[i], rs.C[j])) < 1e-12);
        REQUIRE(cond_estimate(rs.uau) < 1e12);
    }
}

TEST_CASE("prepare_recycle drops dependent columns and rejects empty results") {
    std::mt19937_64 rng(15);
    const std::size_t n = 20;
    const LinearOperator op = make_dense_operator(random_shifted(n, rng));
    std::vector<Vector> u = random_columns(n, 3, rng);
    u.push_back(u[0]); // exact duplicate
    const RecycleSpace rs = prepare_recycle(op, u, RecycleVariant::Orthogonal);
    REQUIRE(rs.k() == 3);
    const std::vector<Vector> zs(2, zeros(n));
    REQUIRE_THROWS_AS(prepare_recycle(op, zs, RecycleVariant::Orthogonal), EmptyRecycleSpace);
    REQUIRE(prepare_recycle(op, {}, RecycleVariant::Orthogonal).k() == 0);
}

TEST_CASE("apply_q_complement: projector identities") {
    std::mt19937_64 rng(16);
    const std::size_t n = 28, k = 5;
    const LinearOperator op = make_dense_operator(random_shifted(n, rng));
    const RecycleSpace rs = prepare_recycle(op, random_columns(n, k, rng), RecycleVariant::Orthogonal);
    const Vector v = random_vector(n, rng);
    const auto [w, c] = apply_q_complement(rs, v);
    // w ⟂ range(C)
    for (std::size_t i = 0; i < k; ++i) REQUIRE(std::abs(dot(rs.C[i], w)) < 1e-12);
    // reconstruction: v = C c + w
    Vector back = w;
    for (std::size_t i = 0; i < k; ++i) axpy(c[i], rs.C[i], back);
    for (std::size_t i = 0; i < n; ++i) REQUIRE(std::abs(back[i] - v[i]) < 1e-12);
    // Pythagoras for the orthogonal variant
    REQUIRE(std::abs(dot(v, v) - (dot(w, w) + dot(c, c))) < 1e-10 * dot(v, v));
    // idempotence
    const auto [w2, c2] = apply_q_complement(rs, w);
    REQUIRE(norm2(c2) < 1e-12 * (1.0 + norm2(v)));
    for (std::size_t i = 0; i < n; ++i) REQUIRE(std::abs(w2[i] - w[i]) < 1e-12);
}

TEST_CASE("projected arnoldi: modified relation A V = C B + V+ H") {
    std::mt19937_64 rng(17);
    const std::size_t n = 32, k = 4, j = 8;
    const LinearOperator op = make_dense_operator(random_shifted(n, rng));
    const RecycleSpace rs = prepare_recycle(op, random_columns(n, k, rng), RecycleVariant::Orthogonal);
    const auto [r0, c0] = apply_q_complement(rs, random_vector(n, rng));
    ProjectedArnoldiState pas = projected_arnoldi_start(r0);
    for (std::size_t l = 0; l < j; ++l) projected_arnoldi_extend(op, rs, pas);
    REQUIRE(pas.j() == j);
    for (std::size_t l = 0; l < j; ++l) {
        Vector av = op.apply_fn(pas.inner.V[l]);
        for (std::size_t i = 0; i < k; ++i) axpy(-pas.bcols[l][i], rs.C[i], av);
        for (std::size_t i = 0; i < pas.inner.hcols[l].size(); ++i)
            axpy(-pas.inner.hcols[l][i], pas.inner.V[i], av);
        REQUIRE(norm2(av) < 1e-10 * (1.0 + norm2(op.apply_fn(pas.inner.V[l]))));
    }
    // V stays orthonormal and orthogonal to C
    for (std::size_t a = 0; a < pas.inner.V.size(); ++a) {
        for (std::size_t b = 0; b < pas.inner.V.size(); ++b)
            REQUIRE(std::abs(dot(pas.inner.V[a], pas.inner.V[b]) - (a == b ? 1.0 : 0.0)) <
                    1e-11);
        for (std::size_t i = 0; i < k; ++i)
            REQUIRE(std::abs(dot(rs.C[i], pas.inner.V[a])) < 1e-11);
    }
}

TEST_CASE("deflated Krylov spaces are invariant under diagonal shifts") {
    // With Q the orthogonal projector onto range(C) from an A-derived space,
    // K_5((I-Q)A, v) equals K_5((I-Q)(A + gI), v) up to principal angles ~ 0.
    std::mt19937_64 rng(18);
    const std::size_t n = 64, k = 4, depth = 5;
    // spread spectrum keeps the depth-5 Krylov directions well determined
    Vector d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = double(i + 1);
    const LinearOperator op = make_owning_operator(testutil::diag_matrix(d));
    const RecycleSpace rs = prepare_recycle(op, random_columns(n, k, rng), RecycleVariant::Orthogonal);
    const auto [v, cv] = apply_q_complement(rs, random_vector(n, rng));
    auto deflated = [&rs](const LinearOperator& a) {
        LinearOperator d;
        d.n = a.n;
        d.apply_fn = [&rs, f = a.apply_fn](const Vector& x) {
            return apply_q_complement(rs, f(x)).first;
        };
        return d;
    };
    const LinearOperator base = deflated(op);
    const auto bx = oracle::krylov_basis(base, v, depth);
    for (double gamma : {0.1, 1.0, 10.0}) {
        const LinearOperator shifted = deflated(make_shifted_operator(op, gamma));
        const auto by = oracle::krylov_basis(shifted, v, depth);
        const Vector angles = oracle::subspace_angles(bx, by);
        REQUIRE(angles.size() == depth);
        for (double a : angles) REQUIRE(a <= 1e-8);
    }
}

TEST_CASE("assemble_solution reproduces the augmented correction") {
    std::mt19937_64 rng(19);
    const std::size_t n = 26, k = 3, j = 5;
    const LinearOperator op = make_dense_operator(random_shifted(n, rng));
    const RecycleSpace rs = prepare_recycle(op, random_columns(n, k, rng), RecycleVariant::Orthogonal);
    const Vector x0 = random_vector(n, rng);
    const Vector b = random_vector(n, rng);
    Vector r0 = op.apply_fn(x0);
    for (std::size_t i = 0; i < n; ++i) r0[i] = b[i] - r0[i];
    const auto [rhat, c0] = apply_q_complement(rs, r0);
    ProjectedArnoldiState pas = projected_arnoldi_start(rhat);
    for (std::size_t l = 0; l < j; ++l) projected_arnoldi_extend(op, rs, pas);
    Vector y = random_vector(j, rng);
    const Vector x = assemble_solution(rs, x0, r0, pas.inner.V, y, pas.b());
    // residual must equal (rhat - V+ Hy) exactly: check against direct eval
    Vector rr = op.apply_fn(x);
    for (std::size_t i = 0; i < n; ++i) rr[i] = b[i] - rr[i];
    Vector inner = rhat;
    for (std::size_t l = 0; l < j; ++l)
        for (std::size_t i = 0; i < pas.inner.hcols[l].size(); ++i)
            axpy(-pas.inner.hcols[l][i] * y[l], pas.inner.V[i], inner);
    REQUIRE(std::abs(norm2(rr) - norm2(inner)) < 1e-9 * (1.0 + norm2(b)));
    REQUIRE(residual_consistency_check(op, b, x, norm2(inner)) < 1e-9 * (1.0 + norm2(b)));
}

TEST_CASE("recycle cap and dimension validation") {
    std::mt19937_64 rng(20);
    const LinearOperator op = make_dense_operator(random_shifted(8, rng));
    std::vector<Vector> too_many(kRecycleCap + 1, random_vector(8, rng));
    REQUIRE_THROWS_AS(prepare_recycle(op, too_many, RecycleVariant::Orthogonal), InvalidInput);
    const std::vector<Vector> wrong{random_vector(5, rng)};
    REQUIRE_THROWS_AS(prepare_recycle(op, wrong, RecycleVariant::Orthogonal), InvalidInput);
}
