#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "recyklos/csr.hpp"
#include "recyklos/errors.hpp"
#include "recyklos/generate.hpp"
#include "recyklos/matrix_market.hpp"
#include "recyklos/vec.hpp"

using namespace recyklos;

TEST_CASE("from_triplets sums duplicates and sorts rows") {
    const CsrMatrix m = CsrMatrix::from_triplets(
        3, 3, {{0, 1, 2.0}, {0, 1, 3.0}, {2, 0, -1.0}, {1, 1, 4.0}, {0, 0, 1.0}});
    REQUIRE(m.nnz() == 4);
    const DenseMatrix d = densify(m);
    REQUIRE(d(0, 0) == 1.0);
    REQUIRE(d(0, 1) == 5.0);
    REQUIRE(d(1, 1) == 4.0);
    REQUIRE(d(2, 0) == -1.0);
    REQUIRE_THROWS_AS(CsrMatrix::from_triplets(2, 2, {{2, 0, 1.0}}), InvalidInput);
}

TEST_CASE("csr matvec and transpose agree with dense arithmetic") {
    std::mt19937_64 rng(17);
    std::vector<std::tuple<std::size_t, std::size_t, double>> t;
    for (int e = 0; e < 60; ++e) t.emplace_back(rng() % 8, rng() % 8, rand_sym(rng));
    const CsrMatrix m = CsrMatrix::from_triplets(8, 8, t);
    const DenseMatrix d = densify(m);
    const Vector v = random_vector(8, rng);
    const Vector y1 = matvec(m, v);
    const Vector y2 = matvec(d, v);
    for (std::size_t i = 0; i < 8; ++i) REQUIRE(std::abs(y1[i] - y2[i]) < 1e-14);
    const Vector z1 = matvec(transpose(m), v);
    const Vector z2 = matvec_t(d, v);
    for (std::size_t i = 0; i < 8; ++i) REQUIRE(std::abs(z1[i] - z2[i]) < 1e-14);
}

TEST_CASE("operator counts matvecs through shared counters") {
    const CsrMatrix m = CsrMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {1, 1, 2.0}});
    const LinearOperator op = make_operator(m);
    REQUIRE(*op.matvec_count == 0);
    op.apply(Vector{1.0, 1.0});
    op.apply(Vector{0.0, 1.0});
    REQUIRE(*op.matvec_count == 2);
    const LinearOperator sh = make_shifted_operator(op, 3.0);
    const Vector y = sh.apply(Vector{1.0, 1.0});
    REQUIRE(*op.matvec_count == 3); // shifted op shares A's counter
    REQUIRE(y[0] == 4.0);
    REQUIRE(y[1] == 5.0);
}

TEST_CASE("matrix market roundtrip is exact") {
    std::mt19937_64 rng(3);
    std::vector<std::tuple<std::size_t, std::size_t, double>> t;
    for (int e = 0; e < 40; ++e)
        t.emplace_back(rng() % 7, rng() % 5, rand_sym(rng) * std::pow(10.0, int(rng() % 9) - 4));
    const CsrMatrix m = CsrMatrix::from_triplets(7, 5, t);
    std::stringstream ss;
    write_matrix_market(m, ss);
    const CsrMatrix back = read_matrix_market(ss, "roundtrip");
    REQUIRE(back == m);
}

TEST_CASE("matrix market symmetric storage expands to full") {
    std::istringstream in("%%MatrixMarket matrix coordinate real symmetric\n"
                          "% comment line\n"
                          "3 3 4\n"
                          "1 1 2.0\n2 1 -1.0\n3 2 -1.0\n3 3 2.0\n");
    const CsrMatrix m = read_matrix_market(in, "sym");
    const DenseMatrix d = densify(m);
    REQUIRE(d(0, 1) == -1.0);
    REQUIRE(d(1, 0) == -1.0);
    REQUIRE(d(1, 2) == -1.0);
    REQUIRE(d(2, 1) == -1.0);
    REQUIRE(d(0, 0) == 2.0);
    REQUIRE(d(1, 1) == 0.0);
}

TEST_CASE("matrix market parse errors carry line numbers") {
    std::istringstream bad1("%%MatrixMarket matrix coordinate real general\n2 2 1\n5 1 3.0\n");
    try {
        read_matrix_market(bad1, "bad");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        REQUIRE(std::string(e.what()).find("(line 3)") != std::string::npos);
        REQUIRE(e.line == 3);
    }
    std::istringstream bad2("%%MatrixMarket matrix array real general\n2 2\n");
    REQUIRE_THROWS_AS(read_matrix_market(bad2, "bad"), UnsupportedFormat);
    std::istringstream bad3("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n");
    REQUIRE_THROWS_AS(read_matrix_market(bad3, "bad"), ParseError);
}

TEST_CASE("laplacian2d sequence: deterministic, SPD, bounded drift") {
    GenSpec spec;
    spec.kind = "laplacian2d";
    spec.n = 49;
    spec.count = 4;
    spec.perturb = 0.05;
    spec.seed = 11;
    const auto seq1 = generate_sequence(spec);
    const auto seq2 = generate_sequence(spec);
    REQUIRE(seq1.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        REQUIRE(seq1[i].a == seq2[i].a); // bitwise deterministic
        REQUIRE(seq1[i].spd);
        const DenseMatrix d = densify(seq1[i].a);
        for (std::size_t r = 0; r < 49; ++r)
            for (std::size_t c = r + 1; c < 49; ++c) REQUIRE(d(r, c) == d(c, r));
        // weak diagonal dominance with strict rows at the boundary => SPD
        for (std::size_t r = 0; r < 49; ++r) {
            double offsum = 0.0;
            for (std::size_t c = 0; c < 49; ++c)
                if (c != r) offsum += std::abs(d(r, c));
            REQUIRE(d(r, r) >= offsum - 1e-12);
        }
    }
    for (std::size_t i = 1; i < 4; ++i) {
        DenseMatrix diff = densify(seq1[i].a);
        const DenseMatrix prev = densify(seq1[i - 1].a);
        for (std::size_t e = 0; e < diff.entries.size(); ++e) diff.entries[e] -= prev.entries[e];
        REQUIRE(diff.frob_norm() <= spec.perturb * prev.frob_norm() + 1e-12);
    }
}

TEST_CASE("diag_perturb sequence changes only a few diagonal entries") {
    GenSpec spec;
    spec.kind = "diag_perturb";
    spec.n = 30;
    spec.count = 3;
    spec.perturb = 0.1;
    spec.seed = 5;
    const auto seq = generate_sequence(spec);
    const DenseMatrix a0 = densify(seq[0].a);
    const DenseMatrix a1 = densify(seq[1].a);
    std::size_t changed = 0;
    for (std::size_t r = 0; r < 30; ++r)
        for (std::size_t c = 0; c < 30; ++c)
            if (a0(r, c) != a1(r, c)) {
                REQUIRE(r == c);
                ++changed;
            }
    REQUIRE(changed >= 1);
    REQUIRE(changed <= 3); // at most n/10 edits
}

TEST_CASE("generator input validation") {
    GenSpec spec;
    spec.kind = "laplacian2d";
    spec.n = 50; // not a perfect square
    REQUIRE_THROWS_AS(generate_sequence(spec), InvalidInput);
    spec.n = 49;
    spec.perturb = 1.5;
    REQUIRE_THROWS_AS(generate_sequence(spec), InvalidInput);
    spec.perturb = 0.0;
    spec.kind = "mystery";
    REQUIRE_THROWS_AS(generate_sequence(spec), InvalidInput);
}
