#include <doctest.h>

#include "oracles.hpp"
#include "rankforge/errors.hpp"
#include "rankforge/linalg.hpp"
#include "rankforge/rng.hpp"

using namespace rankforge;

namespace {

Matrix random_matrix(std::uint32_t p, std::size_t r, std::size_t c, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(p, r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = static_cast<Residue>(rng.below(p));
    return m;
}

std::vector<std::vector<std::uint64_t>> rows_of(const Matrix& m) {
    std::vector<std::vector<std::uint64_t>> rows(m.rows(), std::vector<std::uint64_t>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) rows[i][j] = m(i, j);
    return rows;
}

} // namespace

TEST_CASE("rank agrees with reference elimination") {
    for (std::uint32_t p : {2u, 3u, 5u}) {
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            const auto m = random_matrix(p, 1 + seed % 5, 1 + (seed / 5) % 6, seed);
            CHECK(matrix_rank(m) == oracle::rank(p, rows_of(m)));
        }
    }
    CHECK(matrix_rank(Matrix(2, 3, 3)) == 0);
}

TEST_CASE("echelon form") {
    const auto m = Matrix::from_rows(3, 3, {{0, 2, 1}, {1, 1, 0}, {1, 0, 1}});
    const auto e = row_reduce(m);
    CHECK(e.rank() == 2);
    CHECK(e.pivot_columns == std::vector<std::size_t>{0, 1});
    CHECK(e.reduced(0, 0) == 1);
    CHECK(e.reduced(1, 1) == 1);
    CHECK(e.reduced(0, 1) == 0);
}

TEST_CASE("kernel basis spans the kernel") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const std::uint32_t p = seed % 2 ? 3 : 2;
        const auto m = random_matrix(p, 1 + seed % 4, 1 + seed % 5, seed * 7 + 1);
        const auto basis = kernel_basis(m);
        CHECK(basis.size() == m.cols() - matrix_rank(m));
        for (const auto& z : basis)
            for (Residue v : m.apply(z)) CHECK(v == 0);
        std::size_t kernel = 0;
        for (const auto& z : oracle::all_vectors(p, m.cols())) {
            bool zero = true;
            for (Residue v : m.apply(z)) zero = zero && v == 0;
            if (zero) {
                ++kernel;
                CHECK(in_span(p, basis, z));
            }
        }
        std::size_t expect = 1;
        for (std::size_t i = 0; i < basis.size(); ++i) expect *= p;
        CHECK(kernel == expect);
    }
}

TEST_CASE("solve") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const std::uint32_t p = seed % 2 ? 3 : 2;
        const auto m = random_matrix(p, 3, 3, seed + 999);
        for (const auto& b : oracle::all_vectors(p, 3)) {
            bool solvable = false;
            for (const auto& y : oracle::all_vectors(p, 3)) solvable = solvable || m.apply(y) == b;
            const auto y = solve(m, b);
            CHECK(y.has_value() == solvable);
            if (y) CHECK(m.apply(*y) == b);
        }
    }
    CHECK_THROWS_AS(solve(Matrix(2, 2, 2), FVec{1}), DimensionError);
}

TEST_CASE("span membership") {
    CHECK(in_span(2, {}, FVec{0, 0}));
    CHECK_FALSE(in_span(2, {}, FVec{1, 0}));
    CHECK(in_span(3, {{1, 0}, {1, 1}}, FVec{2, 1}));
    CHECK_FALSE(in_span(3, {{1, 2}}, FVec{1, 1}));
}
