#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "blockdyn/linalg.hpp"
#include "blockdyn/rng.hpp"

using namespace blockdyn;
using lin::Matrix;
using lin::Vector;

TEST_CASE("matrix product against hand arithmetic") {
    const Matrix a{{1.0, 2.0}, {3.0, 4.0}};
    const Matrix b{{0.0, 1.0}, {1.0, 0.0}};
    const Matrix c = a * b;
    CHECK(c(0, 0) == doctest::Approx(2.0));
    CHECK(c(0, 1) == doctest::Approx(1.0));
    CHECK(c(1, 0) == doctest::Approx(4.0));
    CHECK(c(1, 1) == doctest::Approx(3.0));

    const Vector y = a * Vector{1.0, -1.0};
    CHECK(y[0] == doctest::Approx(-1.0));
    CHECK(y[1] == doctest::Approx(-1.0));
}

TEST_CASE("lu solve reproduces known solutions") {
    const Matrix a{{2.0, 1.0}, {1.0, 3.0}};
    const Vector x{0.5, -2.0};
    const Vector b = a * x;
    const Vector solved = lin::solve(a, b);
    CHECK(lin::norm2(lin::sub(solved, x)) < 1e-12);

    CHECK(lin::LuFactors(a).determinant() == doctest::Approx(5.0));
    const Matrix singular{{1.0, 2.0}, {2.0, 4.0}};
    CHECK_THROWS_AS((void)lin::LuFactors{singular}, std::runtime_error);
}

TEST_CASE("inverse of random matrices satisfies A * inv(A) = I") {
    rng::Engine rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.below(7);
        Matrix a(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) a(i, j) = rng.normal();
        const Matrix prod = a * lin::inverse(a);
        CHECK(lin::max_abs(prod - Matrix::identity(n)) < 1e-9);
    }
}

TEST_CASE("orthogonal factor is orthogonal and deterministic") {
    rng::Engine rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 2 + rng.below(9);
        Matrix g(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) g(i, j) = rng.normal();
        const Matrix q = lin::orthogonal_factor(g);
        CHECK(lin::max_abs(q.transposed() * q - Matrix::identity(n)) < 1e-12);
        const Matrix q2 = lin::orthogonal_factor(g);
        CHECK(lin::max_abs(q - q2) == 0.0);
    }
}

TEST_CASE("norms") {
    const Matrix m{{3.0, 0.0}, {0.0, -4.0}};
    CHECK(lin::frobenius_norm(m) == doctest::Approx(5.0));
    CHECK(lin::max_abs(m) == doctest::Approx(4.0));
    CHECK(lin::norm2(Vector{3.0, 4.0}) == doctest::Approx(5.0));
    CHECK(lin::norm_inf(Vector{3.0, -4.0}) == doctest::Approx(4.0));
}

TEST_CASE("shape mismatches throw") {
    const Matrix a(2, 3);
    const Matrix b(2, 3);
    CHECK_THROWS_AS(a * b, std::invalid_argument);
    const Vector two{1.0, 2.0};
    CHECK_THROWS_AS(a * two, std::invalid_argument);
    const Vector short_v{1.0};
    const Vector long_v{1.0, 2.0};
    CHECK_THROWS_AS(lin::dot(short_v, long_v), std::invalid_argument);
}
