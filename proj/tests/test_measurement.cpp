#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sdacs/measurement.hpp"

using namespace sdacs;

TEST_CASE("sample_phi shapes and delta") {
    const LinearOperator op = sample_phi(256, 1024, 9);
    CHECK(op.phi.rows == 256);
    CHECK(op.phi.cols == 1024);
    CHECK_THAT(op.delta(), Catch::Matchers::WithinAbs(0.25, 1e-15));
}

TEST_CASE("sample_phi boundary m = n = 1") {
    const LinearOperator op = sample_phi(1, 1, 4);
    CHECK(op.phi.data.size() == 1);
    CHECK_THAT(op.delta(), Catch::Matchers::WithinAbs(1.0, 1e-15));
}

TEST_CASE("sample_phi rejects m > n and m = 0") {
    CHECK_THROWS_AS(sample_phi(5, 4, 0), std::invalid_argument);
    CHECK_THROWS_AS(sample_phi(0, 4, 0), std::invalid_argument);
}

TEST_CASE("sample_phi column norms concentrate near 1") {
    // Entries are N(0, 1/m), so E||column||^2 = 1.
    const LinearOperator op = sample_phi(256, 1024, 1234);
    double mean = 0.0;
    for (std::size_t j = 0; j < op.n; ++j) {
        double sq = 0.0;
        for (std::size_t i = 0; i < op.m; ++i) sq += op.phi(i, j) * op.phi(i, j);
        mean += sq;
    }
    mean /= static_cast<double>(op.n);
    CHECK_THAT(mean, Catch::Matchers::WithinAbs(1.0, 0.05));
}

TEST_CASE("sample_phi is reproducible from (m, n, seed)") {
    const LinearOperator a = sample_phi(16, 64, 77);
    const LinearOperator b = sample_phi(16, 64, 77);
    CHECK(a.phi.data == b.phi.data);
}

TEST_CASE("measure hand value") {
    LinearOperator op;
    op.m = 1;
    op.n = 2;
    op.phi = Matrix(1, 2);
    op.phi(0, 0) = 2.0;
    op.phi(0, 1) = -1.0;
    const Vector y = measure(op, {1.0, 3.0});
    REQUIRE(y.size() == 1);
    CHECK_THAT(y[0], Catch::Matchers::WithinAbs(-1.0, 1e-15));
}

TEST_CASE("measure maps zero to zero and rejects bad dims") {
    const LinearOperator op = sample_phi(4, 9, 3);
    const Vector y = measure(op, Vector(9, 0.0));
    for (double v : y) CHECK(v == 0.0);
    CHECK_THROWS_AS(measure(op, Vector(8, 0.0)), std::invalid_argument);
}

TEST_CASE("measure is linear") {
    const LinearOperator op = sample_phi(12, 48, 21);
    Prng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        Vector x1(48), x2(48);
        for (auto& v : x1) v = rng.next_uniform() - 0.5;
        for (auto& v : x2) v = rng.next_uniform() - 0.5;
        const double alpha = 2.0 * rng.next_uniform() - 1.0;

        Vector sum(48);
        for (std::size_t i = 0; i < 48; ++i) sum[i] = x1[i] + alpha * x2[i];
        const Vector lhs = measure(op, sum);
        const Vector y1 = measure(op, x1);
        const Vector y2 = measure(op, x2);
        for (std::size_t i = 0; i < op.m; ++i)
            REQUIRE_THAT(lhs[i], Catch::Matchers::WithinAbs(y1[i] + alpha * y2[i], 1e-10));
    }
}

TEST_CASE("measure_adjoint satisfies <Phi x, y> = <x, Phi^T y>") {
    const LinearOperator op = sample_phi(10, 36, 8);
    Prng rng(18);
    Vector x(36), y(10);
    for (auto& v : x) v = rng.next_uniform() - 0.5;
    for (auto& v : y) v = rng.next_uniform() - 0.5;
    const double lhs = dot(measure(op, x), y);
    const double rhs = dot(x, measure_adjoint(op, y));
    CHECK_THAT(lhs, Catch::Matchers::WithinAbs(rhs, 1e-10));
}

TEST_CASE("measure_rows matches per-sample measure bit-for-bit") {
    const LinearOperator op = sample_phi(6, 25, 14);
    Prng rng(2);
    Matrix samples(7, 25);
    for (auto& v : samples.data) v = rng.next_uniform();
    const Matrix ys = measure_rows(op, samples);
    for (std::size_t i = 0; i < samples.rows; ++i) {
        Vector xi(samples.row(i), samples.row(i) + samples.cols);
        const Vector yi = measure(op, xi);
        for (std::size_t j = 0; j < op.m; ++j) REQUIRE(ys(i, j) == yi[j]);
    }
}

TEST_CASE("UndersamplingRatio validates its range") {
    CHECK(UndersamplingRatio(0.25).value == 0.25);
    CHECK(UndersamplingRatio(1.0).value == 1.0);
    CHECK_THROWS_AS(UndersamplingRatio(0.0), std::invalid_argument);
    CHECK_THROWS_AS(UndersamplingRatio(1.5), std::invalid_argument);
    CHECK_THROWS_AS(UndersamplingRatio(-0.1), std::invalid_argument);
}
