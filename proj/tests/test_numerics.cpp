#include <cmath>
#include <random>

#include "doctest.h"

#include "ctm/numerics.hpp"
#include "support.hpp"

using namespace ctm;

TEST_CASE("softmax known values") {
    const Vector a = softmax(Vector::Zero(3));
    for (int i = 0; i < 3; ++i) CHECK(a(i) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    Vector b(2);
    b << 0.0, std::log(2.0);
    const Vector sb = softmax(b);
    CHECK(std::abs(sb(0) - 1.0 / 3.0) < 1e-15);
    CHECK(std::abs(sb(1) - 2.0 / 3.0) < 1e-15);
}

TEST_CASE("softmax shift invariance and simplex") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 5.0);
    for (int trial = 0; trial < 100; ++trial) {
        Vector eta(6);
        for (auto& x : eta) x = n(rng);
        const Vector p = softmax(eta);
        CHECK(std::abs(p.sum() - 1.0) < 1e-12);
        CHECK((p.array() > 0.0).all());
        const Vector q = softmax((eta.array() + 1e3).matrix());
        CHECK((p - q).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("softmax rejects non-finite input") {
    Vector eta(2);
    eta << 0.0, std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(softmax(eta), NumericError);
    eta(1) = std::nan("");
    CHECK_THROWS_AS(softmax(eta), NumericError);
}

TEST_CASE("log_sum_exp analytic cases") {
    CHECK(log_sum_exp(Vector::Zero(2)) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    Vector big(2);
    big << 1000.0, 1000.0;
    CHECK(std::abs(log_sum_exp(big) - (1000.0 + std::log(2.0))) < 1e-12);
    Vector extreme(3);
    extreme << 700.0, -700.0, 699.0;
    CHECK(std::isfinite(log_sum_exp(extreme)));
    CHECK_THROWS_AS(log_sum_exp(Vector()), NumericError);
}

TEST_CASE("log_sum_exp against extended precision") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 30.0);
    for (int trial = 0; trial < 50; ++trial) {
        Vector x(10);
        for (auto& v : x) v = n(rng);
        long double m = x.maxCoeff();
        long double s = 0.0L;
        for (double v : x) s += std::exp(static_cast<long double>(v) - m);
        const long double expected = m + std::log(s);
        CHECK(std::abs(static_cast<long double>(log_sum_exp(x)) - expected) <=
              1e-12L * std::max(1.0L, std::abs(expected)));
    }
}

TEST_CASE("lognormal_mean") {
    CHECK(lognormal_mean(0.0, 1e-300) == doctest::Approx(1.0));
    CHECK(lognormal_mean(1.0, 2.0) == doctest::Approx(std::exp(2.0)).epsilon(1e-15));
    // Monte Carlo check of E[exp(X)], X ~ N(0.3, 0.5)
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n(0.3, std::sqrt(0.5));
    const int draws = 1000000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < draws; ++i) {
        const double v = std::exp(n(rng));
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / draws;
    const double se = std::sqrt((sum2 / draws - mean * mean) / draws);
    CHECK(std::abs(mean - lognormal_mean(0.3, 0.5)) < 3.0 * se);
}

TEST_CASE("spd identity and diagonal") {
    const SpdMatrix id = SpdMatrix::identity(4);
    Vector b(4);
    b << 1.0, -2.0, 3.0, 0.5;
    CHECK((spd_solve(id, b) - b).norm() == 0.0);
    CHECK(spd_logdet(id) == 0.0);
    const SpdMatrix two(Matrix(2.0 * Matrix::Identity(5, 5)));
    CHECK(spd_logdet(two) == doctest::Approx(5.0 * std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("spd solve multiply-back and logdet identities") {
    std::mt19937_64 rng(19);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index k = 1 + trial % 6;
        const Matrix a = testing::random_spd(k, rng);
        const SpdMatrix s(a);
        Vector b(k);
        for (auto& v : b) v = n(rng);
        const Vector x = s.solve(b);
        CHECK((a * x - b).norm() <= 1e-8 * b.norm());
        const Matrix& L = s.cholesky_factor();
        CHECK(s.logdet() == doctest::Approx(2.0 * L.diagonal().array().log().sum()).epsilon(1e-12));
        CHECK((L * L.transpose() - a).cwiseAbs().maxCoeff() < 1e-10 * a.cwiseAbs().maxCoeff());
        const SpdMatrix inv(Matrix((s.inverse() + s.inverse().transpose()) / 2.0));
        CHECK(std::abs(s.logdet() + inv.logdet()) < 1e-8);
        CHECK((a * s.inverse() - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("spd factorization failure names the pivot") {
    Matrix m(3, 3);
    m << 1, 0, 0, 0, 1, 2, 0, 2, 1;
    try {
        SpdMatrix s(m);
        FAIL("accepted an indefinite matrix");
    } catch (const NotPositiveDefiniteError& e) {
        CHECK(e.pivot() == 2);
    }
    Matrix asym = Matrix::Identity(2, 2);
    asym(0, 1) = 0.5;
    CHECK_THROWS_AS(SpdMatrix{asym}, Error);
}

TEST_CASE("gaussian_log_density against the explicit formula") {
    Matrix c(2, 2);
    c << 2.0, 0.3, 0.3, 1.0;
    Vector mean(2), x(2);
    mean << 0.5, -1.0;
    x << 1.0, 0.0;
    const Vector d = x - mean;
    const double expected =
        -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(c.determinant()) - 0.5 * d.dot(c.inverse() * d);
    CHECK(gaussian_log_density(x, mean, SpdMatrix(c)) == doctest::Approx(expected).epsilon(1e-13));
}
