#include <cmath>

#include "doctest.h"

#include "ctm/topic_graph.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace ctm;

namespace {

Matrix random_standardized(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const Matrix cov = testing::random_spd(cols, rng, 0.5);
    return standardize(testing::gaussian_rows(cov, rows, seed + 1));
}

LassoFit hand_fit(Eigen::Index target, std::vector<double> coef) {
    LassoFit f;
    f.target = target;
    f.coefficients = Eigen::Map<Vector>(coef.data(), static_cast<Eigen::Index>(coef.size()));
    return f;
}

} // namespace

TEST_CASE("standardize two points") {
    Matrix m(2, 1);
    m << 1.0, 3.0;
    const Matrix s = standardize(m);
    CHECK(s(0, 0) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(s(1, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("standardize postconditions and idempotence") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(3.0, 7.0);
    Matrix m(50, 4);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
    const Matrix s = standardize(m);
    for (Eigen::Index k = 0; k < 4; ++k) {
        CHECK(std::abs(s.col(k).mean()) <= 1e-12);
        CHECK(std::abs(std::sqrt(s.col(k).squaredNorm() / 49.0) - 1.0) <= 1e-12);
    }
    CHECK((standardize(s) - s).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("standardize rejects degenerate input") {
    Matrix m(3, 3);
    m << 1, 2, 5, 2, 3, 5, 4, 1, 5;
    try {
        standardize(m);
        FAIL("accepted a constant column");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("topic 2") != std::string::npos);
    }
    CHECK_THROWS_AS(standardize(Matrix::Ones(1, 2)), Error);
}

TEST_CASE("zero penalty reproduces least squares") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Matrix x = random_standardized(100, 6, seed);
        for (Eigen::Index s = 0; s < 6; ++s) {
            const LassoFit f = lasso_regress(x, s, 0.0);
            const Vector ols = oracle::ols_with_intercept(x, static_cast<int>(s));
            CHECK(f.converged);
            CHECK((f.coefficients - ols).cwiseAbs().maxCoeff() <= 1e-8);
            CHECK(f.kkt_residual <= 1e-7);
        }
    }
}

TEST_CASE("penalty at the threshold zeros every coefficient") {
    const Matrix x = random_standardized(80, 5, 9);
    for (Eigen::Index s = 0; s < 5; ++s) {
        const double t = lasso_zero_threshold(x, s);
        const LassoFit at = lasso_regress(x, s, t);
        for (Eigen::Index j = 0; j < 5; ++j)
            if (j != s) CHECK(at.coefficients(j) == 0.0);
        CHECK(std::abs(at.coefficients(s)) < 1e-12);
        const LassoFit below = lasso_regress(x, s, 0.99 * t);
        int nonzero = 0;
        for (Eigen::Index j = 0; j < 5; ++j)
            if (j != s && below.coefficients(j) != 0.0) ++nonzero;
        CHECK(nonzero >= 1);
    }
}

TEST_CASE("coordinate descent matches proximal gradient") {
    const Matrix x = random_standardized(100, 6, 21);
    for (Eigen::Index s : {0, 3}) {
        const double rho = 0.3 * lasso_zero_threshold(x, s);
        const LassoFit f = lasso_regress(x, s, rho);
        const Vector ista = oracle::lasso_ista(x, static_cast<int>(s), rho, 1000000);
        const double a = oracle::lasso_objective(x, static_cast<int>(s), f.coefficients, rho);
        const double b = oracle::lasso_objective(x, static_cast<int>(s), ista, rho);
        CHECK(std::abs(a - b) <= 1e-6 * std::max(1.0, std::abs(b)));
        CHECK(f.kkt_residual <= 1e-7);
    }
}

TEST_CASE("KKT conditions hold across penalties") {
    const Matrix x = random_standardized(200, 7, 33);
    for (double frac : {0.0, 0.01, 0.1, 0.3, 0.7, 1.0, 2.0})
        for (Eigen::Index s = 0; s < 7; ++s) {
            const LassoFit f = lasso_regress(x, s, frac * lasso_zero_threshold(x, s));
            CHECK(f.converged);
            CHECK(f.kkt_residual <= 1e-7);
        }
}

TEST_CASE("independent topics give empty neighborhoods") {
    const Eigen::Index D = 2000;
    const Matrix x = standardize(testing::gaussian_rows(Matrix::Identity(6, 6), D, 5));
    // per-row penalty 0.1 in the summed-residual scale
    const Neighborhoods hoods = neighborhoods(x, 0.1 * static_cast<double>(D));
    for (Eigen::Index s = 0; s < 6; ++s) CHECK(hoods.neighbors(s).empty());
}

TEST_CASE("chain precision is recovered") {
    const Eigen::Index K = 8, D = 5000;
    const Matrix cov = testing::chain_precision(K, 0.4).inverse();
    const Matrix x = standardize(testing::gaussian_rows(cov, D, 77));
    const double rho = testing::selection_penalty(K, D, 1e-3);
    const Neighborhoods hoods = neighborhoods(x, rho);
    for (EdgeRule rule : {EdgeRule::And, EdgeRule::Or}) {
        const TopicGraph g = build_graph(hoods, rule);
        REQUIRE(g.edges.size() == static_cast<std::size_t>(K - 1));
        for (Eigen::Index i = 0; i + 1 < K; ++i) CHECK(g.has_edge(i, i + 1));
    }
}

TEST_CASE("two topics can only neighbor each other") {
    const Matrix x = random_standardized(30, 2, 3);
    const Neighborhoods hoods = neighborhoods(x, 0.0);
    for (Eigen::Index s = 0; s < 2; ++s) {
        const auto n = hoods.neighbors(s);
        CHECK(n.size() <= 1);
        for (auto t : n) CHECK(t == 1 - s);
    }
}

TEST_CASE("edge rules combine neighborhoods") {
    Neighborhoods hoods;
    hoods.rho = 1.0;
    hoods.fits = {hand_fit(0, {0.2, 0.5, 0.0}), hand_fit(1, {0.0, -0.1, -0.3}), hand_fit(2, {0.0, -0.7, 0.0})};
    const TopicGraph a = build_graph(hoods, EdgeRule::And);
    const TopicGraph o = build_graph(hoods, EdgeRule::Or);
    REQUIRE(a.edges.size() == 1);
    CHECK(a.edges[0] == TopicEdge{1, 2, 0.7});
    REQUIRE(o.edges.size() == 2);
    CHECK(o.edges[0] == TopicEdge{0, 1, 0.5});
    CHECK(o.edges[1] == TopicEdge{1, 2, 0.7});
    CHECK_FALSE(a.has_edge(0, 0));
    CHECK(o.has_edge(2, 1));
}

TEST_CASE("conjunction edges are a subset of disjunction edges") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Matrix x = random_standardized(60, 6, seed);
        for (double rho : {0.0, 1.0, 5.0, 10.0, 20.0}) {
            const Neighborhoods hoods = neighborhoods(x, rho);
            const TopicGraph a = build_graph(hoods, EdgeRule::And);
            const TopicGraph o = build_graph(hoods, EdgeRule::Or);
            for (const auto& e : a.edges) CHECK(o.has_edge(e.source, e.target));
            for (const auto& e : o.edges) CHECK(e.source < e.target);
        }
    }
}

TEST_CASE("graph construction does not depend on the thread count") {
    const Matrix x = random_standardized(300, 9, 14);
    const Neighborhoods a = neighborhoods(x, 20.0, 1);
    const Neighborhoods b = neighborhoods(x, 20.0, 4);
    for (std::size_t s = 0; s < a.fits.size(); ++s) CHECK(a.fits[s].coefficients == b.fits[s].coefficients);
}

TEST_CASE("edge rule parsing") {
    CHECK(parse_edge_rule("AND") == EdgeRule::And);
    CHECK(parse_edge_rule("or") == EdgeRule::Or);
    CHECK(to_string(EdgeRule::Or) == "or");
    CHECK_THROWS_AS(parse_edge_rule("xor"), Error);
}
