#include <cmath>

#include "doctest.h"

#include "ctm/estimation.hpp"
#include "ctm/synthetic.hpp"
#include "support.hpp"

using namespace ctm;

namespace {

Corpus tiny_corpus() {
    Corpus c;
    c.vocabulary = Vocabulary({"a", "b", "c"});
    c.documents.push_back(BowDocument{"d0", {{0, 2}, {1, 1}}, "", ""});
    c.documents.push_back(BowDocument{"d1", {{1, 1}, {2, 3}}, "", ""});
    return c;
}

VariationalState state_with(const Vector& lambda, const Vector& nu2, Matrix phi) {
    VariationalState s;
    s.lambda = lambda;
    s.nu2 = nu2;
    s.phi = std::move(phi);
    s.zeta = update_zeta(lambda, nu2);
    return s;
}

Corpus synthetic(std::uint64_t seed, std::size_t docs = 60) {
    CtmModel truth;
    truth.log_beta = random_log_topics(3, 30, 0.2, seed);
    truth.mu = Vector::Zero(3);
    truth.sigma = SpdMatrix(correlated_covariance(3, 1.0, {{0, 1}}, 0.6));
    return sample_ctm_corpus(truth, docs, 40, seed + 1);
}

} // namespace

TEST_CASE("m_step covariance with one document is the variational variance") {
    Corpus c = tiny_corpus();
    c.documents.resize(1);
    Vector lam(2), nu2(2);
    lam << 0.3, -0.2;
    nu2 << 0.5, 2.0;
    const Matrix phi = Matrix::Constant(2, 2, 0.5);
    FitConfig cfg;
    cfg.num_topics = 2;
    const CtmModel m = m_step(c, {state_with(lam, nu2, phi)}, cfg);
    CHECK((m.mu - lam).norm() < 1e-15);
    CHECK((m.sigma.matrix() - Matrix(nu2.asDiagonal())).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("m_step two-point variance") {
    const Corpus c = tiny_corpus();
    Vector a(2), b(2);
    a << -1.0, 0.0;
    b << 1.0, 0.0;
    const Vector tiny = Vector::Constant(2, 1e-12);
    const Matrix phi = Matrix::Constant(2, 2, 0.5);
    FitConfig cfg;
    cfg.num_topics = 2;
    const CtmModel m = m_step(c, {state_with(a, tiny, phi), state_with(b, tiny, phi)}, cfg);
    CHECK(std::abs(m.mu(0)) < 1e-15);
    CHECK(m.sigma.matrix()(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
    // second coordinate has no spread, so the floor applies
    CHECK(m.sigma.matrix()(1, 1) == doctest::Approx(1e-6).epsilon(1e-3));
}

TEST_CASE("m_step topics are the normalized expected counts") {
    const Corpus c = tiny_corpus();
    Matrix phi0(2, 2), phi1(2, 2);
    phi0 << 0.75, 0.25, 0.5, 0.5;
    phi1 << 0.2, 0.8, 0.4, 0.6;
    FitConfig cfg;
    cfg.num_topics = 2;
    const Vector z = Vector::Zero(2), one = Vector::Ones(2);
    const CtmModel m = m_step(c, {state_with(z, one, phi0), state_with(z, one, phi1)}, cfg);
    const double s = 1e-8;
    const double t0[] = {1.5, 0.7, 1.2}, t1[] = {0.5, 1.3, 1.8};
    for (int w = 0; w < 3; ++w) {
        CHECK(std::exp(m.log_beta(0, w)) == doctest::Approx((t0[w] + s) / (3.4 + 3 * s)).epsilon(1e-13));
        CHECK(std::exp(m.log_beta(1, w)) == doctest::Approx((t1[w] + s) / (3.6 + 3 * s)).epsilon(1e-13));
    }
}

TEST_CASE("a topic with no responsibility becomes uniform with a warning") {
    const Corpus c = tiny_corpus();
    Matrix phi(2, 2);
    phi << 1.0, 0.0, 1.0, 0.0;
    FitConfig cfg;
    cfg.num_topics = 2;
    cfg.topic_smoothing = 0.0;
    std::vector<std::string> warnings;
    const Vector z = Vector::Zero(2), one = Vector::Ones(2);
    const CtmModel m = m_step(c, {state_with(z, one, phi), state_with(z, one, phi)}, cfg, &warnings);
    REQUIRE(warnings.size() == 1);
    for (int w = 0; w < 3; ++w) CHECK(std::exp(m.log_beta(1, w)) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("initialize is seeded and normalized") {
    const Corpus c = synthetic(3);
    FitConfig cfg;
    cfg.num_topics = 4;
    cfg.seed = 11;
    const CtmModel a = initialize(c, cfg);
    const CtmModel b = initialize(c, cfg);
    CHECK(a.log_beta == b.log_beta);
    cfg.seed = 12;
    const CtmModel d = initialize(c, cfg);
    CHECK(a.log_beta != d.log_beta);
    for (Eigen::Index i = 0; i < 4; ++i) CHECK(std::abs(a.log_beta.row(i).array().exp().sum() - 1.0) < 1e-12);
    CHECK(a.mu == Vector::Zero(4));
    CHECK(a.sigma.matrix() == Matrix::Identity(4, 4));
}

TEST_CASE("fit config validation") {
    FitConfig cfg;
    cfg.num_topics = 1;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.num_topics = 3;
    cfg.restarts = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.restarts = 1;
    cfg.em_rel_tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("EM bound is monotone and the model stays valid") {
    const Corpus c = synthetic(5);
    FitConfig cfg;
    cfg.num_topics = 3;
    cfg.seed = 2;
    std::vector<double> seen;
    const CtmFit f = fit(c, cfg, [&](const IterationRecord& r) { seen.push_back(r.elbo); });
    REQUIRE(f.trace.iterations.size() >= 2);
    CHECK(seen.size() == f.trace.iterations.size());
    for (std::size_t i = 1; i < f.trace.iterations.size(); ++i) {
        const double prev = f.trace.iterations[i - 1].elbo, cur = f.trace.iterations[i].elbo;
        CHECK(cur >= prev - 1e-6 * std::abs(prev));
    }
    CHECK(f.trace.converged);
    CHECK(f.states.size() == c.num_docs());
    f.model.validate();
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(std::abs(f.model.log_beta.row(i).array().exp().sum() - 1.0) < 1e-10);
    CHECK(f.model.sigma.matrix().diagonal().minCoeff() >= 1e-6);
    // final states belong to the final model
    double total = 0.0;
    for (std::size_t d = 0; d < c.num_docs(); ++d) total += elbo(c.documents[d], f.model, f.states[d]);
    CHECK(total == doctest::Approx(f.trace.iterations.back().elbo).epsilon(1e-12));
}

TEST_CASE("fit does not depend on the thread count") {
    const Corpus c = synthetic(8, 40);
    FitConfig cfg;
    cfg.num_topics = 3;
    cfg.threads = 1;
    const CtmFit a = fit(c, cfg);
    cfg.threads = 4;
    const CtmFit b = fit(c, cfg);
    CHECK(a.model.log_beta == b.model.log_beta);
    CHECK(a.model.mu == b.model.mu);
    CHECK(a.model.sigma.matrix() == b.model.sigma.matrix());
    REQUIRE(a.trace.iterations.size() == b.trace.iterations.size());
    for (std::size_t i = 0; i < a.trace.iterations.size(); ++i)
        CHECK(a.trace.iterations[i].elbo == b.trace.iterations[i].elbo);
}

TEST_CASE("restarts keep the best final bound") {
    const Corpus c = synthetic(9, 40);
    FitConfig cfg;
    cfg.num_topics = 3;
    cfg.restarts = 3;
    const CtmFit f = fit(c, cfg);
    REQUIRE(f.trace.restart_elbos.size() == 3);
    const double best = *std::max_element(f.trace.restart_elbos.begin(), f.trace.restart_elbos.end());
    CHECK(f.trace.restart_elbos[static_cast<std::size_t>(f.trace.chosen_restart)] == best);
    CHECK(f.trace.iterations.back().elbo == best);
    CHECK(restart_seed(cfg, 0) == cfg.seed);
    CHECK(restart_seed(cfg, 1) != restart_seed(cfg, 2));
}

TEST_CASE("fitted correlated topics recover the truth") {
    CtmModel truth;
    truth.log_beta = random_log_topics(5, 60, 0.1, 101);
    truth.mu = Vector::Zero(5);
    truth.sigma = SpdMatrix(correlated_covariance(5, 4.0, {{0, 1}}, 0.8));
    const Corpus c = sample_ctm_corpus(truth, 200, 80, 201);
    FitConfig cfg;
    cfg.num_topics = 5;
    cfg.seed = 1000;
    cfg.restarts = 8;
    const CtmFit f = fit(c, cfg);
    const TopicMatch match = match_topics(f.model.log_beta, truth.log_beta);
    CHECK(match.mean_tv <= 0.15);
    CHECK(f.model.sigma.matrix()(match.permutation[0], match.permutation[1]) > 0.0);
}
