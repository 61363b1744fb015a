#pragma once

#include <unistd.h>

#include <cstdint>
#include <random>

#include "ctm/corpus.hpp"
#include "ctm/inference.hpp"
#include "ctm/synthetic.hpp"

namespace testing {

/// SPD matrix A A^T + K I with standard normal A.
inline ctm::Matrix random_spd(Eigen::Index k, std::mt19937_64& rng, double ridge = -1.0) {
    std::normal_distribution<double> n(0.0, 1.0);
    ctm::Matrix a(k, k);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = n(rng);
    return a * a.transpose() + (ridge < 0 ? static_cast<double>(k) : ridge) * ctm::Matrix::Identity(k, k);
}

/// Random covariance with unit-ish scale and correlations in [-max_corr, max_corr] (K = 2 only).
inline ctm::Matrix random_cov2(std::mt19937_64& rng, double max_corr) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double s0 = 0.5 + u(rng), s1 = 0.5 + u(rng);
    const double r = (2.0 * u(rng) - 1.0) * max_corr;
    ctm::Matrix m(2, 2);
    m << s0 * s0, r * s0 * s1, r * s0 * s1, s1 * s1;
    return m;
}

/// Random model: topics from Dirichlet(1), mu ~ N(0, 0.5^2), Sigma random SPD scaled to O(1).
inline ctm::CtmModel random_model(Eigen::Index k, Eigen::Index v, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 0.5);
    ctm::CtmModel m;
    m.log_beta = ctm::random_log_topics(k, v, 1.0, seed + 17);
    m.mu = ctm::Vector(k);
    for (Eigen::Index i = 0; i < k; ++i) m.mu(i) = n(rng);
    m.sigma = ctm::SpdMatrix(random_spd(k, rng) / static_cast<double>(2 * k));
    return m;
}

/// Random document with `unique` distinct terms and counts in [1, max_count].
inline ctm::BowDocument random_doc(Eigen::Index v, int unique, int max_count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> term(0, static_cast<int>(v) - 1), count(1, max_count);
    std::vector<ctm::TermCount> counts;
    while (static_cast<int>(ctm::BowDocument::from_counts("d", counts).entries.size()) < std::min<int>(unique, static_cast<int>(v)))
        counts.push_back({term(rng), count(rng)});
    return ctm::BowDocument::from_counts("doc", counts);
}

/// Random variational state with positive nu2 and simplex phi rows.
inline ctm::VariationalState random_state(const ctm::BowDocument& doc, Eigen::Index k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    ctm::VariationalState s;
    s.lambda = ctm::Vector(k);
    s.nu2 = ctm::Vector(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        s.lambda(i) = n(rng);
        s.nu2(i) = u(rng);
    }
    s.phi = ctm::Matrix(static_cast<Eigen::Index>(doc.entries.size()), k);
    for (Eigen::Index r = 0; r < s.phi.rows(); ++r) {
        for (Eigen::Index i = 0; i < k; ++i) s.phi(r, i) = u(rng);
        s.phi.row(r) /= s.phi.row(r).sum();
    }
    s.zeta = ctm::update_zeta(s.lambda, s.nu2) * u(rng);
    return s;
}

inline ctm::BowDocument make_doc(std::vector<ctm::TermCount> counts) {
    return ctm::BowDocument::from_counts("doc", std::move(counts));
}

} // namespace testing

#include <filesystem>

#include <boost/math/distributions/normal.hpp>
#include <string>

namespace testing {

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("ctm_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::filesystem::path fixture(const std::string& name) {
    return std::filesystem::path(CTM_TEST_FIXTURES) / name;
}

} // namespace testing

namespace testing {

/// D draws from N(0, cov), one per row.
inline ctm::Matrix gaussian_rows(const ctm::Matrix& cov, Eigen::Index rows, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    const ctm::Matrix L = cov.llt().matrixL();
    ctm::Matrix z(rows, cov.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = n(rng);
    return z * L.transpose();
}

/// Neighborhood-selection penalty in the summed-residual scale for standardized
/// data: sqrt(D) * z_{1 - alpha / (2 K^2)}, so a false edge anywhere in the
/// graph has probability about alpha.
inline double selection_penalty(Eigen::Index k, Eigen::Index d, double alpha) {
    const double kk = static_cast<double>(k * k);
    return std::sqrt(static_cast<double>(d)) *
           boost::math::quantile(boost::math::normal(), 1.0 - alpha / (2.0 * kk));
}

/// Tridiagonal precision with unit diagonal and `off` next to it.
inline ctm::Matrix chain_precision(Eigen::Index k, double off) {
    ctm::Matrix p = ctm::Matrix::Identity(k, k);
    for (Eigen::Index i = 0; i + 1 < k; ++i) p(i, i + 1) = p(i + 1, i) = off;
    return p;
}

} // namespace testing
