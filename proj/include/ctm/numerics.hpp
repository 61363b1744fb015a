#pragma once

#include <cmath>
#include <limits>

#include "ctm/common.hpp"

namespace ctm {

/// log(sum(exp(x))) with max subtraction. Throws on empty or non-finite input.
template <class Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    if (x.size() == 0) throw NumericError("log_sum_exp of an empty vector");
    if (!x.derived().allFinite()) throw NumericError("log_sum_exp of a non-finite vector");
    const Scalar m = x.maxCoeff();
    return m + std::log((x.derived().array() - m).exp().sum());
}

/// log(sum(exp(x))) tolerating -inf entries; returns -inf if all are -inf.
template <class Derived>
typename Derived::Scalar log_sum_exp_lenient(const Eigen::DenseBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    if (x.size() == 0) throw NumericError("log_sum_exp of an empty vector");
    const Scalar m = x.maxCoeff();
    if (std::isnan(m)) throw NumericError("log_sum_exp of a NaN vector");
    if (m == -std::numeric_limits<Scalar>::infinity()) return m;
    if (m == std::numeric_limits<Scalar>::infinity()) return m;
    return m + std::log((x.derived().array() - m).exp().sum());
}

/// Maps natural parameters onto the simplex: exp(eta) / sum(exp(eta)).
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> softmax(const Eigen::MatrixBase<Derived>& eta) {
    using Scalar = typename Derived::Scalar;
    if (eta.size() == 0) throw NumericError("softmax of an empty vector");
    if (!eta.allFinite()) throw NumericError("softmax of a non-finite vector");
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out = (eta.array() - eta.maxCoeff()).exp().matrix();
    out /= out.sum();
    return out;
}

/// E[exp(eta)] for eta ~ N(mean, variance).
template <class Scalar>
Scalar lognormal_mean(Scalar mean, Scalar variance) {
    return std::exp(mean + variance / Scalar(2));
}

/// Symmetric positive definite matrix stored with its Cholesky factor.
/// Offers solves, log-determinant and an explicit inverse computed once.
class SpdMatrix {
public:
    SpdMatrix() = default;
    /// Throws NotPositiveDefiniteError naming the first failing pivot, or
    /// Error if the input is not symmetric within 1e-10 relative.
    explicit SpdMatrix(Matrix m);

    static SpdMatrix identity(Eigen::Index k) { return SpdMatrix(Matrix::Identity(k, k)); }

    Eigen::Index dim() const noexcept { return matrix_.rows(); }
    const Matrix& matrix() const noexcept { return matrix_; }
    const Matrix& inverse() const noexcept { return inverse_; }
    /// Lower-triangular Cholesky factor L with matrix = L L^T.
    const Matrix& cholesky_factor() const noexcept { return lower_; }
    double logdet() const noexcept { return logdet_; }

    Vector solve(const Vector& b) const;

private:
    Matrix matrix_;
    Matrix lower_;
    Matrix inverse_;
    double logdet_ = 0.0;
};

/// Convenience free functions mirroring SpdMatrix members.
inline Vector spd_solve(const SpdMatrix& s, const Vector& b) { return s.solve(b); }
inline double spd_logdet(const SpdMatrix& s) { return s.logdet(); }

/// Log density of N(mean, cov) at x.
double gaussian_log_density(const Vector& x, const Vector& mean, const SpdMatrix& cov);

} // namespace ctm
