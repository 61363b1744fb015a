#include "ctm/numerics.hpp"

#include <numbers>

namespace ctm {

SpdMatrix::SpdMatrix(Matrix m) : matrix_(std::move(m)) {
    const auto k = matrix_.rows();
    if (k == 0 || matrix_.cols() != k) throw Error("SpdMatrix requires a nonempty square matrix");
    if (!matrix_.allFinite()) throw NumericError("SpdMatrix has non-finite entries");
    const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
    if ((matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw Error("SpdMatrix input is not symmetric");
    matrix_ = 0.5 * (matrix_ + matrix_.transpose());

    // Explicit factorization so the failing pivot can be reported.
    lower_ = Matrix::Zero(k, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        double d = matrix_(j, j) - lower_.row(j).head(j).squaredNorm();
        if (!(d > 0.0)) throw NotPositiveDefiniteError(j, d);
        const double ljj = std::sqrt(d);
        lower_(j, j) = ljj;
        for (Eigen::Index i = j + 1; i < k; ++i) {
            lower_(i, j) = (matrix_(i, j) - lower_.row(i).head(j).dot(lower_.row(j).head(j))) / ljj;
        }
    }
    logdet_ = 2.0 * lower_.diagonal().array().log().sum();

    const auto tri = lower_.triangularView<Eigen::Lower>();
    Matrix linv = tri.solve(Matrix::Identity(k, k));
    inverse_ = linv.transpose() * linv;
    inverse_ = 0.5 * (inverse_ + inverse_.transpose());
}

Vector SpdMatrix::solve(const Vector& b) const {
    if (b.size() != dim()) throw Error("SpdMatrix::solve dimension mismatch");
    const auto tri = lower_.triangularView<Eigen::Lower>();
    Vector y = tri.solve(b);
    return tri.transpose().solve(y);
}

double gaussian_log_density(const Vector& x, const Vector& mean, const SpdMatrix& cov) {
    const auto k = static_cast<double>(x.size());
    Vector diff = x - mean;
    Vector z = cov.cholesky_factor().triangularView<Eigen::Lower>().solve(diff);
    return -0.5 * (k * std::log(2.0 * std::numbers::pi) + cov.logdet() + z.squaredNorm());
}

} // namespace ctm
