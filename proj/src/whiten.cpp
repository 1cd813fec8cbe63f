#include "lcica/whiten.hpp"

#include <Eigen/Eigenvalues>

namespace lcica {

WhiteningTransform fit_whitener(const Dataset& data) {
    const Eigen::Index n = data.n();
    const Eigen::Index d = data.dim();
    if (n < d + 1)
        throw DegenerateData("need at least d+1 observations");

    WhiteningTransform t;
    t.mean = data.x.colwise().mean();
    Matrix centered = data.x.rowwise() - t.mean.transpose();
    t.sigma = centered.transpose() * centered / static_cast<double>(n);

    Eigen::SelfAdjointEigenSolver<Matrix> eig(t.sigma);
    const Vector& lambda = eig.eigenvalues();
    double floor = 1e-10 * lambda[d - 1];
    if (lambda[0] < floor)
        throw RankDeficient("sample covariance is numerically singular");

    Vector inv_root = lambda.array().rsqrt();
    Vector root = lambda.array().sqrt();
    t.inv_sqrt = eig.eigenvectors() * inv_root.asDiagonal() * eig.eigenvectors().transpose();
    t.sqrt = eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
    // symmetrize away eigendecomposition roundoff
    t.inv_sqrt = 0.5 * (t.inv_sqrt + t.inv_sqrt.transpose()).eval();
    t.sqrt = 0.5 * (t.sqrt + t.sqrt.transpose()).eval();
    t.log_det_sigma = lambda.array().log().sum();
    return t;
}

Dataset whiten(const WhiteningTransform& t, const Dataset& data) {
    if (data.dim() != t.mean.size())
        throw Error("dimension mismatch in whiten");
    Matrix centered = data.x.rowwise() - t.mean.transpose();
    return Dataset(centered * t.inv_sqrt);  // inv_sqrt is symmetric
}

Dataset unwhiten(const WhiteningTransform& t, const Dataset& data) {
    if (data.dim() != t.mean.size())
        throw Error("dimension mismatch in unwhiten");
    Matrix x = data.x * t.sqrt;
    x.rowwise() += t.mean.transpose();
    return Dataset(std::move(x));
}

UnmixingMatrix unwhiten_unmixer(const WhiteningTransform& t, const Matrix& o) {
    if ((o * o.transpose() - Matrix::Identity(o.rows(), o.cols())).norm() > 1e-8)
        throw Error("O is not orthogonal");
    return o * t.inv_sqrt;
}

}  // namespace lcica
