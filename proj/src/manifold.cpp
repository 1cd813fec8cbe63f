#include "lcica/manifold.hpp"

#include <algorithm>

#include <cmath>

#include <Eigen/QR>

namespace lcica {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
}

Matrix SkewDirection::to_matrix(int d) const {
    Matrix y = Matrix::Zero(d, d);
    y(r, s) = sign * kInvSqrt2;
    y(s, r) = -sign * kInvSqrt2;
    return y;
}

Matrix haar_orthogonal(int d, Rng& rng) {
    Matrix z(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) z(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < d; ++i)
        if (r(i, i) < 0.0) q.col(i) = -q.col(i);
    if (q.determinant() < 0.0) q.row(0) = -q.row(0);
    return q;
}

Matrix matrix_exp_skew(const Matrix& y) {
    if ((y + y.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw Error("matrix is not skew-symmetric");
    const Eigen::Index d = y.rows();

    double norm = y.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    while (norm > 0.5) {
        norm *= 0.5;
        ++squarings;
    }
    Matrix t = y / std::pow(2.0, squarings);

    Matrix result = Matrix::Identity(d, d);
    Matrix term = Matrix::Identity(d, d);
    for (int k = 1; k <= 30; ++k) {
        term = (term * t / static_cast<double>(k)).eval();
        result += term;
        if (term.cwiseAbs().maxCoeff() < 1e-18) break;
    }
    for (int k = 0; k < squarings; ++k) result = (result * result).eval();
    return result;
}

PiecewiseLogLik::PiecewiseLogLik(const std::vector<LogConcaveDensity>& densities,
                                 const Matrix& w, const Matrix& z)
    : densities_(densities), w_(w), z_(z) {
    const Eigen::Index n = z.rows();
    const Eigen::Index d = z.cols();
    if (static_cast<Eigen::Index>(densities.size()) != d || w.rows() != d || w.cols() != d)
        throw Error("dimension mismatch in PiecewiseLogLik");

    Matrix proj = z * w.transpose();
    slope_pos_.resize(n, d);
    slope_neg_.resize(n, d);
    double total = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
        const auto& segs = densities[static_cast<std::size_t>(j)].segments();
        const auto& pk = densities[static_cast<std::size_t>(j)].piece_knots();
        const int last = static_cast<int>(segs.size()) - 1;
        for (Eigen::Index i = 0; i < n; ++i) {
            double x = proj(i, j);
            auto it = std::upper_bound(pk.begin() + 1, pk.end() - 1, x);
            int k = static_cast<int>(it - pk.begin()) - 1;
            double vk = segs[k].slope * x - segs[k].intercept;
            int k2 = -1;
            double v2 = kInf;
            if (k > 0) {
                double v = segs[k - 1].slope * x - segs[k - 1].intercept;
                if (v < v2) { v2 = v; k2 = k - 1; }
            }
            if (k < last) {
                double v = segs[k + 1].slope * x - segs[k + 1].intercept;
                if (v < v2) { v2 = v; k2 = k + 1; }
            }
            int kmin = k;
            double vmin = vk;
            if (k2 >= 0 && v2 < vmin) { std::swap(vmin, v2); kmin = k2; k2 = k; }
            total += vmin;
            if (k2 >= 0 && v2 - vmin < 1e-12 * (1.0 + std::abs(vmin))) {
                // at a kink: both neighbouring slopes are one-sided candidates
                double blo = std::min(segs[kmin].slope, segs[k2].slope);
                double bhi = std::max(segs[kmin].slope, segs[k2].slope);
                slope_pos_(i, j) = blo;
                slope_neg_(i, j) = bhi;
            } else {
                slope_pos_(i, j) = segs[kmin].slope;
                slope_neg_(i, j) = segs[kmin].slope;
            }
        }
    }
    value_ = total / static_cast<double>(n);
}

double PiecewiseLogLik::value_at(const Matrix& w) const {
    Matrix proj = z_ * w.transpose();
    double total = 0.0;
    for (Eigen::Index j = 0; j < proj.cols(); ++j) {
        const auto& f = densities_[static_cast<std::size_t>(j)];
        for (Eigen::Index i = 0; i < proj.rows(); ++i)
            total += f.log_pdf_extended(proj(i, j));
    }
    return total / static_cast<double>(proj.rows());
}

double PiecewiseLogLik::directional_derivative(const Matrix& w, const Matrix& y) const {
    Matrix m = z_ * (w * y).transpose();  // m(i,j) = c_j^T z_i
    double total = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            double c = m(i, j);
            total += (c >= 0.0 ? slope_pos_(i, j) : slope_neg_(i, j)) * c;
        }
    return total / static_cast<double>(m.rows());
}

std::pair<SkewDirection, double> best_direction(const PiecewiseLogLik& lik) {
    const Matrix& w = lik.build_matrix();
    const int d = static_cast<int>(w.rows());
    SkewDirection best{1, 0, +1.0};
    double best_deriv = -kInf;
    for (int r = 1; r < d; ++r)
        for (int s = 0; s < r; ++s)
            for (double sign : {+1.0, -1.0}) {
                SkewDirection dir{r, s, sign};
                double deriv = lik.directional_derivative(w, dir.to_matrix(d));
                if (deriv > best_deriv) {
                    best_deriv = deriv;
                    best = dir;
                }
            }
    return {best, best_deriv};
}

LineSearchResult line_search(const PiecewiseLogLik& lik, const Matrix& w,
                             const SkewDirection& y, double deriv,
                             double alpha, double gamma) {
    if (!(deriv > 0.0)) throw Error("line search needs a positive derivative");
    if (!(alpha > 0.0 && alpha < 1.0 && gamma > 0.0 && gamma < 1.0))
        throw Error("line search constants must lie in (0,1)");

    const Matrix ym = y.to_matrix(static_cast<int>(w.rows()));
    const double g0 = lik.value();
    double eps = 1.0;
    while (eps >= 1e-12) {
        Matrix cand = w * matrix_exp_skew(eps * ym);
        if (lik.value_at(cand) > g0 + alpha * eps * deriv)
            return {std::move(cand), eps};
        eps *= gamma;
    }
    throw StallAtStationary("no ascent along the chosen direction");
}

}  // namespace lcica
