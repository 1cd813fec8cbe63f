#pragma once

#include <utility>
#include <vector>

#include "lcica/common.hpp"
#include "lcica/lcmle.hpp"

namespace lcica {

// Signed element of the orthonormal skew-symmetric basis: Y(r,s) = sign/sqrt(2),
// Y(s,r) = -sign/sqrt(2), 0 <= s < r < d (0-based).
struct SkewDirection {
    int r;
    int s;
    double sign;

    Matrix to_matrix(int d) const;
};

// Haar draw from SO(d): QR of an iid N(0,1) matrix with the R diagonal made
// positive; a row sign flip maps the det = -1 component into SO(d).
Matrix haar_orthogonal(int d, Rng& rng);

// exp(Y) for skew-symmetric Y by scaling and squaring; lands in SO(d).
Matrix matrix_exp_skew(const Matrix& y);

// The profiled objective g(W) = (1/n) sum_ij min_k (b_jk w_j^T z_i - beta_jk)
// for fixed fitted marginals, together with everything Prop-5-style
// directional derivatives need: per-point active segments with the tie rule
// resolved at build time.
class PiecewiseLogLik {
public:
    PiecewiseLogLik(const std::vector<LogConcaveDensity>& densities,
                    const Matrix& w, const Matrix& z);

    // g at the build matrix
    double value() const { return value_; }

    // g at an arbitrary matrix (the piecewise-linear extension is defined
    // everywhere, so points may leave the fitted supports)
    double value_at(const Matrix& w) const;

    // one-sided directional derivative of g at the build matrix along W*Y
    double directional_derivative(const Matrix& w, const Matrix& y) const;

    const Matrix& build_matrix() const { return w_; }

private:
    const std::vector<LogConcaveDensity>& densities_;
    Matrix w_;
    const Matrix& z_;
    double value_;
    // slope_pos(i,j): slope used when c_j^T x_i >= 0 (the smaller at a kink);
    // slope_neg: when c_j^T x_i < 0 (the larger). Equal off kinks.
    Matrix slope_pos_;
    Matrix slope_neg_;
};

// Scan all d(d-1) signed basis directions; ties broken by (r, s, sign) order.
std::pair<SkewDirection, double> best_direction(const PiecewiseLogLik& lik);

struct LineSearchResult {
    Matrix w;
    double epsilon;
};

// Backtracking line search along the geodesic W exp(eps Y), acceptance
// g(W exp(eps Y)) > g(W) + alpha * eps * deriv. Throws StallAtStationary when
// eps falls below 1e-12.
LineSearchResult line_search(const PiecewiseLogLik& lik, const Matrix& w,
                             const SkewDirection& y, double deriv,
                             double alpha, double gamma);

}  // namespace lcica
