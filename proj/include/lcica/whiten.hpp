#pragma once

#include "lcica/common.hpp"

namespace lcica {

// Sample mean, covariance (divisor n) and its inverse symmetric square root.
struct WhiteningTransform {
    Vector mean;
    Matrix sigma;
    Matrix inv_sqrt;   // Sigma^{-1/2}
    Matrix sqrt;       // Sigma^{1/2}, for unwhitening
    double log_det_sigma = 0.0;
};

// Throws DegenerateData if n < d+1, RankDeficient if the smallest covariance
// eigenvalue falls below 1e-10 times the largest (data on a hyperplane).
WhiteningTransform fit_whitener(const Dataset& data);

// z_i = Sigma^{-1/2} (x_i - mean)
Dataset whiten(const WhiteningTransform& t, const Dataset& data);

// inverse of whiten
Dataset unwhiten(const WhiteningTransform& t, const Dataset& data);

// W = O * Sigma^{-1/2} for orthogonal O found in whitened space
UnmixingMatrix unwhiten_unmixer(const WhiteningTransform& t, const Matrix& o);

}  // namespace lcica
