#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "lcica/common.hpp"
#include "lcica/ica.hpp"
#include "lcica/lcmle.hpp"

namespace lcica {

// Reference density for total-variation scoring: pdf plus closed-form cdf
// (so tails outside a compact support integrate exactly) and the finite
// points where the pdf is non-smooth.
struct DensityRef {
    std::function<double(double)> pdf;
    std::function<double(double)> cdf;
    std::vector<double> breakpoints;
};

DensityRef density_ref(const LogConcaveDensity& g);

// Permutation- and scaling-invariant discrepancy via C = A B^{-1}; zero iff
// C is a scaled permutation. Throws SingularB.
double amari(const Matrix& a, const Matrix& b);

// (1/2) int |f - g|, absolute tolerance 1e-6. Sign changes of f - g are
// bracketed by bisection inside each smooth piece.
double tv_distance(const LogConcaveDensity& f, const DensityRef& g);
double tv_distance(const LogConcaveDensity& f, const LogConcaveDensity& g);

// Best permutation + per-row least-squares scalings matching fitted rows to
// the true unmixing matrix: eps minimizes ||eps^{-1} w_hat_{pi(j)} - w_j||.
struct Alignment {
    std::vector<int> pi;    // fitted row pi[j] corresponds to true row j
    Vector eps;
    Vector row_errors;
    Vector tv_errors;       // NaN entries when no reference was supplied
};

Alignment align(const IcaModel& fitted, const UnmixingMatrix& truth_w,
                const std::vector<std::optional<DensityRef>>* truth_densities = nullptr);

}  // namespace lcica
