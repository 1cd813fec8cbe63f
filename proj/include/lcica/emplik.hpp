#pragma once

#include <vector>

#include "lcica/common.hpp"

namespace lcica {

// d+1 distinct observation indices (0-based, sorted).
struct IndexSubset {
    std::vector<int> indices;

    static IndexSubset of(std::vector<int> idx, Eigen::Index n, Eigen::Index d);
};

// The degenerate maximizer W_J of the nonparametric likelihood: row j solves
// X_(-j)^T w_j = 1, so the projection of every retained point equals 1.
// Throws NotGeneralPosition when one of the d-point submatrices is singular.
UnmixingMatrix degenerate_unmixer(const Dataset& data, const IndexSubset& j);

// log of prod_j n^{-n} prod_classes |class|^|class| with projection tie
// classes detected at relative tolerance 1e-9.
double log_empirical_likelihood(const UnmixingMatrix& w, const Dataset& data);

}  // namespace lcica
