#pragma once

#include <cstdint>
#include <vector>

#include "lcica/common.hpp"
#include "lcica/lcmle.hpp"
#include "lcica/whiten.hpp"

namespace lcica {

struct FitConfig {
    int restarts = 10;
    double eta = 1e-7;           // relative-improvement termination threshold
    double alpha = 0.3;          // line-search acceptance constant
    double gamma = 0.5;          // line-search backtracking factor
    int max_outer_iters = 500;
    std::uint64_t seed = 0;
    double lcmle_tol = 1e-8;

    void validate() const {
        if (restarts < 1) throw Error("restarts must be >= 1");
        if (!(eta > 0.0)) throw Error("eta must be positive");
        if (!(alpha > 0.0 && alpha < 1.0 && gamma > 0.0 && gamma < 1.0))
            throw Error("alpha and gamma must lie in (0,1)");
        if (max_outer_iters < 1) throw Error("max_outer_iters must be >= 1");
        if (!(lcmle_tol > 0.0)) throw Error("lcmle_tol must be positive");
    }
};

// Unmixing matrix plus fitted marginal densities of the projections
// w_j^T x; loglik is log|det W| + (1/n) sum_ij log f_j(w_j^T x_i).
struct IcaModel {
    UnmixingMatrix w;
    std::vector<LogConcaveDensity> densities;
    double loglik;
};

struct RestartRecord {
    double loglik;              // final whitened-space log-likelihood
    int iterations;
    std::vector<double> trace;  // log-likelihood after each density re-fit
    bool converged;             // relative rule fired before max_outer_iters
};

struct FitResult {
    IcaModel best;
    std::vector<RestartRecord> per_restart;
    WhiteningTransform whitener;
    Matrix best_o;              // orthogonal factor behind best.w
    int best_restart;
};

double log_likelihood(const UnmixingMatrix& w,
                      const std::vector<LogConcaveDensity>& densities,
                      const Dataset& data);

// Pre-whiten, then per restart alternate univariate log-concave fits with
// geodesic ascent over SO(d); keep the restart with the highest likelihood.
// Restarts run in parallel across `threads`; results do not depend on the
// thread count.
FitResult fit(const Dataset& data, const FitConfig& config, int threads = 1);

// s_i = W x_i
Dataset unmix(const IcaModel& model, const Dataset& data);

}  // namespace lcica
