#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lcica/common.hpp"
#include "lcica/ica.hpp"
#include "lcica/metrics.hpp"

namespace lcica {

// Source distributions of the simulation study, parameters fixed:
// Uniform[-0.5, 0.5], Exp(1)-1, t_2/sqrt(2), 0.7 N(-0.9,1) + 0.3 N(2.1,1),
// Bin(3, 1/2) - 1.5.
enum class SourceKind {
    Uniform,
    ShiftedExponential,
    ScaledT2,
    NormalMixture,
    ShiftedBinomial,
};

const std::vector<SourceKind>& all_source_kinds();
std::string to_string(SourceKind kind);
SourceKind source_kind_from_string(const std::string& name);

struct ExperimentSpec {
    SourceKind kind = SourceKind::Uniform;
    int n = 200;
    int d = 2;
    int reps = 200;
    std::uint64_t seed = 0;
};

// the pi/3 rotation [[1/2, -sqrt(3)/2], [sqrt(3)/2, 1/2]]
Matrix mixing_matrix();

double draw_source(SourceKind kind, Rng& rng);

// iid signals per coordinate, observations x_i = A s_i
std::pair<Dataset, Dataset> generate(const ExperimentSpec& spec, Rng& rng);

// known marginal for TV scoring: the true density for log-concave sources,
// the standard Laplace (the log-concave projection) for scaled t_2, nothing
// for the mixture and binomial sources
std::optional<DensityRef> reference_marginal(SourceKind kind);

struct BaselineResult {
    UnmixingMatrix w;
    bool converged;
};

// Minimal kurtosis-contrast deflation in whitened space; a stand-in
// comparison method, not a faithful FastICA port.
BaselineResult baseline_kurtosis_fit(const Dataset& data, std::uint64_t seed);

struct RepRecord {
    int rep = 0;
    std::uint64_t seed = 0;
    double amari_lcica = 0.0;
    double amari_baseline = 0.0;
    std::vector<double> tv;  // per coordinate, NaN without a reference
    double loglik = 0.0;
    int iters = 0;
    bool converged = false;
};

// One fit + baseline + metrics per replication; per-rep seeds are derived up
// front so results are independent of thread scheduling.
std::vector<RepRecord> run_experiment(const ExperimentSpec& spec, const FitConfig& config,
                                      int threads = 1, bool with_baseline = true);

}  // namespace lcica
