#include "lcica/ica.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <Eigen/QR>

#include "lcica/manifold.hpp"

namespace lcica {

double log_likelihood(const UnmixingMatrix& w,
                      const std::vector<LogConcaveDensity>& densities,
                      const Dataset& data) {
    const Eigen::Index n = data.n();
    const Eigen::Index d = data.dim();
    if (w.rows() != d || w.cols() != d ||
        static_cast<Eigen::Index>(densities.size()) != d)
        throw Error("dimension mismatch in log_likelihood");

    double det = w.determinant();
    if (det == 0.0) return -kInf;
    double total = std::log(std::abs(det));

    Matrix proj = data.x * w.transpose();
    double sum = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
        const auto& f = densities[static_cast<std::size_t>(j)];
        for (Eigen::Index i = 0; i < n; ++i) {
            double l = f.log_pdf(proj(i, j));
            if (l == -kInf) return -kInf;
            sum += l;
        }
    }
    return total + sum / static_cast<double>(n);
}

namespace {

constexpr int kMaxWStepsPerSweep = 50;
constexpr double kWStepDerivTol = 1e-9;

struct RestartOutcome {
    Matrix o;
    std::vector<LogConcaveDensity> densities;  // whitened-space marginals
    double loglik = -kInf;                     // whitened-space value
    RestartRecord record;
};

// restore orthogonality when accumulated geodesic steps drift
void reorthogonalize(Matrix& o) {
    const Eigen::Index d = o.rows();
    if ((o * o.transpose() - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-10)
        return;
    Eigen::HouseholderQR<Matrix> qr(o);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < d; ++i)
        if (r(i, i) < 0.0) q.col(i) = -q.col(i);
    o = q;
}

RestartOutcome run_restart(const Matrix& z, const FitConfig& cfg, std::uint64_t seed) {
    const Eigen::Index n = z.rows();
    const int d = static_cast<int>(z.cols());

    Rng rng(seed);
    Matrix o = haar_orthogonal(d, rng);

    RestartOutcome out;
    double prev_ll = -kInf;
    bool converged = false;
    int iters = 0;

    for (int t = 1; t <= cfg.max_outer_iters; ++t) {
        iters = t;

        Matrix proj = z * o.transpose();
        std::vector<LogConcaveDensity> densities;
        densities.reserve(static_cast<std::size_t>(d));
        double ll = 0.0;
        for (int j = 0; j < d; ++j) {
            auto sample = WeightedSample::from_points(proj.col(j));
            densities.push_back(fit_log_concave(sample, cfg.lcmle_tol));
            for (Eigen::Index i = 0; i < n; ++i)
                ll += densities.back().log_pdf(proj(i, j));
        }
        ll /= static_cast<double>(n);

        if (t > 1 && (ll - prev_ll) / (std::abs(prev_ll) + 1e-300) < cfg.eta) {
            converged = true;
            if (ll >= prev_ll) {
                out.record.trace.push_back(ll);
                out.o = o;
                out.densities = std::move(densities);
                out.loglik = ll;
            }
            // on a decrease the previous sweep's state is kept
            break;
        }
        out.record.trace.push_back(ll);
        out.o = o;
        out.densities = std::move(densities);
        out.loglik = ll;
        prev_ll = ll;

        for (int step = 0; step < kMaxWStepsPerSweep; ++step) {
            PiecewiseLogLik lik(out.densities, o, z);
            auto [dir, deriv] = best_direction(lik);
            if (deriv <= kWStepDerivTol) break;
            try {
                o = line_search(lik, o, dir, deriv, cfg.alpha, cfg.gamma).w;
            } catch (const StallAtStationary&) {
                break;
            }
            reorthogonalize(o);
        }
    }

    out.record.loglik = out.loglik;
    out.record.iterations = iters;
    out.record.converged = converged;
    return out;
}

}  // namespace

FitResult fit(const Dataset& data, const FitConfig& config, int threads) {
    config.validate();
    if (data.dim() < 2) throw DegenerateData("need at least 2 coordinates");

    FitResult result;
    result.whitener = fit_whitener(data);
    Dataset zdata = whiten(result.whitener, data);
    const Matrix& z = zdata.x;

    std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(config.restarts));
    auto worker = [&](int first, int stride) {
        for (int r = first; r < config.restarts; r += stride)
            outcomes[static_cast<std::size_t>(r)] =
                run_restart(z, config, derive_seed(config.seed, static_cast<std::uint64_t>(r)));
    };
    threads = std::max(1, std::min(threads, config.restarts));
    if (threads == 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t, threads);
        for (auto& th : pool) th.join();
    }

    int best = 0;
    for (int r = 1; r < config.restarts; ++r)
        if (outcomes[static_cast<std::size_t>(r)].loglik > outcomes[static_cast<std::size_t>(best)].loglik)
            best = r;

    RestartOutcome& top = outcomes[static_cast<std::size_t>(best)];
    result.best_restart = best;
    result.best_o = top.o;
    result.best.w = unwhiten_unmixer(result.whitener, top.o);

    // shift the whitened-space marginals so they describe w_j^T x directly
    result.best.densities.clear();
    for (Eigen::Index j = 0; j < data.dim(); ++j) {
        double shift = result.best.w.row(j).dot(result.whitener.mean);
        result.best.densities.push_back(
            top.densities[static_cast<std::size_t>(j)].scaled(1.0, shift));
    }
    result.best.loglik = top.loglik - 0.5 * result.whitener.log_det_sigma;

    result.per_restart.reserve(outcomes.size());
    for (auto& oc : outcomes) result.per_restart.push_back(std::move(oc.record));
    return result;
}

Dataset unmix(const IcaModel& model, const Dataset& data) {
    if (data.dim() != model.w.cols())
        throw Error("dimension mismatch in unmix");
    return Dataset(data.x * model.w.transpose());
}

}  // namespace lcica
