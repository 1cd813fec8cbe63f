#include "lcica/sim.hpp"

#include <cmath>
#include <thread>

#include "lcica/whiten.hpp"

namespace lcica {

const std::vector<SourceKind>& all_source_kinds() {
    static const std::vector<SourceKind> kinds{
        SourceKind::Uniform, SourceKind::ShiftedExponential, SourceKind::ScaledT2,
        SourceKind::NormalMixture, SourceKind::ShiftedBinomial};
    return kinds;
}

std::string to_string(SourceKind kind) {
    switch (kind) {
        case SourceKind::Uniform: return "uniform";
        case SourceKind::ShiftedExponential: return "exponential";
        case SourceKind::ScaledT2: return "t2";
        case SourceKind::NormalMixture: return "mixture";
        case SourceKind::ShiftedBinomial: return "binomial";
    }
    throw Error("unknown source kind");
}

SourceKind source_kind_from_string(const std::string& name) {
    for (SourceKind k : all_source_kinds())
        if (to_string(k) == name) return k;
    throw Error("unknown source kind: " + name);
}

Matrix mixing_matrix() {
    Matrix a(2, 2);
    const double c = 0.5;
    const double s = std::sqrt(3.0) / 2.0;
    a << c, -s, s, c;
    return a;
}

double draw_source(SourceKind kind, Rng& rng) {
    switch (kind) {
        case SourceKind::Uniform:
            return rng.uniform(-0.5, 0.5);
        case SourceKind::ShiftedExponential:
            return rng.exponential() - 1.0;
        case SourceKind::ScaledT2: {
            // t_2 = Z / sqrt(chi2_2 / 2), chi2_2 = 2 Exp(1); scaled by 1/sqrt(2)
            double z = rng.normal();
            double chi2 = 2.0 * rng.exponential();
            return z / std::sqrt(chi2 / 2.0) / std::sqrt(2.0);
        }
        case SourceKind::NormalMixture:
            return rng.uniform() < 0.7 ? rng.normal() - 0.9 : rng.normal() + 2.1;
        case SourceKind::ShiftedBinomial: {
            int c = rng.bernoulli(0.5) + rng.bernoulli(0.5) + rng.bernoulli(0.5);
            return static_cast<double>(c) - 1.5;
        }
    }
    throw Error("unknown source kind");
}

std::pair<Dataset, Dataset> generate(const ExperimentSpec& spec, Rng& rng) {
    if (spec.d != 2)
        throw Error("the simulation presets are two-dimensional");
    if (spec.n < spec.d + 1)
        throw Error("need n >= d+1");
    Matrix s(spec.n, spec.d);
    for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.d; ++j) s(i, j) = draw_source(spec.kind, rng);
    Matrix x = s * mixing_matrix().transpose();
    return {Dataset(std::move(s)), Dataset(std::move(x))};
}

std::optional<DensityRef> reference_marginal(SourceKind kind) {
    switch (kind) {
        case SourceKind::Uniform: {
            DensityRef r;
            r.pdf = [](double x) { return (x >= -0.5 && x <= 0.5) ? 1.0 : 0.0; };
            r.cdf = [](double x) { return std::clamp(x + 0.5, 0.0, 1.0); };
            r.breakpoints = {-0.5, 0.5};
            return r;
        }
        case SourceKind::ShiftedExponential: {
            DensityRef r;
            r.pdf = [](double x) { return x >= -1.0 ? std::exp(-(x + 1.0)) : 0.0; };
            r.cdf = [](double x) { return x >= -1.0 ? 1.0 - std::exp(-(x + 1.0)) : 0.0; };
            r.breakpoints = {-1.0};
            return r;
        }
        case SourceKind::ScaledT2: {
            // log-concave projection of the scaled t_2: standard Laplace
            DensityRef r;
            r.pdf = [](double x) { return 0.5 * std::exp(-std::abs(x)); };
            r.cdf = [](double x) {
                return x < 0.0 ? 0.5 * std::exp(x) : 1.0 - 0.5 * std::exp(-x);
            };
            r.breakpoints = {0.0};
            return r;
        }
        case SourceKind::NormalMixture:
        case SourceKind::ShiftedBinomial:
            return std::nullopt;
    }
    throw Error("unknown source kind");
}

BaselineResult baseline_kurtosis_fit(const Dataset& data, std::uint64_t seed) {
    WhiteningTransform t = fit_whitener(data);
    Matrix z = whiten(t, data).x;
    const Eigen::Index n = z.rows();
    const Eigen::Index d = z.cols();
    Rng rng(seed);

    Matrix rows(d, d);
    bool all_converged = true;
    for (Eigen::Index p = 0; p < d; ++p) {
        Vector w(d);
        for (Eigen::Index k = 0; k < d; ++k) w[k] = rng.normal();
        auto orthonormalize = [&](Vector& v) {
            for (Eigen::Index q = 0; q < p; ++q)
                v -= v.dot(rows.row(q)) * rows.row(q).transpose();
            v.normalize();
        };
        orthonormalize(w);

        bool converged = false;
        for (int it = 0; it < 200; ++it) {
            Vector y = z * w;
            Vector wn = z.transpose() * y.array().cube().matrix() /
                            static_cast<double>(n) -
                        3.0 * w;
            orthonormalize(wn);
            double flip_free =
                std::min((wn - w).norm(), (wn + w).norm());
            w = wn;
            if (flip_free < 1e-9) {
                converged = true;
                break;
            }
        }
        if (!converged) all_converged = false;
        rows.row(p) = w.transpose();
    }
    return {rows * t.inv_sqrt, all_converged};
}

std::vector<RepRecord> run_experiment(const ExperimentSpec& spec, const FitConfig& config,
                                      int threads, bool with_baseline) {
    const UnmixingMatrix w0 = mixing_matrix().transpose();  // rotation inverse

    std::vector<std::optional<DensityRef>> refs;
    if (auto r = reference_marginal(spec.kind)) {
        refs.assign(static_cast<std::size_t>(spec.d), *r);
    } else {
        refs.assign(static_cast<std::size_t>(spec.d), std::nullopt);
    }

    std::vector<RepRecord> records(static_cast<std::size_t>(spec.reps));
    auto one_rep = [&](int rep) {
        RepRecord rec;
        rec.rep = rep;
        rec.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(rep));
        Rng rng(rec.seed);
        ExperimentSpec local = spec;
        auto [signals, obs] = generate(local, rng);
        (void)signals;

        FitConfig cfg = config;
        cfg.seed = rec.seed;
        FitResult fitres = fit(obs, cfg, 1);

        rec.amari_lcica = amari(fitres.best.w, w0);
        rec.loglik = fitres.best.loglik;
        const RestartRecord& br = fitres.per_restart[static_cast<std::size_t>(fitres.best_restart)];
        rec.iters = br.iterations;
        rec.converged = br.converged;

        if (with_baseline) {
            BaselineResult base = baseline_kurtosis_fit(obs, derive_seed(rec.seed, 0xBA5EULL));
            rec.amari_baseline = amari(base.w, w0);
        } else {
            rec.amari_baseline = std::numeric_limits<double>::quiet_NaN();
        }

        Alignment al = align(fitres.best, w0, &refs);
        rec.tv.assign(al.tv_errors.data(), al.tv_errors.data() + al.tv_errors.size());
        records[static_cast<std::size_t>(rep)] = std::move(rec);
    };

    threads = std::max(1, std::min(threads, spec.reps));
    if (threads == 1) {
        for (int rep = 0; rep < spec.reps; ++rep) one_rep(rep);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                for (int rep = t; rep < spec.reps; rep += threads) one_rep(rep);
            });
        for (auto& th : pool) th.join();
    }
    return records;
}

}  // namespace lcica
