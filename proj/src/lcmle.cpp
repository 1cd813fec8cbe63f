#include "lcica/lcmle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace lcica {

namespace {

// exp with overflow guard; arguments beyond 700 would poison the objective
double safe_exp(double x) { return x > 700.0 ? kInf : std::exp(x); }

}  // namespace

namespace detail {

double j0(double delta) {
    if (std::abs(delta) < 1e-4)
        return 1.0 + delta * (0.5 + delta * (1.0 / 6.0 + delta / 24.0));
    return std::expm1(delta) / delta;
}

double j1(double delta) {
    if (std::abs(delta) < 1e-4)
        return 0.5 + delta * (1.0 / 3.0 + delta * (0.125 + delta / 30.0));
    return (std::exp(delta) * (delta - 1.0) + 1.0) / (delta * delta);
}

double j2(double delta) {
    if (std::abs(delta) < 1e-4)
        return 1.0 / 3.0 + delta * (0.25 + delta * (0.1 + delta / 36.0));
    return (std::exp(delta) * (delta * (delta - 2.0) + 2.0) - 2.0) / (delta * delta * delta);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// WeightedSample

WeightedSample WeightedSample::from_points(const Vector& raw) {
    Vector w = Vector::Constant(raw.size(), 1.0 / static_cast<double>(raw.size()));
    return from_points(raw, w);
}

WeightedSample WeightedSample::from_points(const Vector& raw, const Vector& raw_weights) {
    if (raw.size() != raw_weights.size())
        throw Error("values/weights size mismatch");
    if (raw.size() < 2)
        throw DegenerateSample("need at least 2 observations");
    if (!raw.allFinite())
        throw NonFinite("sample contains non-finite values");

    std::vector<Eigen::Index> order(raw.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return raw[a] < raw[b]; });

    // collapse ties; values within relative 1e-13 merge to their weighted mean
    std::vector<double> vals, wts;
    for (Eigen::Index k = 0; k < raw.size(); ++k) {
        double v = raw[order[k]];
        double w = raw_weights[order[k]];
        if (w <= 0.0) throw Error("weights must be positive");
        if (!vals.empty() &&
            v - vals.back() <= 1e-13 * (1.0 + std::max(std::abs(v), std::abs(vals.back())))) {
            double wt = wts.back() + w;
            vals.back() = (vals.back() * wts.back() + v * w) / wt;
            wts.back() = wt;
        } else {
            vals.push_back(v);
            wts.push_back(w);
        }
    }
    if (vals.size() < 2)
        throw DegenerateSample("fewer than 2 distinct values");

    WeightedSample s;
    s.values = Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    s.weights = Eigen::Map<Vector>(wts.data(), static_cast<Eigen::Index>(wts.size()));
    s.weights /= s.weights.sum();
    return s;
}

void WeightedSample::validate() const {
    if (values.size() != weights.size() || values.size() < 2)
        throw DegenerateSample("fewer than 2 distinct values");
    for (Eigen::Index i = 0; i + 1 < values.size(); ++i)
        if (!(values[i] < values[i + 1]))
            throw Error("values not strictly increasing");
    if ((weights.array() <= 0.0).any())
        throw Error("weights must be positive");
    if (std::abs(weights.sum() - 1.0) > 1e-12)
        throw Error("weights must sum to 1");
}

// ---------------------------------------------------------------------------
// LogConcaveDensity

LogConcaveDensity::LogConcaveDensity(Vector knots, Vector phi)
    : knots_(std::move(knots)), phi_(std::move(phi)) {
    const Eigen::Index m = knots_.size();
    if (m < 2 || phi_.size() != m)
        throw Error("density needs >= 2 knots with matching phi");
    if (!knots_.allFinite() || !phi_.allFinite())
        throw NonFinite("density has non-finite knots or phi");
    for (Eigen::Index k = 0; k + 1 < m; ++k)
        if (!(knots_[k] < knots_[k + 1]))
            throw Error("knots not strictly increasing");

    // raw slopes; reject genuine convexity, merge near-collinear pieces
    std::vector<double> slope(m - 1), left(m - 1), right(m - 1), pl(m - 1), pr(m - 1);
    for (Eigen::Index k = 0; k + 1 < m; ++k) {
        slope[k] = (phi_[k + 1] - phi_[k]) / (knots_[k + 1] - knots_[k]);
        left[k] = knots_[k];
        right[k] = knots_[k + 1];
        pl[k] = phi_[k];
        pr[k] = phi_[k + 1];
    }
    for (std::size_t k = 0; k + 1 < slope.size(); ++k) {
        double scale = 1.0 + std::abs(slope[k]) + std::abs(slope[k + 1]);
        if (slope[k + 1] > slope[k] + 1e-8 * scale)
            throw Error("phi is not concave");
    }

    auto mergeable = [](double s0, double s1) {
        return s1 >= s0 - 1e-10 * (1.0 + std::abs(s0) + std::abs(s1));
    };
    std::size_t k = 0;
    while (k + 1 < slope.size()) {
        if (mergeable(slope[k], slope[k + 1])) {
            right[k] = right[k + 1];
            pr[k] = pr[k + 1];
            slope[k] = (pr[k] - pl[k]) / (right[k] - left[k]);
            slope.erase(slope.begin() + k + 1);
            left.erase(left.begin() + k + 1);
            right.erase(right.begin() + k + 1);
            pl.erase(pl.begin() + k + 1);
            pr.erase(pr.begin() + k + 1);
            if (k > 0) --k;  // the merge may have made k collinear with k-1
        } else {
            ++k;
        }
    }

    segments_.resize(slope.size());
    piece_knots_.resize(slope.size() + 1);
    piece_phi_.resize(slope.size() + 1);
    cum_mass_.resize(slope.size() + 1);
    cum_mass_[0] = 0.0;
    for (std::size_t i = 0; i < slope.size(); ++i) {
        segments_[i].slope = slope[i];
        segments_[i].intercept = slope[i] * left[i] - pl[i];
        piece_knots_[i] = left[i];
        piece_phi_[i] = pl[i];
        double h = right[i] - left[i];
        cum_mass_[i + 1] = cum_mass_[i] + h * safe_exp(pl[i]) * detail::j0(pr[i] - pl[i]);
    }
    piece_knots_.back() = right.back();
    piece_phi_.back() = pr.back();

    if (std::abs(cum_mass_.back() - 1.0) > 1e-8)
        throw Error("density is not normalized");
}

int LogConcaveDensity::piece_index(double x) const {
    auto it = std::upper_bound(piece_knots_.begin() + 1, piece_knots_.end() - 1, x);
    return static_cast<int>(it - piece_knots_.begin()) - 1;
}

double LogConcaveDensity::log_pdf(double x) const {
    if (x < support_lo() || x > support_hi()) return -kInf;
    const Segment& s = segments_[static_cast<std::size_t>(piece_index(x))];
    return s.slope * x - s.intercept;
}

double LogConcaveDensity::pdf(double x) const {
    double l = log_pdf(x);
    return l == -kInf ? 0.0 : std::exp(l);
}

double LogConcaveDensity::log_pdf_extended(double x) const {
    const Segment& s = segments_[static_cast<std::size_t>(piece_index(x))];
    return s.slope * x - s.intercept;
}

double LogConcaveDensity::integrate(double a, double b) const {
    if (b < a) return -integrate(b, a);
    a = std::max(a, support_lo());
    b = std::min(b, support_hi());
    if (b <= a) return 0.0;
    int ka = piece_index(a);
    int kb = piece_index(b);
    auto partial = [&](int k, double x0, double x1) {
        double h = x1 - x0;
        double p = segments_[k].slope * x0 - segments_[k].intercept;
        return h * std::exp(p) * detail::j0(segments_[k].slope * h);
    };
    if (ka == kb) return partial(ka, a, b);
    double total = partial(ka, a, piece_knots_[ka + 1]);
    total += cum_mass_[kb] - cum_mass_[ka + 1];
    total += partial(kb, piece_knots_[kb], b);
    return total;
}

double LogConcaveDensity::quantile(double p) const {
    if (p <= 0.0) return support_lo();
    if (p >= cum_mass_.back()) return support_hi();
    auto it = std::upper_bound(cum_mass_.begin(), cum_mass_.end(), p);
    int k = std::max(0, static_cast<int>(it - cum_mass_.begin()) - 1);
    k = std::min(k, static_cast<int>(segments_.size()) - 1);
    double x0 = piece_knots_[k];
    double m = p - cum_mass_[k];
    double b = segments_[k].slope;
    double p0 = piece_phi_[k];
    double x;
    if (std::abs(b) * (piece_knots_[k + 1] - x0) < 1e-12) {
        x = x0 + m * std::exp(-p0);
    } else {
        x = x0 + std::log1p(m * b * std::exp(-p0)) / b;
    }
    return std::clamp(x, piece_knots_[k], piece_knots_[k + 1]);
}

double LogConcaveDensity::first_moment() const {
    double total = 0.0;
    for (std::size_t k = 0; k < segments_.size(); ++k) {
        double x0 = piece_knots_[k];
        double h = piece_knots_[k + 1] - x0;
        double delta = segments_[k].slope * h;
        total += h * std::exp(piece_phi_[k]) *
                 (x0 * detail::j0(delta) + h * detail::j1(delta));
    }
    return total;
}

Vector LogConcaveDensity::sample(Rng& rng, Eigen::Index n) const {
    Vector out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = quantile(rng.uniform());
    return out;
}

LogConcaveDensity LogConcaveDensity::scaled(double a, double b) const {
    if (a == 0.0) throw Error("scale factor must be non-zero");
    const Eigen::Index m = knots_.size();
    Vector k(m), p(m);
    double la = std::log(std::abs(a));
    for (Eigen::Index i = 0; i < m; ++i) {
        Eigen::Index src = a > 0 ? i : m - 1 - i;
        k[i] = a * knots_[src] + b;
        p[i] = phi_[src] - la;
    }
    return LogConcaveDensity(std::move(k), std::move(p));
}

double lcmle_objective(const WeightedSample& sample, const LogConcaveDensity& f) {
    double lin = 0.0;
    for (Eigen::Index i = 0; i < sample.values.size(); ++i)
        lin += sample.weights[i] * f.log_pdf(sample.values[i]);
    return lin - f.integrate(f.support_lo(), f.support_hi()) + 1.0;
}

// ---------------------------------------------------------------------------
// Active-set solver

namespace {

class ActiveSetFit {
public:
    ActiveSetFit(const WeightedSample& s, double tol)
        : v_(s.values), w_(s.weights),
          tol_grad_(std::max(tol * 1e-2, 1e-12)),
          tol_add_(std::max(tol * 0.1, 1e-11)) {}

    LogConcaveDensity run() {
        const Eigen::Index m = v_.size();
        knots_ = {0, static_cast<int>(m - 1)};
        double range = v_[m - 1] - v_[0];
        psi_.assign(2, -std::log(range));
        rebuild_linear_coeffs();

        const int max_outer = static_cast<int>(5 * m + 100);
        for (int outer = 0; outer < max_outer; ++outer) {
            newton_on_active_set();
            auto [j, d] = best_knot_to_add();
            if (j < 0 || d <= tol_add_) break;
            add_knot(j);
        }

        // the stationarity conditions force int exp(phi) = 1; renormalize the
        // residual so the contract holds to machine precision
        double total = total_integral(psi_);
        double shift = std::log(total);
        Vector kk(knots_.size()), pp(knots_.size());
        for (std::size_t a = 0; a < knots_.size(); ++a) {
            kk[static_cast<Eigen::Index>(a)] = v_[knots_[a]];
            pp[static_cast<Eigen::Index>(a)] = psi_[a] - shift;
        }
        return LogConcaveDensity(std::move(kk), std::move(pp));
    }

private:
    double knot_x(std::size_t a) const { return v_[knots_[a]]; }

    // weight each knot value receives from linear interpolation of the data
    void rebuild_linear_coeffs() {
        lin_.assign(knots_.size(), 0.0);
        std::size_t a = 0;
        for (Eigen::Index i = 0; i < v_.size(); ++i) {
            while (a + 1 < knots_.size() && i >= knots_[a + 1]) ++a;
            if (i == knots_[a]) {
                lin_[a] += w_[i];
            } else {
                double theta = (v_[i] - knot_x(a)) / (knot_x(a + 1) - knot_x(a));
                lin_[a] += w_[i] * (1.0 - theta);
                lin_[a + 1] += w_[i] * theta;
            }
        }
    }

    double total_integral(const std::vector<double>& psi) const {
        double total = 0.0;
        for (std::size_t a = 0; a + 1 < knots_.size(); ++a) {
            double h = knot_x(a + 1) - knot_x(a);
            double e = safe_exp(psi[a]);
            if (e == kInf) return kInf;
            total += h * e * detail::j0(psi[a + 1] - psi[a]);
        }
        return total;
    }

    double objective(const std::vector<double>& psi) const {
        double total = total_integral(psi);
        if (total == kInf) return -kInf;
        double linpart = 0.0;
        for (std::size_t a = 0; a < knots_.size(); ++a) linpart += lin_[a] * psi[a];
        return linpart - total + 1.0;
    }

    // gradient of the objective and (positive definite) negated Hessian,
    // both tridiagonal in the knot values
    void grad_hess(std::vector<double>& g, std::vector<double>& hd,
                   std::vector<double>& ho) const {
        const std::size_t p = knots_.size();
        g.assign(p, 0.0);
        hd.assign(p, 0.0);
        ho.assign(p - 1, 0.0);
        for (std::size_t a = 0; a < p; ++a) g[a] = lin_[a];
        for (std::size_t a = 0; a + 1 < p; ++a) {
            double h = knot_x(a + 1) - knot_x(a);
            double ep = safe_exp(psi_[a]);
            double delta = psi_[a + 1] - psi_[a];
            double J0 = detail::j0(delta), J1 = detail::j1(delta), J2 = detail::j2(delta);
            g[a] -= h * ep * (J0 - J1);
            g[a + 1] -= h * ep * J1;
            hd[a] += h * ep * (J0 - 2.0 * J1 + J2);
            hd[a + 1] += h * ep * J2;
            ho[a] += h * ep * (J1 - J2);
        }
    }

    // solve (tridiagonal SPD) H x = g by LDL^T
    static std::vector<double> solve_tridiag(std::vector<double> d, std::vector<double> e,
                                             std::vector<double> b) {
        const std::size_t n = d.size();
        for (std::size_t i = 1; i < n; ++i) {
            double l = e[i - 1] / d[i - 1];
            d[i] -= l * e[i - 1];
            b[i] -= l * b[i - 1];
            e[i - 1] = l;
        }
        b[n - 1] /= d[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) b[i] = b[i] / d[i] - e[i] * b[i + 1];
        return b;
    }

    void remove_knots(const std::vector<std::size_t>& idx) {
        for (auto it = idx.rbegin(); it != idx.rend(); ++it) {
            knots_.erase(knots_.begin() + static_cast<std::ptrdiff_t>(*it));
            psi_.erase(psi_.begin() + static_cast<std::ptrdiff_t>(*it));
        }
        rebuild_linear_coeffs();
    }

    void add_knot(int j) {
        auto pos = std::lower_bound(knots_.begin(), knots_.end(), j);
        std::size_t a = static_cast<std::size_t>(pos - knots_.begin()) - 1;
        double theta = (v_[j] - knot_x(a)) / (knot_x(a + 1) - knot_x(a));
        double val = psi_[a] * (1.0 - theta) + psi_[a + 1] * theta;
        knots_.insert(pos, j);
        psi_.insert(psi_.begin() + static_cast<std::ptrdiff_t>(a) + 1, val);
        rebuild_linear_coeffs();
    }

    void newton_on_active_set() {
        std::vector<double> g, hd, ho;
        for (int it = 0; it < 200; ++it) {
            grad_hess(g, hd, ho);
            double gmax = 0.0;
            for (double x : g) gmax = std::max(gmax, std::abs(x));
            if (gmax < tol_grad_) return;

            std::vector<double> step = solve_tridiag(hd, ho, g);
            double gdot = 0.0;
            for (std::size_t a = 0; a < g.size(); ++a) gdot += g[a] * step[a];
            if (!(gdot > 0.0)) return;  // numerically stationary

            // largest feasible fraction of the step under the concavity cone
            double tau_max = 1.0;
            std::vector<std::size_t> blocking;
            const std::size_t p = knots_.size();
            for (std::size_t a = 1; a + 1 < p; ++a) {
                double hl = knot_x(a) - knot_x(a - 1);
                double hr = knot_x(a + 1) - knot_x(a);
                double c0 = (psi_[a] - psi_[a - 1]) / hl - (psi_[a + 1] - psi_[a]) / hr;
                double dc = (step[a] - step[a - 1]) / hl - (step[a + 1] - step[a]) / hr;
                double c1 = c0 + dc;
                if (c1 < 0.0 && dc < 0.0) {
                    double tau = std::max(c0, 0.0) / -dc;
                    if (tau < tau_max - 1e-15) {
                        tau_max = tau;
                        blocking.assign(1, a);
                    } else if (tau <= tau_max + 1e-15) {
                        blocking.push_back(a);
                    }
                }
            }

            if (tau_max <= 1e-14) {
                remove_knots(blocking);
                continue;
            }

            double f0 = objective(psi_);
            auto stepped = [&](double t) {
                std::vector<double> q(psi_);
                for (std::size_t a = 0; a < q.size(); ++a) q[a] += t * step[a];
                return q;
            };

            if (tau_max < 1.0) {
                std::vector<double> cand = stepped(tau_max);
                if (objective(cand) >= f0 - 1e-15 * (1.0 + std::abs(f0))) {
                    psi_ = std::move(cand);
                    remove_knots(blocking);
                    continue;
                }
            }

            double t = std::min(tau_max, 1.0);
            bool accepted = false;
            for (int back = 0; back < 60; ++back) {
                std::vector<double> cand = stepped(t);
                if (objective(cand) > f0 + 1e-4 * t * gdot) {
                    psi_ = std::move(cand);
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if (!accepted) return;  // no ascent within the cone: stationary
        }
    }

    // best violated optimality condition among candidate knots: directional
    // derivative of the objective for the tent basis function at each data
    // value strictly between consecutive knots
    std::pair<int, double> best_knot_to_add() const {
        int best_j = -1;
        double best_d = 0.0;
        for (std::size_t a = 0; a + 1 < knots_.size(); ++a) {
            int ia = knots_[a], ib = knots_[a + 1];
            if (ib - ia < 2) continue;
            double xa = v_[ia], xb = v_[ib];
            double p0 = psi_[a], p1 = psi_[a + 1];
            double L = xb - xa;

            // prefix sums of w*(v - xa) from the left and w*(xb - v) from the right
            int cnt = ib - ia - 1;
            std::vector<double> left(cnt + 1, 0.0), right(cnt + 1, 0.0);
            for (int t = 1; t <= cnt; ++t)
                left[t] = left[t - 1] + w_[ia + t] * (v_[ia + t] - xa);
            for (int t = cnt - 1; t >= 0; --t)
                right[t] = right[t + 1] + w_[ia + t + 1] * (xb - v_[ia + t + 1]);

            for (int t = 1; t <= cnt; ++t) {
                int j = ia + t;
                double lam = v_[j] - xa, rho = xb - v_[j];
                double sw = left[t] / lam + right[t] / rho;
                double pm = p0 + (p1 - p0) * lam / L;
                double sint = lam * std::exp(p0) * detail::j1(pm - p0) +
                              rho * std::exp(pm) *
                                  (detail::j0(p1 - pm) - detail::j1(p1 - pm));
                double d = sw - sint;
                if (d > best_d) {
                    best_d = d;
                    best_j = j;
                }
            }
        }
        return {best_j, best_d};
    }

    const Vector& v_;
    const Vector& w_;
    double tol_grad_;
    double tol_add_;
    std::vector<int> knots_;
    std::vector<double> psi_;
    std::vector<double> lin_;
};

}  // namespace

LogConcaveDensity fit_log_concave(const WeightedSample& sample, double tol) {
    sample.validate();
    return ActiveSetFit(sample, tol).run();
}

}  // namespace lcica
