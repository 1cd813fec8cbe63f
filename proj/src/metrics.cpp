#include "lcica/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/LU>

namespace lcica {

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double tol,
                        int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate_smooth(const std::function<double(double)>& f, double a, double b,
                        double tol) {
    if (!(b > a)) return 0.0;
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

// locate a sign change of h inside [a, b] given h(a)*h(b) < 0
double bisect_root(const std::function<double(double)>& h, double a, double b,
                   double ha) {
    for (int it = 0; it < 80; ++it) {
        double m = 0.5 * (a + b);
        if (b - a <= 1e-14 * (1.0 + std::abs(m))) return m;
        double hm = h(m);
        if (hm == 0.0) return m;
        if ((ha < 0.0) != (hm < 0.0)) {
            b = m;
        } else {
            a = m;
            ha = hm;
        }
    }
    return 0.5 * (a + b);
}

double tv_core(const LogConcaveDensity& f, const DensityRef& g) {
    const double lo = f.support_lo();
    const double hi = f.support_hi();

    std::vector<double> cuts(f.piece_knots());
    for (double b : g.breakpoints)
        if (b > lo && b < hi) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    auto diff = [&](double x) { return f.pdf(x) - g.pdf(x); };

    double interior = 0.0;
    const double span = hi - lo;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        double a = cuts[k], b = cuts[k + 1];
        if (!(b > a)) continue;

        // bracket sign changes on a fine grid, then bisect
        constexpr int kGrid = 32;
        std::vector<double> splits{a};
        double xprev = a, hprev = diff(a);
        for (int t = 1; t <= kGrid; ++t) {
            double x = a + (b - a) * t / kGrid;
            double hx = diff(x);
            if ((hprev < 0.0) != (hx < 0.0))
                splits.push_back(bisect_root(diff, xprev, x, hprev));
            xprev = x;
            hprev = hx;
        }
        splits.push_back(b);

        double tol = 2.5e-7 * std::max((b - a) / span, 1e-6);
        for (std::size_t t = 0; t + 1 < splits.size(); ++t)
            interior += std::abs(integrate_smooth(diff, splits[t], splits[t + 1], tol));
    }

    double tails = g.cdf(lo) + (1.0 - g.cdf(hi));
    return 0.5 * (interior + tails);
}

}  // namespace

DensityRef density_ref(const LogConcaveDensity& g) {
    DensityRef ref;
    ref.pdf = [g](double x) { return g.pdf(x); };
    ref.cdf = [g](double x) { return g.cdf(x); };
    ref.breakpoints = g.piece_knots();
    return ref;
}

double amari(const Matrix& a, const Matrix& b) {
    const Eigen::Index d = a.rows();
    if (a.cols() != d || b.rows() != d || b.cols() != d)
        throw Error("amari needs square matrices of equal size");
    Eigen::FullPivLU<Matrix> lu(b);
    if (!lu.isInvertible())
        throw SingularB("second argument of amari is singular");
    Matrix c = (a * lu.inverse()).cwiseAbs();

    double rows = 0.0, cols = 0.0;
    for (Eigen::Index i = 0; i < d; ++i)
        rows += c.row(i).sum() / c.row(i).maxCoeff() - 1.0;
    for (Eigen::Index j = 0; j < d; ++j)
        cols += c.col(j).sum() / c.col(j).maxCoeff() - 1.0;
    return (rows + cols) / (2.0 * static_cast<double>(d));
}

double tv_distance(const LogConcaveDensity& f, const DensityRef& g) {
    return tv_core(f, g);
}

double tv_distance(const LogConcaveDensity& f, const LogConcaveDensity& g) {
    return tv_core(f, density_ref(g));
}

Alignment align(const IcaModel& fitted, const UnmixingMatrix& truth_w,
                const std::vector<std::optional<DensityRef>>* truth_densities) {
    const Eigen::Index d = truth_w.rows();
    if (d > 8) throw Error("align uses exhaustive permutation search, d <= 8");
    if (fitted.w.rows() != d || fitted.w.cols() != truth_w.cols())
        throw Error("dimension mismatch in align");

    auto row_fit = [&](Eigen::Index fit_row, Eigen::Index true_row) {
        Vector a = fitted.w.row(fit_row);
        Vector b = truth_w.row(true_row);
        double s = a.dot(b) / a.squaredNorm();  // s = 1/eps
        double err = (s * a - b).norm();
        return std::make_pair(s, err);
    };

    std::vector<int> perm(static_cast<std::size_t>(d));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best_perm = perm;
    double best_total = kInf;
    do {
        double total = 0.0;
        for (Eigen::Index j = 0; j < d; ++j)
            total += row_fit(perm[static_cast<std::size_t>(j)], j).second;
        if (total < best_total) {
            best_total = total;
            best_perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    Alignment out;
    out.pi = best_perm;
    out.eps.resize(d);
    out.row_errors.resize(d);
    out.tv_errors = Vector::Constant(d, std::numeric_limits<double>::quiet_NaN());
    for (Eigen::Index j = 0; j < d; ++j) {
        auto [s, err] = row_fit(best_perm[static_cast<std::size_t>(j)], j);
        out.row_errors[j] = err;
        out.eps[j] = std::abs(s) < 1e-300 ? kInf : 1.0 / s;
        if (truth_densities && (*truth_densities)[static_cast<std::size_t>(j)] &&
            std::abs(s) >= 1e-12) {
            const auto& fd =
                fitted.densities[static_cast<std::size_t>(best_perm[static_cast<std::size_t>(j)])];
            // |eps| f_hat(eps x) is the density of (projection)/eps
            out.tv_errors[j] =
                tv_distance(fd.scaled(s, 0.0), *(*truth_densities)[static_cast<std::size_t>(j)]);
        }
    }
    return out;
}

}  // namespace lcica
