#pragma once

#include <vector>

#include "lcica/common.hpp"

namespace lcica {

// Sorted distinct values with positive weights summing to one. Duplicate
// raw values are collapsed into weights before fitting.
struct WeightedSample {
    Vector values;
    Vector weights;

    static WeightedSample from_points(const Vector& raw);
    static WeightedSample from_points(const Vector& raw, const Vector& raw_weights);

    void validate() const;  // throws DegenerateSample on invariant violation
};

// One linear piece of the log-density: log f(x) = slope * x - intercept.
struct Segment {
    double slope;
    double intercept;
};

// Piecewise log-linear density exp(phi) with phi concave on [t_0, t_m] and
// zero outside. Evaluation, integration and sampling use the merged pieces
// (strictly decreasing slopes); knots/phi are the canonical representation.
class LogConcaveDensity {
public:
    LogConcaveDensity(Vector knots, Vector phi);

    const Vector& knots() const { return knots_; }
    const Vector& phi() const { return phi_; }

    double support_lo() const { return knots_[0]; }
    double support_hi() const { return knots_[knots_.size() - 1]; }

    // min over segments of (b_k x - beta_k) inside the closed support, -inf outside
    double log_pdf(double x) const;
    double pdf(double x) const;

    // the same min taken over all of R (the linear extension used by the
    // profiled objective g)
    double log_pdf_extended(double x) const;

    double integrate(double a, double b) const;
    double cdf(double x) const { return integrate(support_lo(), x); }
    double quantile(double p) const;
    double first_moment() const;

    Vector sample(Rng& rng, Eigen::Index n) const;

    // merged pieces, slopes strictly decreasing; piece k lives on
    // [piece_knots()[k], piece_knots()[k+1]]
    const std::vector<Segment>& segments() const { return segments_; }
    const std::vector<double>& piece_knots() const { return piece_knots_; }

    // density of a*X + b for a != 0
    LogConcaveDensity scaled(double a, double b) const;

private:
    // locate the merged piece whose interval contains x (clamped)
    int piece_index(double x) const;

    Vector knots_;
    Vector phi_;
    std::vector<Segment> segments_;
    std::vector<double> piece_knots_;   // size segments_.size() + 1
    std::vector<double> piece_phi_;     // phi at piece boundaries
    std::vector<double> cum_mass_;      // mass up to each piece boundary
};

// Maximizer of sum_i w_i phi(v_i) - int exp(phi) + 1 over concave phi.
// Active-set ascent: candidate knots at all data values, Newton steps on the
// free knot values, exact piecewise-exponential integrals. The result is
// normalized and supported exactly on [v_(1), v_(m)].
LogConcaveDensity fit_log_concave(const WeightedSample& sample, double tol = 1e-8);

// Objective the fit maximizes; exposed for tests and diagnostics.
double lcmle_objective(const WeightedSample& sample, const LogConcaveDensity& f);

namespace detail {
// Exponential moments J_k(delta) = int_0^1 u^k exp(delta u) du, evaluated
// stably near delta = 0.
double j0(double delta);
double j1(double delta);
double j2(double delta);
}  // namespace detail

}  // namespace lcica
