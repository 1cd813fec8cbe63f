#pragma once

#include <cstdint>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace lcica {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// d x d non-singular matrix with rows w_j^T projecting observations onto
// estimated sources.
using UnmixingMatrix = Eigen::MatrixXd;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fewer than 2 distinct values in a univariate sample.
struct DegenerateSample : Error { using Error::Error; };
// Sample covariance numerically singular (data concentrated on a hyperplane).
struct RankDeficient : Error { using Error::Error; };
// Dataset fails the fit preconditions (too few rows, rank deficiency).
struct DegenerateData : Error { using Error::Error; };
// The d+1 selected points are not in general position.
struct NotGeneralPosition : Error { using Error::Error; };
// Backtracking line search hit the step floor without an acceptable step.
struct StallAtStationary : Error { using Error::Error; };
// Second argument of the Amari metric is not invertible.
struct SingularB : Error { using Error::Error; };
struct NonFinite : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t row, std::size_t col)
        : Error(msg), row(row), col(col) {}
    std::size_t row;
    std::size_t col;
};

// SplitMix64 finalizer; decorrelates nearby seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Seed for an independent stream (restart r, simulation rep, ...).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(base ^ stream);
}

// Deterministic random source. All transforms are written out explicitly so
// that a seed produces identical draws on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform on [0, 1)
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // standard normal via Box-Muller (cosine branch only, no cached spare)
    double normal() {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Exp(1)
    double exponential() { return -std::log(1.0 - uniform()); }

    int bernoulli(double p) { return uniform() < p ? 1 : 0; }

private:
    std::mt19937_64 gen_;
};

// n x d observations, one row per observation.
struct Dataset {
    Matrix x;

    Dataset() = default;
    explicit Dataset(Matrix m) : x(std::move(m)) {
        if (!x.allFinite())
            throw NonFinite("dataset contains non-finite values");
    }

    Eigen::Index n() const { return x.rows(); }
    Eigen::Index dim() const { return x.cols(); }
};

}  // namespace lcica
