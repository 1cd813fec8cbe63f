#include "lcica/emplik.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

namespace lcica {

IndexSubset IndexSubset::of(std::vector<int> idx, Eigen::Index n, Eigen::Index d) {
    std::sort(idx.begin(), idx.end());
    if (static_cast<Eigen::Index>(idx.size()) != d + 1)
        throw Error("index subset must have d+1 elements");
    if (std::adjacent_find(idx.begin(), idx.end()) != idx.end())
        throw Error("index subset must be distinct");
    if (idx.front() < 0 || idx.back() >= n)
        throw Error("index subset out of range");
    return IndexSubset{std::move(idx)};
}

UnmixingMatrix degenerate_unmixer(const Dataset& data, const IndexSubset& j) {
    const Eigen::Index d = data.dim();
    if (static_cast<Eigen::Index>(j.indices.size()) != d + 1)
        throw Error("index subset must have d+1 elements");

    // columns of X_J are the selected observations
    Matrix xj(d, d + 1);
    for (Eigen::Index c = 0; c <= d; ++c)
        xj.col(c) = data.x.row(j.indices[static_cast<std::size_t>(c)]).transpose();

    UnmixingMatrix w(d, d);
    for (Eigen::Index drop = 0; drop < d; ++drop) {
        Matrix xm(d, d);
        Eigen::Index c = 0;
        for (Eigen::Index k = 0; k <= d; ++k)
            if (k != drop) xm.col(c++) = xj.col(k);
        Eigen::FullPivLU<Matrix> lu(xm.transpose());
        if (!lu.isInvertible())
            throw NotGeneralPosition("selected points are not in general position");
        w.row(drop) = lu.solve(Vector::Ones(d)).transpose();
    }
    return w;
}

double log_empirical_likelihood(const UnmixingMatrix& w, const Dataset& data) {
    const Eigen::Index n = data.n();
    const Eigen::Index d = data.dim();
    Matrix proj = data.x * w.transpose();

    double total = 0.0;
    std::vector<double> col(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = proj(i, j);
        std::sort(col.begin(), col.end());
        total -= static_cast<double>(n) * std::log(static_cast<double>(n));
        std::size_t run = 1;
        for (std::size_t i = 1; i <= col.size(); ++i) {
            if (i < col.size() &&
                col[i] - col[i - 1] <= 1e-9 * (1.0 + std::abs(col[i]))) {
                ++run;
            } else {
                if (run > 1)
                    total += static_cast<double>(run) * std::log(static_cast<double>(run));
                run = 1;
            }
        }
    }
    return total;
}

}  // namespace lcica
