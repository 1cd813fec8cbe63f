#include "lcica/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace lcica {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

Vector json_to_vector(const nlohmann::json& j) {
    Vector v(j.size());
    Eigen::Index i = 0;
    for (const auto& x : j) v[i++] = x.get<double>();
    return v;
}

nlohmann::json vector_to_json(const Vector& v) {
    nlohmann::json j = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
    return j;
}

Matrix json_to_matrix(const nlohmann::json& j) {
    Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (static_cast<Eigen::Index>(j[r].size()) != cols)
            throw IoError("ragged matrix in JSON");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json j = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        j.push_back(row);
    }
    return j;
}

}  // namespace

Dataset read_dataset(const std::string& path, bool header) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (header && lineno == 1) continue;
        if (trim(line).empty()) continue;

        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(ss, cell, ',')) {
            ++col;
            std::string tok = trim(cell);
            const char* begin = tok.c_str();
            char* end = nullptr;
            double val = std::strtod(begin, &end);
            if (tok.empty() || end != begin + tok.size())
                throw ParseError("cannot parse '" + tok + "'", lineno, col);
            if (!std::isfinite(val))
                throw NonFinite("non-finite value at row " + std::to_string(lineno) +
                                ", column " + std::to_string(col));
            row.push_back(val);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError("row has " + std::to_string(row.size()) +
                                 " cells, expected " + std::to_string(rows.front().size()),
                             lineno, 1);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("no data rows", 0, 0);

    Matrix m(static_cast<Eigen::Index>(rows.size()),
             static_cast<Eigen::Index>(rows.front().size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    return Dataset(std::move(m));
}

void write_dataset(const std::string& path, const Dataset& data,
                   const std::vector<std::string>& column_names) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    if (!column_names.empty()) {
        if (static_cast<Eigen::Index>(column_names.size()) != data.dim())
            throw IoError("header size mismatch");
        for (std::size_t c = 0; c < column_names.size(); ++c)
            out << (c ? "," : "") << column_names[c];
        out << "\n";
    }
    for (Eigen::Index r = 0; r < data.n(); ++r) {
        for (Eigen::Index c = 0; c < data.dim(); ++c)
            out << (c ? "," : "") << format_double(data.x(r, c));
        out << "\n";
    }
    if (!out) throw IoError("write failed for " + path);
}

nlohmann::json density_to_json(const LogConcaveDensity& f) {
    return {{"knots", vector_to_json(f.knots())}, {"phi", vector_to_json(f.phi())}};
}

LogConcaveDensity density_from_json(const nlohmann::json& j) {
    return LogConcaveDensity(json_to_vector(j.at("knots")), json_to_vector(j.at("phi")));
}

namespace {

nlohmann::json config_to_json(const FitConfig& c) {
    return {{"restarts", c.restarts}, {"eta", c.eta},
            {"alpha", c.alpha},       {"gamma", c.gamma},
            {"max_outer_iters", c.max_outer_iters}, {"lcmle_tol", c.lcmle_tol}};
}

FitConfig config_from_json(const nlohmann::json& j) {
    FitConfig c;
    c.restarts = j.at("restarts").get<int>();
    c.eta = j.at("eta").get<double>();
    c.alpha = j.at("alpha").get<double>();
    c.gamma = j.at("gamma").get<double>();
    c.max_outer_iters = j.at("max_outer_iters").get<int>();
    c.lcmle_tol = j.at("lcmle_tol").get<double>();
    return c;
}

}  // namespace

nlohmann::json model_to_json(const FitResult& result, const FitConfig& config) {
    nlohmann::json densities = nlohmann::json::array();
    for (const auto& f : result.best.densities) densities.push_back(density_to_json(f));

    nlohmann::json per_restart = nlohmann::json::array();
    for (const auto& r : result.per_restart)
        per_restart.push_back({{"loglik", r.loglik},
                               {"iterations", r.iterations},
                               {"trace", r.trace},
                               {"converged", r.converged}});

    return {{"whitener",
             {{"mean", vector_to_json(result.whitener.mean)},
              {"sigma", matrix_to_json(result.whitener.sigma)},
              {"inv_sqrt", matrix_to_json(result.whitener.inv_sqrt)}}},
            {"O", matrix_to_json(result.best_o)},
            {"W", matrix_to_json(result.best.w)},
            {"densities", densities},
            {"loglik", result.best.loglik},
            {"config", config_to_json(config)},
            {"seed", config.seed},
            {"best_restart", result.best_restart},
            {"per_restart", per_restart}};
}

LoadedModel model_from_json(const nlohmann::json& j) {
    LoadedModel out;
    out.whitener.mean = json_to_vector(j.at("whitener").at("mean"));
    out.whitener.sigma = json_to_matrix(j.at("whitener").at("sigma"));
    out.whitener.inv_sqrt = json_to_matrix(j.at("whitener").at("inv_sqrt"));
    Eigen::SelfAdjointEigenSolver<Matrix> eig(out.whitener.sigma);
    out.whitener.sqrt = eig.operatorSqrt();
    out.whitener.log_det_sigma = eig.eigenvalues().array().log().sum();

    out.o = json_to_matrix(j.at("O"));
    out.model.w = json_to_matrix(j.at("W"));
    out.model.loglik = j.at("loglik").get<double>();
    for (const auto& dj : j.at("densities"))
        out.model.densities.push_back(density_from_json(dj));
    out.config = config_from_json(j.at("config"));
    out.config.seed = j.at("seed").get<std::uint64_t>();
    return out;
}

void write_rep_records_csv(const std::string& path, SourceKind kind, int n,
                           const std::vector<RepRecord>& records) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "kind,n,rep,seed,amari_lcica,amari_baseline,tv_1,tv_2,loglik,iters,converged\n";
    for (const auto& r : records) {
        out << to_string(kind) << ',' << n << ',' << r.rep << ',' << r.seed << ','
            << format_double(r.amari_lcica) << ',' << format_double(r.amari_baseline);
        for (std::size_t c = 0; c < 2; ++c)
            out << ',' << (c < r.tv.size() ? format_double(r.tv[c]) : "nan");
        out << ',' << format_double(r.loglik) << ',' << r.iters << ','
            << (r.converged ? 1 : 0) << "\n";
    }
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace lcica
