#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "lcica/common.hpp"
#include "lcica/ica.hpp"
#include "lcica/sim.hpp"

namespace lcica {

// Rectangular numeric CSV, one observation per row. NaN/Inf are rejected;
// malformed cells raise ParseError with 1-based row/column.
Dataset read_dataset(const std::string& path, bool header = false);

void write_dataset(const std::string& path, const Dataset& data,
                   const std::vector<std::string>& column_names = {});

nlohmann::json density_to_json(const LogConcaveDensity& f);
LogConcaveDensity density_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const FitResult& result, const FitConfig& config);

struct LoadedModel {
    IcaModel model;
    Matrix o;
    WhiteningTransform whitener;
    FitConfig config;
};

LoadedModel model_from_json(const nlohmann::json& j);

struct ExperimentBlock {
    SourceKind kind;
    int n;
    std::vector<RepRecord> records;
};

// one row per rep: kind,n,rep,seed,amari_lcica,amari_baseline,tv_1,tv_2,loglik,iters,converged
void write_rep_records_csv(const std::string& path,
                           const std::vector<ExperimentBlock>& blocks);
void write_rep_records_csv(const std::string& path, SourceKind kind, int n,
                           const std::vector<RepRecord>& records);

// 17 significant digits; round-trips the exact double
std::string format_double(double x);

}  // namespace lcica
