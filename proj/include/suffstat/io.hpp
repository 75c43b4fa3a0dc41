#pragma once

#include <ostream>
#include <string>
#include <utility>

#include <json.hpp>

#include "suffstat/search.hpp"
#include "suffstat/sufficiency.hpp"

namespace suffstat {

using Json = nlohmann::json;

// Model file: either
//   {"space": [labels], "mu0": [weights], "dim": d, "box": [[lo,hi]...],
//    "simplex": bool, "densities": {label: expression}}
// or {"builtin": name, "params": {...}} with name in
//   {"coin_block", "two_coin_dependent", "categorical_simplex"}.
ParametrizedModel model_from_json(const Json& doc);
ParametrizedModel load_model_file(const std::string& path);

// Statistic file: {"target": [labels], "map": {source-label: target-label}}.
Statistic statistic_from_json(const Json& doc, const ParametrizedModel& model);
Statistic load_statistic_file(const std::string& path, const ParametrizedModel& model);

// Builtin statistic names: identity | sum | heads | block | constant.
// Anything containing '/' or ending in ".json" is treated as a file path.
std::pair<Statistic, std::string> resolve_statistic(const std::string& name_or_path,
                                                    const ParametrizedModel& model);

// Factorization files: flat {label: expression} objects for s (target) and
// t (source).
Factorization factorization_from_files(const std::string& s_path,
                                       const std::string& t_path,
                                       const ParametrizedModel& model,
                                       const Statistic& kappa);

Json delta_report_json(const DeltaReport& report);
Json condition_ii_json(const ConditionIIReport& report);
Json condition_iv_json(const ConditionIVReport& report);
Json monotonicity_json(const MonotonicityReport& report);
Json coarsening_json(const CoarseningResult& result, const Statistic& kappa);

// Curve rows: xi_1..xi_d, lambda_min, g_det, gp_det, ratio.
void write_delta_csv(std::ostream& out, const DeltaReport& report);

Json load_json_file(const std::string& path);

}  // namespace suffstat
