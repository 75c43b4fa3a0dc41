#include "suffstat/io.hpp"

#include <charconv>
#include <fstream>

namespace suffstat {

namespace {

std::string csv_number(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

[[noreturn]] void bad_field(const std::string& what) {
  throw ConfigError("model/statistic file: " + what);
}

}  // namespace

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file '" + path + "'");
  Json doc;
  try {
    in >> doc;
  } catch (const Json::exception& e) {
    throw ConfigError("invalid JSON in '" + path + "': " + e.what());
  }
  return doc;
}

ParametrizedModel model_from_json(const Json& doc) {
  if (!doc.is_object()) bad_field("document must be a JSON object");

  if (doc.contains("builtin")) {
    const std::string name = doc.at("builtin").get<std::string>();
    const Json params = doc.value("params", Json::object());
    if (name == "coin_block")
      return make_coin_block(params.value("m", 1), params.value("n", 1));
    if (name == "two_coin_dependent") return make_two_coin_dependent();
    if (name == "categorical_simplex")
      return make_categorical_simplex(params.value("k", 3));
    bad_field("unknown builtin model '" + name + "'");
  }

  for (const char* key : {"space", "mu0", "dim", "box", "densities"})
    if (!doc.contains(key)) bad_field(std::string("missing field '") + key + "'");

  std::vector<std::string> labels = doc.at("space").get<std::vector<std::string>>();
  auto space = make_space(std::move(labels));
  std::vector<double> mu0 = doc.at("mu0").get<std::vector<double>>();
  if (mu0.size() != space->size()) bad_field("mu0 length does not match space");
  FiniteMeasure base(space, std::move(mu0));

  const std::size_t dim = doc.at("dim").get<std::size_t>();
  std::vector<Interval> box;
  for (const auto& iv : doc.at("box")) {
    if (!iv.is_array() || iv.size() != 2) bad_field("box entries must be [lo, hi]");
    box.push_back(Interval{iv[0].get<double>(), iv[1].get<double>()});
  }
  const bool simplex = doc.value("simplex", false);

  const Json& densities = doc.at("densities");
  if (!densities.is_object()) bad_field("densities must map labels to expressions");
  std::vector<Expr> exprs(space->size());
  std::vector<bool> have(space->size(), false);
  for (const auto& [label, text] : densities.items()) {
    const std::size_t w = space->index_of(label);
    exprs[w] = Expr::parse(text.get<std::string>(), dim);
    have[w] = true;
  }
  for (std::size_t w = 0; w < space->size(); ++w)
    if (!have[w]) bad_field("missing density for outcome '" + space->label(w) + "'");

  return make_expr_model(space, std::move(base), dim, std::move(box), simplex,
                         std::move(exprs), doc.value("name", std::string("model")));
}

ParametrizedModel load_model_file(const std::string& path) {
  return model_from_json(load_json_file(path));
}

Statistic statistic_from_json(const Json& doc, const ParametrizedModel& model) {
  if (!doc.is_object() || !doc.contains("target") || !doc.contains("map"))
    bad_field("statistic file needs 'target' and 'map'");
  auto target = make_space(doc.at("target").get<std::vector<std::string>>());
  const Json& map = doc.at("map");
  if (!map.is_object()) bad_field("statistic 'map' must be an object");
  std::vector<std::string> images(model.space().size());
  std::vector<bool> have(model.space().size(), false);
  for (const auto& [src, tgt] : map.items()) {
    const std::size_t w = model.space().index_of(src);
    images[w] = tgt.get<std::string>();
    have[w] = true;
  }
  for (std::size_t w = 0; w < model.space().size(); ++w)
    if (!have[w]) bad_field("statistic map misses outcome '" + model.space().label(w) + "'");
  return Statistic::from_labels(model.space_ptr(), std::move(target), images);
}

Statistic load_statistic_file(const std::string& path, const ParametrizedModel& model) {
  return statistic_from_json(load_json_file(path), model);
}

std::pair<Statistic, std::string> resolve_statistic(const std::string& name_or_path,
                                                    const ParametrizedModel& model) {
  const bool looks_like_path =
      name_or_path.find('/') != std::string::npos ||
      (name_or_path.size() > 5 &&
       name_or_path.substr(name_or_path.size() - 5) == ".json");
  if (!looks_like_path) {
    if (name_or_path == "identity")
      return {identity_statistic(model.space_ptr()), "identity"};
    if (name_or_path == "sum" || name_or_path == "heads")
      return {bit_sum_statistic(model.space_ptr()), name_or_path};
    if (name_or_path == "constant")
      return {constant_statistic(model.space_ptr()), "constant"};
    if (name_or_path == "block") {
      auto tag = model.coin_block_tag();
      if (!tag)
        throw ConfigError("'block' statistic needs a coin_block model");
      return {block_statistic(tag->m, tag->n), "block"};
    }
  }
  return {load_statistic_file(name_or_path, model), name_or_path};
}

Factorization factorization_from_files(const std::string& s_path,
                                       const std::string& t_path,
                                       const ParametrizedModel& model,
                                       const Statistic& kappa) {
  const Json s_doc = load_json_file(s_path);
  const Json t_doc = load_json_file(t_path);
  if (!s_doc.is_object() || !t_doc.is_object())
    bad_field("factorization files must be {label: expression} objects");

  auto parse_table = [&](const Json& doc, const SampleSpace& space) {
    auto exprs = std::make_shared<std::vector<Expr>>(space.size());
    std::vector<bool> have(space.size(), false);
    for (const auto& [label, text] : doc.items()) {
      const std::size_t w = space.index_of(label);
      (*exprs)[w] = Expr::parse(text.get<std::string>(), model.dim());
      have[w] = true;
    }
    for (std::size_t w = 0; w < space.size(); ++w)
      if (!have[w]) bad_field("factorization misses outcome '" + space.label(w) + "'");
    return exprs;
  };

  auto s_tab = parse_table(s_doc, kappa.target());
  auto t_tab = parse_table(t_doc, model.space());
  Factorization f;
  f.s = [s_tab](std::size_t w, std::span<const double> xi) {
    return (*s_tab)[w].eval(xi);
  };
  f.t = [t_tab](std::size_t w, std::span<const double> xi) {
    return (*t_tab)[w].eval(xi);
  };
  f.s_desc = s_path;
  f.t_desc = t_path;
  return f;
}

Json delta_report_json(const DeltaReport& report) {
  Json j;
  j["convention"] = convention_name(report.convention);
  j["eps"] = report.eps;
  j["base_grid_points"] = report.base_grid_size;
  j["refine_rounds"] = report.refine_rounds;
  j["curve_points"] = report.points.size();
  j["delta_sq_hat"] = report.delta_sq_hat;
  j["delta_hat"] = report.delta_hat;
  j["argmin"] = report.argmin;
  j["boundary_infimum"] = report.boundary_infimum;
  return j;
}

Json condition_ii_json(const ConditionIIReport& report) {
  Json j;
  j["convention"] = convention_name(report.convention);
  j["delta"] = report.delta;
  j["seed"] = report.seed;
  j["random_directions"] = report.random_directions;
  j["min_margin"] = report.min_margin;
  j["min_margin_rel"] = report.min_margin_rel;
  j["worst_point"] = report.worst_point;
  j["holds"] = report.holds;
  return j;
}

Json condition_iv_json(const ConditionIVReport& report) {
  Json j;
  j["convention"] = convention_name(report.convention);
  j["delta"] = report.delta;
  j["worst_reconstruction_rel"] = report.worst_reconstruction_rel;
  j["lipschitz_estimate"] = report.lipschitz_estimate;
  j["lipschitz_bound"] = report.lipschitz_bound;
  j["lipschitz_ok"] = report.lipschitz_ok;
  j["chain_residual_max"] = report.chain_residual_max;
  j["chain_ok"] = report.chain_ok;
  j["holds"] = report.holds;
  return j;
}

Json monotonicity_json(const MonotonicityReport& report) {
  Json j;
  j["convention"] = convention_name(report.convention);
  j["points_checked"] = report.points_checked;
  j["violations"] = report.violations;
  j["worst_excess"] = report.worst_excess;
  if (!report.worst_point.empty()) j["worst_point"] = report.worst_point;
  j["holds"] = report.holds;
  return j;
}

Json coarsening_json(const CoarseningResult& result, const Statistic& kappa) {
  Json j;
  Json map = Json::object();
  for (std::size_t w = 0; w < kappa.source().size(); ++w)
    map[kappa.source().label(w)] = kappa.target().label(kappa.apply(w));
  j["statistic_map"] = std::move(map);
  j["target_labels"] = kappa.target().labels();
  j["delta"] = delta_report_json(result.report);
  Json trace = Json::array();
  for (const auto& step : result.trace) {
    Json s;
    s["merged"] = {step.label_a, step.label_b};
    s["delta_hat_after"] = step.delta_hat_after;
    trace.push_back(std::move(s));
  }
  j["trace"] = std::move(trace);
  return j;
}

void write_delta_csv(std::ostream& out, const DeltaReport& report) {
  const std::size_t d = report.points.empty() ? 1 : report.points.front().size();
  for (std::size_t a = 0; a < d; ++a) out << "xi_" << (a + 1) << ",";
  out << "lambda_min,g_det,gp_det,ratio\n";
  for (std::size_t i = 0; i < report.points.size(); ++i) {
    for (std::size_t a = 0; a < d; ++a) out << csv_number(report.points[i][a]) << ",";
    const double ratio =
        report.g_det[i] != 0.0 ? report.gp_det[i] / report.g_det[i] : 0.0;
    out << csv_number(report.lambda_min[i]) << "," << csv_number(report.g_det[i]) << ","
        << csv_number(report.gp_det[i]) << "," << csv_number(ratio) << "\n";
  }
}

}  // namespace suffstat
