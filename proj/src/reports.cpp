#include <cmath>
#include <cstdio>
#include <string>

#include "moralstat/app.hpp"
#include "moralstat/error.hpp"
#include "moralstat/mvstats.hpp"

namespace moralstat::app {

double sig9(double v) {
  if (!std::isfinite(v) || v == 0.0) return v == 0.0 ? 0.0 : v;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::stod(buf);
}

Json sig9_array(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(sig9(v[i]));
  return a;
}

Json sig9_matrix(const Eigen::MatrixXd& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(sig9_array(m.row(i).transpose()));
  return a;
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

std::vector<std::string> moral_variables() {
  return {data::kMoralVariables.begin(), data::kMoralVariables.end()};
}

data::MoralDataset mainland(const data::MoralDataset& ds) {
  return ds.filter([](const data::DepartementRecord& r) { return r.region != data::Region::Other; });
}

std::vector<std::string> region_labels(const data::MoralDataset& ds) {
  std::vector<std::string> out;
  for (auto r : ds.regions()) out.emplace_back(1, data::region_letter(r));
  return out;
}

mv::PcaResult moral_pca(const data::MoralDataset& ds) {
  const auto vars = moral_variables();
  return mv::pca(ds.columns(vars), true, vars);
}

mv::VarimaxResult moral_varimax(const data::MoralDataset& ds) {
  return mv::varimax(mv::component_loadings(moral_pca(ds), 3), true);
}

mv::CdaResult moral_cda(const data::MoralDataset& ds) {
  const auto land = mainland(ds);
  const auto vars = moral_variables();
  const auto groups = region_labels(land);
  return mv::canonical_discriminant(land.columns(vars), groups, land.variable_index("Literacy"));
}

std::vector<int> biplot_outliers(const data::MoralDataset& ds, std::size_t count) {
  const auto bp = mv::biplot_layout(moral_pca(ds));
  const auto regions = ds.regions();
  const auto rows = mv::group_outliers(bp.points, regions, count);
  std::vector<int> codes;
  for (auto i : rows) codes.push_back(ds[i].code);
  return codes;
}

namespace {

Json header(std::string_view kind) {
  Json j;
  j["schema"] = kSchema;
  j["kind"] = kind;
  return j;
}

Json names_json(const std::vector<std::string>& v) {
  Json a = Json::array();
  for (const auto& s : v) a.push_back(s);
  return a;
}

Json r2_json(const mv::MlmFit& fit) {
  Json j;
  const auto r2 = fit.r_squared();
  for (std::size_t k = 0; k < fit.responses.size(); ++k) j[fit.responses[k]] = sig9(r2[static_cast<Eigen::Index>(k)]);
  return j;
}

}  // namespace

Json manova_report(const data::MoralDataset& ds, double alpha) {
  Json j = header("manova");
  const auto fit = mv::fit_crime_model(ds);
  const auto rows = mv::manova_type2(fit);
  const auto he = mv::he_geometry(fit, rows, {0, 1}, alpha);
  j["responses"] = names_json(fit.responses);
  j["n"] = fit.Y.rows();
  j["df_error"] = fit.df_error;
  j["alpha"] = alpha;
  Json table = Json::array();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    Json row;
    row["term"] = r.term;
    row["df"] = r.df;
    row["roy_stat"] = sig9(r.roy_stat);
    row["approx_f"] = sig9(r.approx_f);
    row["df_num"] = r.df_num;
    row["df_den"] = r.df_den;
    row["p_value"] = sig9(r.p_value);
    row["lambda_alpha"] = sig9(he.lambda_alpha[k]);
    row["protrusion"] = sig9(mv::protrusion_ratio(he.h_ellipses[k].second, he.e_ellipse));
    table.push_back(std::move(row));
  }
  j["rows"] = std::move(table);
  j["r_squared"] = r2_json(fit);
  // The per-response R-squared quoted alongside the table matches the fit without Corsica.
  const auto land = mainland(ds);
  Json alt;
  alt["n"] = land.size();
  alt["r_squared"] = r2_json(mv::fit_crime_model(land));
  j["r_squared_mainland"] = std::move(alt);
  return j;
}

Json pca_report(const data::MoralDataset& ds, const std::vector<std::string>& variables) {
  Json j = header("pca");
  const auto vars = variables.empty() ? moral_variables() : variables;
  const auto p = mv::pca(ds.columns(vars), true, vars);
  j["variables"] = names_json(vars);
  j["standardized"] = p.standardized;
  j["n"] = ds.size();
  j["eigenvalues"] = sig9_array(p.eigenvalues);
  j["pct_variance"] = sig9_array(p.pct_variance);
  j["loadings"] = sig9_matrix(p.loadings);
  return j;
}

Json cda_report(const data::MoralDataset& ds) {
  Json j = header("cda");
  const auto c = moral_cda(ds);
  j["variables"] = names_json(moral_variables());
  j["groups"] = names_json(c.group_labels);
  Json gn = Json::array();
  for (int n : c.group_n) gn.push_back(n);
  j["group_n"] = std::move(gn);
  j["eigenvalues"] = sig9_array(c.eigenvalues);
  j["pct"] = sig9_array(c.pct);
  j["pct_first_two"] = sig9(c.pct.size() >= 2 ? c.pct[0] + c.pct[1] : c.pct.sum());
  j["structure"] = sig9_matrix(c.structure);
  j["group_means"] = sig9_matrix(c.group_means);
  return j;
}

Json varimax_report(const data::MoralDataset& ds) {
  Json j = header("varimax");
  const auto v = moral_varimax(ds);
  j["variables"] = names_json(moral_variables());
  j["normalize"] = true;
  j["factors"] = 3;
  j["loadings"] = sig9_matrix(v.loadings);
  j["rotation"] = sig9_matrix(v.rotation);
  j["sweeps"] = v.sweeps;
  j["criterion"] = sig9(v.criterion);
  return j;
}

Json regression_report(const data::MoralDataset& ds) {
  Json j = header("regression");
  Eigen::MatrixXd X(static_cast<Eigen::Index>(ds.size()), 2);
  X.col(0) = ds.column("Literacy");
  X.col(1) = ds.column("Wealth");
  const auto lin = mv::simple_regression(ds.column("Crime_prop"), X, {"Literacy", "Wealth"});
  Json l;
  l["response"] = "Crime_prop";
  l["predictors"] = names_json({"Literacy", "Wealth"});
  l["coefficients"] = sig9_array(lin.coefficients);
  l["r_squared"] = sig9(lin.r_squared);
  j["linear"] = std::move(l);
  const auto surf = mv::response_surface(ds.column("Crime_pers"), ds.column("Literacy"), ds.column("Wealth"));
  Json s;
  s["response"] = "Crime_pers";
  s["terms"] = names_json({"(Intercept)", "Literacy", "Wealth", "Literacy^2", "Wealth^2", "Literacy:Wealth"});
  s["coefficients"] = sig9_array(surf.coefficients);
  s["r_squared"] = sig9(surf.r_squared);
  Json outside = Json::array();
  for (auto i : surf.outside) outside.push_back(ds[i].code);
  s["outside"] = std::move(outside);
  j["response_surface"] = std::move(s);
  return j;
}

Json stats_report(std::string_view kind, const data::MoralDataset& ds, const std::vector<std::string>& variables) {
  if (kind == "pca") return pca_report(ds, variables);
  if (!variables.empty()) throw UsageError("--variables applies to pca only");
  if (kind == "manova") return manova_report(ds);
  if (kind == "cda") return cda_report(ds);
  if (kind == "varimax") return varimax_report(ds);
  if (kind == "regression") return regression_report(ds);
  throw UsageError("unknown stats kind '" + std::string(kind) + "'");
}

}  // namespace moralstat::app
