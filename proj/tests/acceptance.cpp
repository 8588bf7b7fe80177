// Prints one PASS/FAIL line per primary acceptance criterion; exits 1 on any FAIL.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "moralstat/app.hpp"
#include "moralstat/mvstats.hpp"
#include "moralstat/numcore.hpp"

using namespace moralstat;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream detail;
  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [" << what << "]";
    }
  }
};

const app::Inputs& inputs() {
  static const app::Inputs in = app::load_inputs(app::default_config());
  return in;
}

const data::MoralDataset& fixture() {
  static const auto ds = inputs().dataset.sorted_by_code();
  return ds;
}

Eigen::MatrixXd moral_matrix(const data::MoralDataset& ds) {
  return ds.columns(std::span<const std::string_view>(data::kMoralVariables));
}

double sampled_protrusion(const num::EllipseGeom& h, const num::EllipseGeom& e) {
  double best = 0;
  for (int k = 0; k < 20000; ++k) {
    const double t = M_PI * k / 20000;
    const Eigen::Vector2d u(std::cos(t), std::sin(t));
    best = std::max(best, h.extent(u) / e.extent(u));
  }
  return best;
}

Eigen::MatrixXd normal_sample(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(n, 2);
  for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, 0) = z(rng), m(i, 1) = z(rng);
  return m;
}

double wls_at(const std::vector<double>& x, const std::vector<double>& y, double x0, std::size_t q) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return std::abs(x[a] - x0) < std::abs(x[b] - x0); });
  idx.resize(q);
  double dmax = 0;
  for (auto i : idx) dmax = std::max(dmax, std::abs(x[i] - x0));
  Eigen::MatrixXd X(q, 2);
  Eigen::VectorXd Y(q), W(q);
  for (std::size_t k = 0; k < q; ++k) {
    const double u = std::abs(x[idx[k]] - x0) / dmax;
    W(k) = std::pow(1 - u * u * u, 3);
    X.row(static_cast<Eigen::Index>(k)) << 1, x[idx[k]];
    Y(static_cast<Eigen::Index>(k)) = y[idx[k]];
  }
  const Eigen::MatrixXd XtW = X.transpose() * W.asDiagonal();
  const Eigen::Vector2d b = (XtW * X).ldlt().solve(XtW * Y);
  return b(0) + b(1) * x0;
}

// ---------------------------------------------------------------------------

void manova(Check& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = mv::manova_type2(mv::fit_crime_model(fixture()));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  struct Golden {
    const char* term;
    double stat, f;
    int dn, dd;
    double p;
  };
  const Golden golden[] = {{"Region", 0.6859, 10.2878, 5, 75, 1.554e-07}, {"Suicides", 0.1437, 5.3170, 2, 74, 0.006957},
                           {"Literacy", 0.0361, 1.3354, 2, 74, 0.269328}, {"Donations", 0.0336, 1.2444, 2, 74, 0.294059},
                           {"Infants", 0.0091, 0.3385, 2, 74, 0.713923},  {"Wealth", 0.1479, 5.4719, 2, 74, 0.006077}};
  c.expect(rows.size() == 6, "six rows");
  for (std::size_t i = 0; i < std::min<std::size_t>(rows.size(), 6); ++i) {
    const auto& r = rows[i];
    const auto& g = golden[i];
    c.expect(r.term == g.term, std::string("term ") + g.term);
    c.expect(std::abs(r.roy_stat - g.stat) <= 1e-3, std::string("Roy ") + g.term);
    c.expect(std::abs(r.approx_f - g.f) <= 0.01, std::string("F ") + g.term);
    c.expect(r.df_num == g.dn && r.df_den == g.dd, std::string("df ") + g.term);
    c.expect(std::abs(r.p_value - g.p) <= 0.05 * g.p, std::string("p ") + g.term);
  }
  c.expect(secs < 1.0, "runtime " + std::to_string(secs) + " s");
}

void r_squared(Check& c) {
  const auto land = app::mainland(fixture());
  const Eigen::VectorXd r2 = mv::fit_crime_model(land).r_squared();
  c.expect(std::abs(r2(0) - 0.43) <= 0.01, "Crime_prop " + std::to_string(r2(0)));
  c.expect(std::abs(r2(1) - 0.36) <= 0.01, "Crime_pers " + std::to_string(r2(1)));
  const auto lin = app::regression_report(fixture())["linear"]["r_squared"].get<double>();
  c.expect(std::abs(lin - 0.27) <= 0.01, "Crime_prop ~ Literacy + Wealth " + std::to_string(lin));
  c.detail << " (mainland n=" << land.size() << ")";
}

void biplot(Check& c) {
  const auto p = mv::pca(moral_matrix(fixture()), true);
  c.expect(std::abs(p.pct_variance(0) - 35.4) <= 0.5, "PC1 " + std::to_string(p.pct_variance(0)));
  c.expect(std::abs(p.pct_variance(1) - 20.8) <= 0.5, "PC2 " + std::to_string(p.pct_variance(1)));
}

void cda(Check& c) {
  const auto land = app::mainland(fixture());
  const auto g = app::region_labels(land);
  const auto r = mv::canonical_discriminant(moral_matrix(land), g, 2);
  c.expect(r.pct(0) + r.pct(1) >= 90.0, "first two " + std::to_string(r.pct(0) + r.pct(1)));
  const std::size_t ng = *std::max_element(r.group_of.begin(), r.group_of.end()) + 1;
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ng), r.scores.cols());
  std::vector<int> n(ng, 0);
  for (Eigen::Index i = 0; i < r.scores.rows(); ++i) {
    const auto k = r.group_of[static_cast<std::size_t>(i)];
    means.row(static_cast<Eigen::Index>(k)) += r.scores.row(i);
    ++n[k];
  }
  for (std::size_t k = 0; k < ng; ++k) means.row(static_cast<Eigen::Index>(k)) /= n[k];
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(r.scores.cols(), r.scores.cols());
  for (Eigen::Index i = 0; i < r.scores.rows(); ++i) {
    const Eigen::RowVectorXd d = r.scores.row(i) - means.row(static_cast<Eigen::Index>(r.group_of[static_cast<std::size_t>(i)]));
    W += d.transpose() * d;
  }
  W /= r.df_within;
  const double err = (W - Eigen::MatrixXd::Identity(W.rows(), W.cols())).cwiseAbs().maxCoeff();
  c.expect(err <= 1e-6, "within covariance");
}

void he_protrusion(Check& c) {
  const auto fit = mv::fit_crime_model(fixture());
  const auto rows = mv::manova_type2(fit);
  const auto he = mv::he_geometry(fit, rows);
  std::set<std::string> out;
  for (const auto& [term, h] : he.h_ellipses)
    if (mv::protrusion_ratio(h, he.e_ellipse) > 1.0) out.insert(term);
  c.expect(out == std::set<std::string>{"Region", "Suicides", "Wealth"}, "fixture protrusion set");

  std::mt19937_64 rng(1833);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> effect(0.0, 0.8);
  int mismatches = 0;
  for (int fit_no = 0; fit_no < 50; ++fit_no) {
    const int n = 60;
    Eigen::MatrixXd Y(n, 2);
    Eigen::VectorXd x1(n), x2(n);
    std::vector<std::string> g;
    const double ea = effect(rng), eb = effect(rng), ec = effect(rng);
    for (int i = 0; i < n; ++i) {
      x1(i) = z(rng);
      x2(i) = z(rng);
      g.emplace_back(1, static_cast<char>('a' + i % 3));
      Y(i, 0) = ea * x1(i) + ec * (i % 3) + z(rng);
      Y(i, 1) = eb * x2(i) - 0.5 * ec * (i % 3) + z(rng);
    }
    const auto sfit = mv::mlm_fit(Y, {"y1", "y2"}, {mv::factor_term("G", g), mv::numeric_term("x1", x1), mv::numeric_term("x2", x2)});
    const auto srows = mv::manova_type2(sfit);
    const auto she = mv::he_geometry(sfit, srows);
    for (std::size_t i = 0; i < srows.size(); ++i)
      mismatches += (sampled_protrusion(she.h_ellipses[i].second, she.e_ellipse) > 1.0) != (srows[i].p_value < 0.05);
  }
  c.expect(mismatches == 0, std::to_string(mismatches) + " synthetic mismatches");
}

void varimax(Check& c) {
  const auto r = app::moral_varimax(fixture());
  const double nan = std::nan("");
  const double table[6][3] = {{nan, nan, 0.97}, {0.75, nan, 0.39}, {-0.72, nan, nan},
                              {nan, 0.89, nan}, {0.62, 0.42, nan}, {0.80, nan, nan}};
  std::array<int, 3> perm = {0, 1, 2};
  double best = 1e9;
  do {
    for (int s = 0; s < 8; ++s) {
      const std::array<double, 3> sign = {s & 1 ? -1.0 : 1.0, s & 2 ? -1.0 : 1.0, s & 4 ? -1.0 : 1.0};
      double worst = 0;
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 3; ++j)
          if (!std::isnan(table[i][j])) worst = std::max(worst, std::abs(sign[j] * r.loadings(i, perm[j]) - table[i][j]));
      best = std::min(best, worst);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  c.expect(best <= 0.05, "max deviation " + std::to_string(best));
}

void ellipse(Check& c) {
  c.expect(std::abs(num::chi2_quantile(0.68) - 2.2789) <= 1e-3, "chi2(0.68)");
  const auto pts = normal_sample(10000, 1833);
  const auto e = num::data_ellipse(pts, 0.68);
  std::size_t inside = 0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) inside += e.quadratic_form(pts.row(i).transpose()) <= e.radius * e.radius;
  const double frac = static_cast<double>(inside) / 10000.0;
  c.expect(frac >= 0.66 && frac <= 0.70, "coverage " + std::to_string(frac));

  const auto small = normal_sample(30, 5);
  Eigen::Matrix2d A;
  A << 2.0, 0.7, -0.4, 1.3;
  const Eigen::Vector2d b(3, -1);
  const Eigen::MatrixXd moved = (small * A.transpose()).rowwise() + b.transpose();
  const auto e0 = num::data_ellipse(small, 0.68), e1 = num::data_ellipse(moved, 0.68);
  double err = (e1.center - (A * e0.center + b)).norm();
  err = std::max(err, (e1.shape - A * e0.shape * A.transpose()).norm());
  for (const auto& p : e0.boundary()) {
    const Eigen::Vector2d q = A * Eigen::Vector2d(p.x, p.y) + b;
    err = std::max(err, std::abs(e1.quadratic_form(q) - e1.radius * e1.radius));
  }
  c.expect(err <= 1e-8, "affine equivariance");
}

void loess(Check& c) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 10);
  Eigen::VectorXd x(40);
  for (auto& v : x) v = u(rng);
  double err = 0;
  for (double span : {0.3, 0.5, 2.0 / 3.0, 1.0}) {
    const Eigen::VectorXd k = Eigen::VectorXd::Constant(40, 4.25);
    const Eigen::VectorXd lin = (2.5 * x).array() - 1.0;
    err = std::max(err, (num::loess(x, k, span).fitted - k).cwiseAbs().maxCoeff());
    err = std::max(err, (num::loess(x, lin, span).fitted - lin).cwiseAbs().maxCoeff());
  }
  c.expect(err <= 1e-10, "exactness");
  const std::vector<double> xs = {0.3, 1.1, 1.9, 2.2, 3.7, 4.05, 5.6, 6.1, 7.45, 8.2, 9.0, 9.9};
  const std::vector<double> ys = {2.0, 1.4, 3.1, 2.6, 4.4, 3.9, 5.2, 6.8, 5.1, 7.3, 8.0, 7.2};
  const auto fit = num::loess(Eigen::Map<const Eigen::VectorXd>(xs.data(), 12), Eigen::Map<const Eigen::VectorXd>(ys.data(), 12), 0.5);
  double werr = 0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    werr = std::max(werr, std::abs(fit.fitted(static_cast<Eigen::Index>(i)) - wls_at(xs, ys, xs[i], 6)));
  c.expect(werr <= 1e-8, "WLS oracle");
}

void shingles(Check& c) {
  const auto& ds = fixture();
  auto vec = [&](const char* v) {
    const Eigen::VectorXd col = ds.column(v);
    return std::vector<double>(col.data(), col.data() + col.size());
  };
  const auto resp = vec("Crime_prop"), lit = vec("Literacy"), w = vec("Wealth");
  const auto m = viz::ccmap_model(resp, lit, w, {});
  for (const auto* set : {&m.x_shingles, &m.y_shingles})
    for (const auto& s : *set)
      c.expect(std::abs(static_cast<double>(s.members.size()) - 45.0) <= 1.0, "shingle size " + std::to_string(s.members.size()));

  const auto codes = ds.codes();
  const auto scene = viz::ccmap(inputs().basemap, codes, resp, lit, w, {});
  std::map<int, std::set<std::string>> fills;
  const std::string neutral = viz::neutral_background().hex();
  for (const auto& layer : scene.layers) {
    if (layer.name.rfind("panel-", 0) != 0 || layer.name.find("/map") == std::string::npos) continue;
    for (const auto& item : layer.items)
      if (const auto* p = std::get_if<viz::PolygonPrim>(&item); p && p->feature && p->style.fill && p->style.fill->hex() != neutral)
        fills[*p->feature].insert(p->style.fill->hex());
  }
  bool consistent = !fills.empty();
  for (const auto& [code, set] : fills) consistent = consistent && set.size() == 1;
  c.expect(consistent, "global class consistency");
  const double prob = app::build_figure("fig1", inputs()).report.value("sign_test_probability", 0.0);
  c.expect(num::sign_test_probability(82) == std::ldexp(1.0, -82), "(1/2)^82 exact");
  c.expect(std::abs(prob / 2.0679e-25 - 1) < 5e-5, "fig1 sign test " + std::to_string(prob));
}

void determinism(Check& c) {
  app::Inputs shuffled = inputs();
  auto recs = shuffled.dataset.records();
  std::mt19937_64 rng(86);
  std::shuffle(recs.begin(), recs.end(), rng);
  shuffled.dataset = data::MoralDataset(shuffled.dataset.variables(), recs);
  for (const auto& id : app::figure_ids()) {
    const auto a = app::build_figure(id, inputs()), b = app::build_figure(id, inputs()), p = app::build_figure(id, shuffled);
    if (!a.scene || !b.scene || !p.scene) {
      c.expect(false, id + " skipped");
      continue;
    }
    const auto svg = viz::render_svg(*a.scene);
    c.expect(svg == viz::render_svg(*b.scene), id + " rerun");
    c.expect(svg == viz::render_svg(*p.scene), id + " permutation");
  }
  c.detail << " (" << app::figure_ids().size() << " figures)";
}

void primary_only(Check& c) {
  // No explorer toolchain in the tree.
  const auto root = std::filesystem::path(MORALSTAT_DATA_DIR).parent_path();
  c.expect(!std::filesystem::exists(root / "node_modules"), "node_modules present");
  c.expect(!std::filesystem::exists(root / "package.json"), "package.json present");
  const auto bundle = app::explorer_bundle(fixture(), inputs().basemap);
  c.expect(bundle["schema"] == app::kSchema, "bundle schema");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
      {"MANOVA golden table (Roy 1e-3, F 0.01, df exact, p 5%, < 1 s)", manova},
      {"R-squared: mainland 0.43 / 0.36, Crime_prop ~ Literacy + Wealth 0.27", r_squared},
      {"Biplot variance 35.4% / 20.8% within 0.5", biplot},
      {"Canonical discriminant >= 90%, within covariance = I (1e-6)", cda},
      {"HE protrusion iff p < 0.05 (fixture + 50 synthetic fits)", he_protrusion},
      {"Varimax matches displayed loadings within 0.05", varimax},
      {"Ellipse chi2, Monte Carlo coverage, affine equivariance", ellipse},
      {"Loess exactness (1e-10) and WLS oracle (1e-8)", loess},
      {"Shingles 45 +/- 1, global classes, (1/2)^82", shingles},
      {"Determinism across runs and row permutations", determinism},
      {"Primary suite without secondary build", primary_only},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Check c;
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail << " [exception: " << e.what() << "]";
    }
    failed += !c.ok;
    std::printf("%s  %s%s\n", c.ok ? "PASS" : "FAIL", name.c_str(), c.detail.str().c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
