#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "csv.hpp"
#include "moralstat/app.hpp"
#include "moralstat/error.hpp"

namespace moralstat::app {

using viz::ColorRGB;
using viz::Frame;
using viz::PlotArea;
using viz::Point;
using viz::Scene;
using viz::Style;
using viz::TextAnchor;
using viz::TextPrim;

std::vector<ArbuthnotRow> load_arbuthnot(std::istream& in) {
  const auto rows = csv::read_all(in);
  if (rows.empty()) throw DataError("arbuthnot: empty file");
  const auto& head = rows.front();
  auto col = [&](std::string_view name) {
    auto it = std::find(head.begin(), head.end(), name);
    if (it == head.end()) throw DataError("arbuthnot: missing column " + std::string(name));
    return static_cast<std::size_t>(it - head.begin());
  };
  const std::size_t cy = col("Year"), cm = col("Males"), cf = col("Females");
  std::vector<ArbuthnotRow> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != head.size()) throw DataError("arbuthnot: line " + std::to_string(r + 1) + ": wrong field count");
    const auto y = csv::parse_number(row[cy]);
    const auto m = csv::parse_number(row[cm]);
    const auto f = csv::parse_number(row[cf]);
    if (!y || !m || !f || *f <= 0) throw DataError("arbuthnot: line " + std::to_string(r + 1) + ": bad number");
    out.push_back({static_cast<int>(*y), *m, *f});
  }
  if (out.empty()) throw DataError("arbuthnot: no data rows");
  return out;
}

std::filesystem::path default_data_dir() {
#ifdef MORALSTAT_DATA_DIR
  return MORALSTAT_DATA_DIR;
#else
  return "data";
#endif
}

RunConfig default_config() {
  RunConfig c;
  const auto d = default_data_dir();
  c.dataset = d / "guerry.csv";
  c.basemap = d / "france1830.geojson";
  c.arbuthnot = d / "arbuthnot.csv";
  return c;
}

void validate_config(const RunConfig& config, bool need_basemap) {
  auto readable = [](const std::filesystem::path& p, const char* what) {
    std::ifstream in(p);
    if (!in) throw DataError(std::string(what) + " not readable: " + p.string());
  };
  readable(config.dataset, "dataset");
  if (need_basemap) readable(config.basemap, "basemap");
}

Inputs load_inputs(const RunConfig& config, bool need_basemap) {
  validate_config(config, need_basemap);
  Inputs in;
  in.dataset = data::load_dataset_file(config.dataset.string());
  if (need_basemap) in.basemap = data::load_basemap_file(config.basemap.string());
  if (!config.arbuthnot.empty()) {
    std::ifstream f(config.arbuthnot);
    if (f) in.arbuthnot = load_arbuthnot(f);
  }
  in.seed = config.seed;
  return in;
}

// ---------------------------------------------------------------------------

namespace {

const std::array<const char*, 6> kRegionHex = {"#1B9E77", "#D95F02", "#7570B3", "#E7298A", "#66A61E", "#A6761D"};

ColorRGB region_color(data::Region r) {
  const auto it = std::find(data::kAllRegions.begin(), data::kAllRegions.end(), r);
  return ColorRGB::from_hex(kRegionHex[static_cast<std::size_t>(it - data::kAllRegions.begin())]);
}

const ColorRGB kBlack(0, 0, 0);

Json names_json(const std::vector<std::string>& v) {
  Json a = Json::array();
  for (const auto& s : v) a.push_back(s);
  return a;
}

Json codes_json(const std::vector<int>& v) {
  Json a = Json::array();
  for (int c : v) a.push_back(c);
  return a;
}

void add_title(Scene& s, double x, double y, const std::string& text, double size = 12.0) {
  s.add("titles", TextPrim{{x, y}, text, size, TextAnchor::Middle, kBlack, std::nullopt});
}

std::vector<Point> ellipse_device(const PlotArea& area, const num::EllipseGeom& e) {
  std::vector<Point> pts;
  if (e.degenerate) {
    const auto [a, b] = e.major_axis();
    pts = {a, b};
  } else {
    pts = e.boundary();
    pts.push_back(pts.front());
  }
  for (auto& p : pts) p = area.to_device(p.x, p.y);
  return pts;
}

void add_ellipse(Scene& s, std::string_view layer, const PlotArea& area, const num::EllipseGeom& e,
                 ColorRGB color, double width, bool dashed = false) {
  Style st;
  st.stroke = color;
  st.stroke_width = width;
  st.dashed = dashed;
  s.add(layer, viz::PolylinePrim{ellipse_device(area, e), st, std::nullopt});
}

void add_arrow(Scene& s, std::string_view layer, const Point& from, const Point& to, ColorRGB color,
               const std::string& label) {
  Style st;
  st.stroke = color;
  st.stroke_width = 1.3;
  s.add(layer, viz::PolylinePrim{{from, to}, st, std::nullopt});
  const double dx = to.x - from.x, dy = to.y - from.y, len = std::hypot(dx, dy);
  if (len > 1e-9) {
    const double ux = dx / len, uy = dy / len, h = 6.0;
    s.add(layer, viz::PolylinePrim{{{to.x - h * ux + h * 0.5 * uy, to.y - h * uy - h * 0.5 * ux}, to,
                                    {to.x - h * ux - h * 0.5 * uy, to.y - h * uy + h * 0.5 * ux}},
                                   st, std::nullopt});
    const TextAnchor a = ux > 0.3 ? TextAnchor::Start : ux < -0.3 ? TextAnchor::End : TextAnchor::Middle;
    s.add(layer, TextPrim{{to.x + 4 * ux, to.y + 4 * uy + 3}, label, 9.0, a, color, std::nullopt});
  }
}

void check_range(const FigureParams& p, const std::string& key, double lo, double hi, bool lo_open, bool hi_open) {
  auto it = p.find(key);
  if (it == p.end()) return;
  const double v = it->second;
  const bool ok = (lo_open ? v > lo : v >= lo) && (hi_open ? v < hi : v <= hi);
  if (!ok) throw std::invalid_argument("parameter " + key + " out of range: " + std::to_string(v));
}

double param(const FigureParams& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

std::vector<std::string> names_of(const data::MoralDataset& ds) { return ds.names(); }

std::vector<std::string> code_labels(const data::MoralDataset& ds) {
  std::vector<std::string> out;
  for (int c : ds.codes()) out.push_back(std::to_string(c));
  return out;
}

// ---------------------------------------------------------------------------

FigureOutput fig1(const Inputs& in, const FigureParams& p) {
  FigureOutput out;
  out.id = "fig1";
  if (!in.arbuthnot) {
    out.report["skipped"] = "Arbuthnot fixture not available";
    return out;
  }
  const auto& rows = *in.arbuthnot;
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::VectorXd year(n), ratio(n);
  unsigned excess = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    year[i] = rows[static_cast<std::size_t>(i)].year;
    ratio[i] = rows[static_cast<std::size_t>(i)].males / rows[static_cast<std::size_t>(i)].females;
    if (ratio[i] > 1.0) ++excess;
  }
  const double mean_ratio = ratio.mean();
  const double prob = num::sign_test_probability(excess);

  viz::ScatterOptions opt;
  opt.pooled_levels.clear();
  opt.label_coverage.reset();
  opt.span = param(p, "span", num::kDefaultLoessSpan);
  opt.x_label = "Year";
  opt.y_label = "Sex ratio (males / females)";
  const auto model = viz::scatter_model(year, ratio, {}, opt);
  Scene s;
  s.width = 640;
  s.height = 440;
  s.title = "Arbuthnot sex ratio";
  const PlotArea area = viz::draw_scatter(s, Frame{70, 40, 540, 340}, model, {}, {}, opt);
  Style mean_style;
  mean_style.stroke = kBlack;
  mean_style.dashed = true;
  s.add("reference", viz::PolylinePrim{{area.to_device(area.xmin, mean_ratio), area.to_device(area.xmax, mean_ratio)},
                                       mean_style, std::nullopt});
  Style one = mean_style;
  one.stroke = ColorRGB(0.5, 0.5, 0.5);
  s.add("reference", viz::PolylinePrim{{area.to_device(area.xmin, 1.0), area.to_device(area.xmax, 1.0)}, one, std::nullopt});
  char buf[96];
  std::snprintf(buf, sizeof buf, "mean %.2f; P = (1/2)^%u = %.4g", mean_ratio, excess, prob);
  add_title(s, 340, 24, buf, 11.0);
  out.scene = std::move(s);
  out.report["years"] = rows.size();
  out.report["first_year"] = rows.front().year;
  out.report["last_year"] = rows.back().year;
  out.report["mean_ratio"] = sig9(mean_ratio);
  out.report["years_male_excess"] = excess;
  out.report["sign_test_probability"] = sig9(prob);
  out.report["loess_span"] = sig9(opt.span);
  return out;
}

FigureOutput fig4(const Inputs& in, const FigureParams&) {
  const auto& ds = in.dataset;
  FigureOutput out;
  out.id = "fig4";
  Scene s;
  s.width = 3 * 330;
  s.height = 2 * 350;
  s.title = "Rank maps of the six moral variables";
  const auto codes = ds.codes();
  Json vars = Json::array();
  const auto moral = moral_variables();
  for (std::size_t k = 0; k < moral.size(); ++k) {
    const auto meta = data::describe_variable(moral[k]);
    viz::ChoroplethOptions opt;
    opt.more_is_better = meta.more_is_better;
    opt.rank_one_is = meta.more_is_better ? viz::RankOne::Highest : viz::RankOne::Lowest;
    opt.title = moral[k];
    const Eigen::VectorXd col = ds.column(moral[k]);
    const std::vector<double> values(col.data(), col.data() + col.size());
    const Frame f{(k % 3) * 330.0, (k / 3) * 350.0, 330, 350};
    viz::draw_rank_choropleth(s, f, in.basemap, codes, values, opt, moral[k] + "/");
    const auto shade = viz::rank_shading(values, opt);
    std::vector<std::size_t> idx(codes.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return shade.darkness[a] > shade.darkness[b]; });
    std::vector<int> worst;
    for (std::size_t i = 0; i < 5 && i < idx.size(); ++i) worst.push_back(codes[idx[i]]);
    Json v;
    v["variable"] = moral[k];
    v["darkest"] = codes_json(worst);
    vars.push_back(std::move(v));
  }
  out.scene = std::move(s);
  out.report["darker_is"] = "worse";
  out.report["rank_one_is"] = "best";
  out.report["maps"] = std::move(vars);
  return out;
}

FigureOutput fig8(const Inputs& in, const FigureParams&) {
  const auto& ds = in.dataset;
  FigureOutput out;
  out.id = "fig8";
  Scene s;
  s.width = 1060;
  s.height = 620;
  s.title = "Crimes against persons and literacy";
  const auto codes = ds.codes();
  auto values_of = [&](const char* v) {
    const Eigen::VectorXd c = ds.column(v);
    return std::vector<double>(c.data(), c.data() + c.size());
  };
  const auto a = values_of("Crime_pers"), b = values_of("Literacy");
  viz::ChoroplethOptions opt;
  opt.title = "(a) Crime_pers";
  viz::draw_rank_choropleth(s, Frame{0, 40, 400, 560}, in.basemap, codes, a, opt, "a/");
  opt.title = "(c) Literacy";
  viz::draw_rank_choropleth(s, Frame{660, 40, 400, 560}, in.basemap, codes, b, opt, "c/");
  const auto ra = num::rank_transform(a, viz::RankOne::Highest);
  const auto rb = num::rank_transform(b, viz::RankOne::Highest);
  viz::draw_parallel_ranks(s, Frame{470, 70, 120, 520}, ra, rb, {}, "Crime_pers", "Literacy");
  add_title(s, 530, 30, "(b) ranks");
  const auto segs = viz::parallel_segments(ra, rb, Frame{0, 0, 1, 1});
  const std::size_t n = ra.size();
  std::vector<double> da(n), db(n);
  for (std::size_t i = 0; i < n; ++i) da[i] = ra[i] - (n + 1) / 2.0, db[i] = rb[i] - (n + 1) / 2.0;
  const double spearman = std::inner_product(da.begin(), da.end(), db.begin(), 0.0) /
                          std::sqrt(std::inner_product(da.begin(), da.end(), da.begin(), 0.0) *
                                    std::inner_product(db.begin(), db.end(), db.begin(), 0.0));
  out.scene = std::move(s);
  out.report["left"] = "Crime_pers";
  out.report["right"] = "Literacy";
  out.report["crossings"] = viz::count_crossings(segs);
  out.report["pairs"] = n * (n - 1) / 2;
  out.report["spearman"] = sig9(spearman);
  return out;
}

FigureOutput fig12(const Inputs& in, const FigureParams& p) {
  const auto& ds = in.dataset;
  FigureOutput out;
  out.id = "fig12";
  const Eigen::VectorXd x = ds.column("Literacy"), y = ds.column("Crime_pers");
  const auto names = names_of(ds);
  const auto groups = region_labels(ds);
  const double coverage = param(p, "coverage", 0.90);

  viz::ScatterOptions left;
  left.x_label = "Literacy";
  left.y_label = "Crime_pers";
  left.span = param(p, "span", num::kDefaultLoessSpan);
  left.label_coverage = coverage;
  viz::ScatterOptions right = left;
  right.pooled_levels.clear();
  right.smooth = false;
  right.group_ellipses = true;
  right.group_crosses = true;

  Scene s;
  s.width = 1100;
  s.height = 520;
  s.title = "Crimes against persons vs literacy";
  const auto ml = viz::scatter_model(x, y, {}, left);
  const auto mr = viz::scatter_model(x, y, groups, right);
  viz::draw_scatter(s, Frame{60, 40, 460, 420}, ml, names, {}, left, "left/");
  viz::draw_scatter(s, Frame{610, 40, 460, 420}, mr, names, {}, right, "right/");
  add_title(s, 290, 20, "All regions");
  add_title(s, 840, 20, "Region differences");
  out.scene = std::move(s);

  std::vector<int> labeled;
  std::vector<std::string> labeled_names;
  for (auto i : ml.flagged) labeled.push_back(ds[i].code), labeled_names.push_back(names[i]);
  out.report["x"] = "Literacy";
  out.report["y"] = "Crime_pers";
  out.report["chi2_68"] = sig9(num::chi2_quantile(0.68));
  out.report["label_coverage"] = sig9(coverage);
  out.report["label_threshold"] = sig9(num::chi2_quantile(coverage));
  out.report["labeled_codes"] = codes_json(labeled);
  out.report["labeled_names"] = names_json(labeled_names);
  Json gs = Json::array();
  for (const auto& g : mr.groups) {
    Json j;
    j["group"] = g.label;
    j["n"] = g.n;
    j["mean"] = sig9_array(g.mean);
    j["se"] = sig9_array(g.se);
    j["ellipse"] = g.ellipse.has_value();
    gs.push_back(std::move(j));
  }
  out.report["groups"] = std::move(gs);

  // Seeded check of the 68% ellipse coverage on a bivariate normal sample.
  std::mt19937_64 rng(in.seed);
  std::normal_distribution<double> z;
  Eigen::MatrixXd sample(10000, 2);
  for (Eigen::Index i = 0; i < sample.rows(); ++i) sample(i, 0) = z(rng), sample(i, 1) = 0.6 * sample(i, 0) + 0.8 * z(rng);
  const double inside = 1.0 - static_cast<double>(num::outside_ellipse(sample, 0.68).size()) / sample.rows();
  out.report["seed"] = in.seed;
  out.report["monte_carlo_coverage_68"] = sig9(inside);
  return out;
}

FigureOutput fig13(const Inputs& in, const FigureParams& p) {
  const auto& ds = in.dataset;
  FigureOutput out;
  out.id = "fig13";
  const std::vector<std::string> vars = {"Crime_pers", "Crime_prop", "Literacy", "Suicides", "Infants", "Donations"};
  out.scene = viz::scatterplot_matrix(ds, vars, param(p, "span", num::kDefaultLoessSpan));
  const Eigen::MatrixXd X = ds.columns(vars);
  const Eigen::MatrixXd S = num::covariance(X);
  const Eigen::VectorXd sd = S.diagonal().cwiseSqrt();
  const Eigen::MatrixXd R = sd.cwiseInverse().asDiagonal() * S * sd.cwiseInverse().asDiagonal();
  out.report["variables"] = names_json(vars);
  out.report["panels"] = vars.size() * vars.size();
  out.report["correlation"] = sig9_matrix(R);
  return out;
}

FigureOutput fig14(const Inputs& in, const FigureParams&) {
  const auto& ds = in.dataset;
  FigureOutput out;
  out.id = "fig14";
  const auto pca = moral_pca(ds);
  const auto bp = mv::biplot_layout(pca);
  const auto regions = ds.regions();
  const auto names = names_of(ds);
  const auto numbers = code_labels(ds);
  const auto n = static_cast<std::size_t>(bp.points.rows());

  std::map<data::Region, num::EllipseGeom> ell;
  for (auto r : data::kAllRegions) {
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < n; ++i)
      if (regions[i] == r) rows.push_back(static_cast<Eigen::Index>(i));
    if (rows.size() < 3) continue;
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows.size()), 2);
    for (std::size_t k = 0; k < rows.size(); ++k) sub.row(static_cast<Eigen::Index>(k)) = bp.points.row(rows[k]);
    ell.emplace(r, num::data_ellipse(sub, 0.68));
  }

  double lim = bp.points.cwiseAbs().maxCoeff();
  for (const auto& [r, e] : ell)
    lim = std::max({lim, std::abs(e.center.x()) + e.extent({1, 0}), std::abs(e.center.y()) + e.extent({0, 1})});
  const double vscale = 0.9 * lim / bp.vectors.rowwise().norm().maxCoeff();

  Scene s;
  s.width = 640;
  s.height = 640;
  s.title = "Biplot";
  char xl[64], yl[64];
  std::snprintf(xl, sizeof xl, "Dimension 1 (%.1f%%)", bp.pct_variance[0]);
  std::snprintf(yl, sizeof yl, "Dimension 2 (%.1f%%)", bp.pct_variance[1]);
  const PlotArea area = viz::fit_plot_area(Frame{60, 40, 540, 540}, -lim, lim, -lim, lim, 0.05, true);
  for (const auto& [r, e] : ell) add_ellipse(s, "ellipses", area, e, region_color(r), 1.2);

  std::vector<Point> device(n);
  for (std::size_t i = 0; i < n; ++i) {
    device[i] = area.to_device(bp.points(static_cast<Eigen::Index>(i), 0), bp.points(static_cast<Eigen::Index>(i), 1));
    Style st;
    st.fill = region_color(regions[i]);
    s.add("points", viz::MarkerPrim{device[i], 2.2, viz::MarkerShape::Circle, st, ds[i].code});
  }
  const Point origin = area.to_device(0, 0);
  for (Eigen::Index v = 0; v < bp.vectors.rows(); ++v)
    add_arrow(s, "vectors", origin, area.to_device(vscale * bp.vectors(v, 0), vscale * bp.vectors(v, 1)), kBlack,
              bp.variables[static_cast<std::size_t>(v)]);

  // Names outside the own-region ellipse, numbers inside.
  const auto order = mv::group_outliers(bp.points, regions, n);
  std::vector<viz::LabelRequest> req;
  std::vector<int> named;
  for (auto i : order) {
    bool outside = true;
    if (auto it = ell.find(regions[i]); it != ell.end()) {
      const Eigen::Vector2d q = bp.points.row(static_cast<Eigen::Index>(i)).transpose();
      outside = it->second.quadratic_form(q) > it->second.radius * it->second.radius;
    }
    if (outside) {
      req.push_back({i, names[i], numbers[i]});
      named.push_back(ds[i].code);
    } else {
      req.push_back({i, numbers[i], ""});
    }
  }
  viz::LabelOptions lopt;
  lopt.font_size = 7.0;
  lopt.marker_radius = 2.2;
  const auto placed = viz::place_labels(device, req, lopt);
  viz::draw_labels(s, placed, lopt);
  viz::draw_axes(s, area, xl, yl);
  out.scene = std::move(s);

  std::sort(named.begin(), named.end());
  out.report["variables"] = names_json(bp.variables);
  out.report["pct_variance"] = sig9_array(pca.pct_variance);
  out.report["eigenvalues"] = sig9_array(pca.eigenvalues);
  out.report["singular_values"] = sig9_array(bp.singular_values);
  out.report["vectors"] = sig9_matrix(bp.vectors);
  out.report["axes_equated"] = bp.axes_equated;
  out.report["named_outside_region_ellipse"] = codes_json(named);
  out.report["region_outliers"] = codes_json(biplot_outliers(ds));
  std::size_t dropped = 0;
  for (const auto& pl : placed) dropped += pl.outcome == viz::LabelOutcome::Dropped;
  out.report["labels_dropped"] = dropped;
  return out;
}

FigureOutput fig15(const Inputs& in, const FigureParams& p) {
  const auto& ds = in.dataset;
  FigureOutput out;
  out.id = "fig15";
  const auto cda = moral_cda(ds);
  const double level = param(p, "coverage", 0.99);
  const auto land = mainland(ds);
  const auto n = static_cast<std::size_t>(cda.scores.rows());

  std::vector<num::EllipseGeom> circles;
  for (const auto& g : cda.group_labels) circles.push_back(mv::confidence_circle(cda, g, level));
  double lim = cda.scores.leftCols(2).cwiseAbs().maxCoeff();
  const double vscale = 0.85 * lim / cda.structure.leftCols(2).rowwise().norm().maxCoeff();

  Scene s;
  s.width = 640;
  s.height = 640;
  s.title = "Canonical discriminant plot";
  char xl[64], yl[64];
  std::snprintf(xl, sizeof xl, "Can1 (%.1f%%)", cda.pct[0]);
  std::snprintf(yl, sizeof yl, "Can2 (%.1f%%)", cda.pct.size() > 1 ? cda.pct[1] : 0.0);
  const PlotArea area = viz::fit_plot_area(Frame{60, 40, 540, 540}, -lim, lim, -lim, lim, 0.05, true);
  const auto regions = land.regions();
  for (std::size_t i = 0; i < n; ++i) {
    Style st;
    st.fill = region_color(regions[i]);
    st.opacity = 0.8;
    s.add("points", viz::MarkerPrim{area.to_device(cda.scores(static_cast<Eigen::Index>(i), 0), cda.scores(static_cast<Eigen::Index>(i), 1)),
                                    2.2, viz::MarkerShape::Circle, st, land[i].code});
  }
  Json radii = Json::array();
  for (std::size_t g = 0; g < circles.size(); ++g) {
    const auto r = *data::region_from_letter(cda.group_labels[g][0]);
    add_ellipse(s, "circles", area, circles[g], region_color(r), 1.5);
    const Point c = area.to_device(circles[g].center.x(), circles[g].center.y());
    s.add("circles", TextPrim{{c.x, c.y + 3}, cda.group_labels[g], 10.0, TextAnchor::Middle, region_color(r), std::nullopt});
    radii.push_back({{"group", cda.group_labels[g]}, {"n", cda.group_n[g]}, {"radius", sig9(circles[g].radius)}});
  }
  const Point origin = area.to_device(0, 0);
  const auto vars = moral_variables();
  for (Eigen::Index v = 0; v < cda.structure.rows(); ++v)
    add_arrow(s, "vectors", origin, area.to_device(vscale * cda.structure(v, 0), vscale * cda.structure(v, 1)), kBlack,
              vars[static_cast<std::size_t>(v)]);
  viz::draw_axes(s, area, xl, yl);
  out.scene = std::move(s);

  out.report["groups"] = names_json(cda.group_labels);
  out.report["eigenvalues"] = sig9_array(cda.eigenvalues);
  out.report["pct"] = sig9_array(cda.pct);
  out.report["pct_first_two"] = sig9(cda.pct[0] + (cda.pct.size() > 1 ? cda.pct[1] : 0.0));
  out.report["structure"] = sig9_matrix(cda.structure);
  out.report["circle_level"] = sig9(level);
  out.report["circles"] = std::move(radii);
  return out;
}

FigureOutput fig16(const Inputs& in, const FigureParams& p) {
  const auto& ds = in.dataset;
  FigureOutput out;
  out.id = "fig16";
  const double alpha = param(p, "alpha", 0.05);
  const double coverage = param(p, "coverage", 0.95);
  const auto fit = mv::fit_crime_model(ds);
  const auto rows = mv::manova_type2(fit);
  const auto he = mv::he_geometry(fit, rows, {0, 1}, alpha);
  const auto names = names_of(ds);

  Scene s;
  s.width = 640;
  s.height = 600;
  s.title = "HE plot";
  viz::ScatterOptions opt;
  opt.pooled_levels = {coverage};
  opt.smooth = false;
  opt.label_coverage = coverage;
  opt.x_label = fit.responses[0];
  opt.y_label = fit.responses[1];
  opt.axes = false;
  const auto model = viz::scatter_model(fit.Y.col(0), fit.Y.col(1), {}, opt);
  const PlotArea area = viz::draw_scatter(s, Frame{70, 40, 520, 500}, model, names, {}, opt);
  add_ellipse(s, "he", area, he.e_ellipse, ColorRGB::from_hex("#D7191C"), 2.0, true);
  Json table = Json::array();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& [term, e] = he.h_ellipses[k];
    add_ellipse(s, "he", area, e, kBlack, 1.6);
    const Eigen::Vector2d u = e.degenerate ? Eigen::Vector2d(e.major_axis().second.x - e.center.x(),
                                                              e.major_axis().second.y - e.center.y())
                                           : Eigen::Vector2d(1, 1).normalized() * e.extent(Eigen::Vector2d(1, 1).normalized());
    const Point at = area.to_device(e.center.x() + u.x(), e.center.y() + u.y());
    s.add("he", TextPrim{{at.x + 3, at.y - 3}, term, 9.0, TextAnchor::Start, kBlack, std::nullopt});
    const double ratio = mv::protrusion_ratio(e, he.e_ellipse);
    Json row;
    row["term"] = rows[k].term;
    row["df"] = rows[k].df;
    row["roy_stat"] = sig9(rows[k].roy_stat);
    row["approx_f"] = sig9(rows[k].approx_f);
    row["df_num"] = rows[k].df_num;
    row["df_den"] = rows[k].df_den;
    row["p_value"] = sig9(rows[k].p_value);
    row["lambda_alpha"] = sig9(he.lambda_alpha[k]);
    row["protrusion"] = sig9(ratio);
    row["protrudes"] = ratio > 1.0;
    table.push_back(std::move(row));
  }
  viz::draw_axes(s, area, opt.x_label, opt.y_label);
  out.scene = std::move(s);

  std::vector<std::string> labeled;
  for (auto i : model.flagged) labeled.push_back(names[i]);
  const auto mr = manova_report(ds, alpha);
  out.report["responses"] = names_json(fit.responses);
  out.report["df_error"] = fit.df_error;
  out.report["alpha"] = sig9(alpha);
  out.report["manova"] = std::move(table);
  out.report["r_squared"] = mr["r_squared"];
  out.report["r_squared_mainland"] = mr["r_squared_mainland"];
  out.report["label_coverage"] = sig9(coverage);
  out.report["labeled_names"] = names_json(labeled);
  return out;
}

std::vector<std::size_t> biplot_order(const data::MoralDataset& ds) {
  const auto bp = mv::biplot_layout(moral_pca(ds));
  return viz::effect_order(bp.vectors, bp.variables);
}

FigureOutput fig17(const Inputs& in, const FigureParams&) {
  const auto& ds = in.dataset;
  FigureOutput out;
  out.id = "fig17";
  const auto vars = moral_variables();
  const auto order = biplot_order(ds);
  const auto left = viz::star_map(in.basemap, ds, vars, order, viz::GlyphEncoding::Individual, viz::ColorEncode::None);
  const auto right = viz::star_map(in.basemap, ds, vars, order, viz::GlyphEncoding::RegionQuartiles, viz::ColorEncode::None);
  Scene s;
  s.width = left.width + right.width;
  s.height = left.height;
  s.title = "Star maps";
  viz::append_scene(s, left, 0, 0, "individual/");
  viz::append_scene(s, right, left.width, 0, "regions/");
  out.scene = std::move(s);

  const auto model = viz::star_map_model(ds, vars, order, viz::ColorEncode::None);
  std::vector<std::string> ordered;
  for (auto o : order) ordered.push_back(vars[o]);
  out.report["angular_order"] = names_json(ordered);
  Json regs = Json::array();
  for (const auto& g : model.regions) {
    Json j;
    j["region"] = std::string(1, data::region_letter(g.region));
    j["members"] = g.members;
    j["median_only"] = g.median_only;
    j["lower"] = sig9_array(Eigen::Map<const Eigen::VectorXd>(g.lower.data(), static_cast<Eigen::Index>(g.lower.size())));
    j["median"] = sig9_array(Eigen::Map<const Eigen::VectorXd>(g.median.data(), static_cast<Eigen::Index>(g.median.size())));
    j["upper"] = sig9_array(Eigen::Map<const Eigen::VectorXd>(g.upper.data(), static_cast<Eigen::Index>(g.upper.size())));
    regs.push_back(std::move(j));
  }
  out.report["variables"] = names_json(vars);
  out.report["regions"] = std::move(regs);
  if (auto i = ds.find(data::kCorsica)) out.report["corsica_fractions"] = sig9_array(model.fractions.row(static_cast<Eigen::Index>(*i)).transpose());
  return out;
}

FigureOutput fig18(const Inputs& in, const FigureParams&) {
  const auto& ds = in.dataset;
  FigureOutput out;
  out.id = "fig18";
  const auto vars = moral_variables();
  const auto order = biplot_order(ds);
  const auto left = viz::star_map(in.basemap, ds, vars, order, viz::GlyphEncoding::Individual, viz::ColorEncode::MeanRank);
  const auto right = viz::star_map(in.basemap, ds, vars, order, viz::GlyphEncoding::Individual, viz::ColorEncode::SdRank);
  Scene s;
  s.width = left.width + right.width;
  s.height = left.height + 20;
  s.title = "Mean and standard deviation of ranks";
  viz::append_scene(s, left, 0, 20, "mean/");
  viz::append_scene(s, right, left.width, 20, "sd/");
  add_title(s, left.width / 2, 16, "Mean rank");
  add_title(s, left.width + right.width / 2, 16, "SD of ranks");
  out.scene = std::move(s);
  out.report["rule"] = "outside 1.5 IQR fences";
  out.report["annotated_mean_rank"] = codes_json(viz::star_map_model(ds, vars, order, viz::ColorEncode::MeanRank).annotated);
  out.report["annotated_sd_rank"] = codes_json(viz::star_map_model(ds, vars, order, viz::ColorEncode::SdRank).annotated);
  return out;
}

FigureOutput fig19(const Inputs& in, const FigureParams&) {
  const auto& ds = in.dataset;
  FigureOutput out;
  out.id = "fig19";
  const std::array<std::string, 3> vars = {"Crime_pers", "Crime_prop", "Literacy"};
  Eigen::MatrixXd ch(static_cast<Eigen::Index>(ds.size()), 3);
  for (Eigen::Index j = 0; j < 3; ++j) {
    const Eigen::VectorXd c = ds.column(vars[static_cast<std::size_t>(j)]);
    const auto n = viz::minmax_normalize(std::vector<double>(c.data(), c.data() + c.size()));
    for (Eigen::Index i = 0; i < ch.rows(); ++i) ch(i, j) = n[static_cast<std::size_t>(i)];
  }
  const auto codes = ds.codes();
  out.scene = viz::rgb_map(in.basemap, codes, ch, vars, {}, "RGB map");
  out.report["channels"] = {{"R", vars[0]}, {"G", vars[1]}, {"B", vars[2]}};
  out.report["normalization"] = "min-max";
  return out;
}

FigureOutput fig20(const Inputs& in, const FigureParams&) {
  const auto& ds = in.dataset;
  FigureOutput out;
  out.id = "fig20";
  const auto vars = moral_variables();
  const auto vm = moral_varimax(ds);
  const Eigen::MatrixXd F = mv::factor_scores(ds.columns(vars), vm.loadings);
  const auto outliers = biplot_outliers(ds);
  out.scene = viz::factor_rgb_map(in.basemap, ds.codes(), F, outliers);
  out.report["variables"] = names_json(vars);
  out.report["loadings"] = sig9_matrix(vm.loadings);
  std::vector<int> sorted = outliers;
  std::sort(sorted.begin(), sorted.end());
  out.report["outliers"] = codes_json(sorted);
  const Eigen::MatrixXd C = num::covariance(F);
  const Eigen::VectorXd sd = C.diagonal().cwiseSqrt();
  out.report["score_correlation"] = sig9_matrix(sd.cwiseInverse().asDiagonal() * C * sd.cwiseInverse().asDiagonal());
  return out;
}

FigureOutput fig21(const Inputs& in, const FigureParams& p) {
  const auto& ds = in.dataset;
  FigureOutput out;
  out.id = "fig21";
  viz::CcMapOptions opt;
  opt.overlap = param(p, "overlap", 0.10);
  opt.response_name = "Crime_prop";
  opt.x_name = "Literacy";
  opt.y_name = "Wealth";
  const auto codes = ds.codes();
  auto vec = [&](const char* v) {
    const Eigen::VectorXd c = ds.column(v);
    return std::vector<double>(c.data(), c.data() + c.size());
  };
  out.scene = viz::ccmap(in.basemap, codes, vec("Crime_prop"), vec("Literacy"), vec("Wealth"), opt);
  out.report = ccmap_model_json(ds, "Crime_prop", "Literacy", "Wealth", opt.kx, opt.ky, opt.overlap);
  return out;
}

FigureOutput fig22(const Inputs& in, const FigureParams&) {
  const auto& ds = in.dataset;
  FigureOutput out;
  out.id = "fig22";
  const auto fit = mv::response_surface(ds.column("Crime_pers"), ds.column("Literacy"), ds.column("Wealth"));
  const auto names = names_of(ds);
  viz::ResidualMapOptions opt;
  opt.response_name = "Crime_pers";
  const auto [fitted, resid] = viz::fitted_residual_maps(in.basemap, ds.codes(), names, fit, opt);
  Scene s;
  s.width = fitted.width + resid.width;
  s.height = fitted.height;
  s.title = "Response surface: fitted values and residuals";
  viz::append_scene(s, fitted, 0, 0, "fitted/");
  viz::append_scene(s, resid, fitted.width, 0, "residuals/");
  out.scene = std::move(s);
  std::vector<std::string> outside;
  for (auto i : fit.outside) outside.push_back(names[i]);
  out.report["response"] = "Crime_pers";
  out.report["terms"] = names_json({"(Intercept)", "Literacy", "Wealth", "Literacy^2", "Wealth^2", "Literacy:Wealth"});
  out.report["coefficients"] = sig9_array(fit.coefficients);
  out.report["r_squared"] = sig9(fit.r_squared);
  out.report["outside"] = names_json(outside);
  out.report["linear_crime_prop_r_squared"] = regression_report(ds)["linear"]["r_squared"];
  return out;
}

using Builder = FigureOutput (*)(const Inputs&, const FigureParams&);

struct Entry {
  const char* id;
  Builder build;
  std::vector<std::string> params;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> r = {
      {"fig1", fig1, {"span"}},          {"fig4", fig4, {}},
      {"fig8", fig8, {}},                {"fig12", fig12, {"span", "coverage"}},
      {"fig13", fig13, {"span"}},        {"fig14", fig14, {}},
      {"fig15", fig15, {"coverage"}},    {"fig16", fig16, {"alpha", "coverage"}},
      {"fig17", fig17, {}},              {"fig18", fig18, {}},
      {"fig19", fig19, {}},              {"fig20", fig20, {}},
      {"fig21", fig21, {"overlap"}},     {"fig22", fig22, {}},
  };
  return r;
}

const Entry& lookup(std::string_view id) {
  for (const auto& e : registry())
    if (id == e.id) return e;
  throw UsageError("unknown figure '" + std::string(id) + "'");
}

}  // namespace

const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& e : registry()) v.emplace_back(e.id);
    return v;
  }();
  return ids;
}

const std::vector<std::string>& figure_params(std::string_view id) { return lookup(id).params; }

FigureOutput build_figure(std::string_view id, const Inputs& inputs, const FigureParams& params) {
  const Entry& e = lookup(id);
  for (const auto& [k, v] : params)
    if (std::find(e.params.begin(), e.params.end(), k) == e.params.end())
      throw UsageError("figure " + std::string(id) + " does not take parameter '" + k + "'");
  check_range(params, "span", 0.0, 1.0, true, false);
  check_range(params, "alpha", 0.0, 1.0, true, true);
  check_range(params, "coverage", 0.0, 1.0, true, true);
  check_range(params, "overlap", 0.0, 1.0, false, true);

  // Canonical row order makes the output independent of the input row order.
  Inputs sorted{inputs.dataset.sorted_by_code(), inputs.basemap, inputs.arbuthnot, inputs.seed};
  FigureOutput out = e.build(sorted, params);
  Json report;
  report["schema"] = kSchema;
  report["figure"] = e.id;
  Json ps = Json::object();
  for (const auto& [k, v] : params) ps[k] = sig9(v);
  report["params"] = std::move(ps);
  for (auto& [k, v] : out.report.items()) report[k] = v;
  if (out.scene) report["warnings"] = out.scene->warnings;
  out.report = std::move(report);
  return out;
}

std::vector<std::filesystem::path> write_figure(const FigureOutput& fig, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  std::vector<std::filesystem::path> written;
  auto write = [&](const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot write " + path.string());
    f << bytes;
    if (!f) throw UsageError("cannot write " + path.string());
    written.push_back(path);
  };
  if (fig.scene) write(out_dir / (fig.id + ".svg"), viz::render_svg(*fig.scene));
  write(out_dir / (fig.id + ".json"), dump_json(fig.report));
  return written;
}

}  // namespace moralstat::app
