#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <stdexcept>

#include "moralstat/geoviz.hpp"

namespace moralstat::viz {

namespace {

long round_half_up(double x) { return static_cast<long>(std::floor(x + 0.5 + 1e-9)); }

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, std::abs(v) >= 100 ? "%.0f" : "%.3g", v);
  return buf;
}

}  // namespace

double shingle_target(std::size_t n, int k, double overlap) {
  return static_cast<double>(n) / (k * (1.0 - overlap) + overlap);
}

std::vector<Shingle> equal_count_shingles(std::span<const double> values, int k, double overlap) {
  const std::size_t n = values.size();
  if (k < 1) throw std::invalid_argument("shingle count must be at least 1");
  if (!(overlap >= 0.0 && overlap < 1.0)) throw std::invalid_argument("shingle overlap must be in [0, 1)");
  if (n < static_cast<std::size_t>(k)) throw std::invalid_argument("fewer observations than shingles");
  const double r = shingle_target(n, k, overlap);
  if (r < 1.0) throw std::invalid_argument("shingles infeasible: fewer than one member each");
  const double step = r * (1.0 - overlap);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<Shingle> out;
  for (int i = 0; i < k; ++i) {
    const long lo = std::clamp<long>(round_half_up(i * step), 0, static_cast<long>(n) - 1);
    long hi = round_half_up(i * step + r) - 1;
    if (i == k - 1) hi = static_cast<long>(n) - 1;
    hi = std::clamp<long>(hi, lo, static_cast<long>(n) - 1);
    Shingle s;
    s.lower = values[order[static_cast<std::size_t>(lo)]];
    s.upper = values[order[static_cast<std::size_t>(hi)]];
    for (std::size_t j = 0; j < n; ++j)
      if (values[j] >= s.lower && values[j] <= s.upper) s.members.push_back(j);
    out.push_back(std::move(s));
  }
  return out;
}

DivergingScale diverging_percentile_scale(std::span<const double> values, bool reciprocal) {
  DivergingScale s;
  s.rates.reserve(values.size());
  for (double v : values) {
    if (reciprocal && v == 0.0) throw std::invalid_argument("reciprocal of a zero value");
    s.rates.push_back(reciprocal ? 1.0 / v : v);
  }
  if (std::set<double>(s.rates.begin(), s.rates.end()).size() < 2)
    throw std::invalid_argument("percentile scale needs at least 2 distinct values");
  for (std::size_t c = 0; c < kPercentileCuts.size(); ++c) s.cuts[c] = num::quantile(s.rates, kPercentileCuts[c]);
  for (double r : s.rates)
    s.classes.push_back(1 + static_cast<int>(std::count_if(s.cuts.begin(), s.cuts.end(), [&](double c) { return c < r; })));
  return s;
}

CcMapModel ccmap_model(std::span<const double> response, std::span<const double> given_x,
                       std::span<const double> given_y, const CcMapOptions& opt) {
  if (response.size() != given_x.size() || response.size() != given_y.size())
    throw std::invalid_argument("response and given variables differ in length");
  CcMapModel m;
  m.x_shingles = equal_count_shingles(given_x, opt.kx, opt.overlap);
  m.y_shingles = equal_count_shingles(given_y, opt.ky, opt.overlap);
  m.scale = diverging_percentile_scale(response, opt.reciprocal);
  for (int row = 0; row < opt.ky; ++row) {
    const int iy = opt.y_low_on_top ? row : opt.ky - 1 - row;
    for (int ix = 0; ix < opt.kx; ++ix) {
      CcPanel p;
      p.ix = ix;
      p.row = row;
      p.iy = iy;
      const auto& xm = m.x_shingles[static_cast<std::size_t>(ix)].members;
      const auto& ym = m.y_shingles[static_cast<std::size_t>(iy)].members;
      std::set_intersection(xm.begin(), xm.end(), ym.begin(), ym.end(), std::back_inserter(p.members));
      if (!p.members.empty()) {
        std::vector<double> v;
        for (auto i : p.members) v.push_back(response[i]);
        p.median = num::quantile(v, 0.5);
      }
      m.panels.push_back(std::move(p));
    }
  }
  return m;
}

Scene ccmap(const BaseMap& map, std::span<const int> codes, std::span<const double> response,
            std::span<const double> given_x, std::span<const double> given_y, const CcMapOptions& opt) {
  if (codes.size() != response.size()) throw std::invalid_argument("codes and response differ in length");
  const CcMapModel m = ccmap_model(response, given_x, given_y, opt);
  const double pw = 300, ph = 290, left = 60, top = 30, bar = 36;
  Scene scene;
  scene.width = left + opt.kx * pw + 150;
  scene.height = top + opt.ky * ph + bar + 30;
  scene.title = "Conditioned choropleth: " + opt.response_name + " | " + opt.x_name + ", " + opt.y_name;
  warn_unmapped(scene, map, codes);
  const ColorRGB black(0, 0, 0);
  const std::size_t n = response.size();

  for (const auto& p : m.panels) {
    const Frame f{left + p.ix * pw, top + p.row * ph, pw, ph};
    std::map<int, ColorRGB> fill;
    for (int c : codes) fill[c] = neutral_background();
    for (auto i : p.members) fill[codes[i]] = diverging_class_color(m.scale.classes[i]);
    const std::string prefix = "panel-" + std::to_string(p.row) + "-" + std::to_string(p.ix) + "/";
    draw_map(scene, map, MapProjection(map.bounds(), Frame{f.x + 2, f.y + 16, f.w - 4, f.h - 18}), fill, prefix + "map");
    std::string note = p.median ? "median " + format_value(*p.median) : std::string("median -");
    note += ", n = " + std::to_string(p.members.size());
    scene.add(prefix + "note", TextPrim{{f.x + 4, f.y + 12}, note, 9.0, TextAnchor::Start, black, std::nullopt});
    Style frame_style;
    frame_style.stroke = black;
    frame_style.stroke_width = 0.6;
    scene.add(prefix + "note", PolylinePrim{{{f.x, f.y}, {f.right(), f.y}, {f.right(), f.bottom()}, {f.x, f.bottom()}, {f.x, f.y}},
                                            frame_style, std::nullopt});
  }

  // Marginal bars: one per interval, length proportional to its share of the observations.
  const ColorRGB highlight = ColorRGB::from_hex("#F2C200");
  const ColorRGB idle(0.8, 0.8, 0.8);
  const double bottom = top + opt.ky * ph;
  for (int ix = 0; ix < opt.kx; ++ix) {
    const double x0 = left + ix * pw;
    for (int j = 0; j < opt.kx; ++j) {
      const double frac = static_cast<double>(m.x_shingles[static_cast<std::size_t>(j)].members.size()) / n;
      const double y = bottom + 4 + j * (bar / opt.kx);
      Style s;
      s.fill = j == ix ? highlight : idle;
      s.stroke = ColorRGB(0.4, 0.4, 0.4);
      s.stroke_width = 0.4;
      const double w = frac * (pw - 10), h = bar / opt.kx - 3;
      scene.add("margins", PolygonPrim{{{{x0 + 5, y}, {x0 + 5 + w, y}, {x0 + 5 + w, y + h}, {x0 + 5, y + h}, {x0 + 5, y}}}, s, std::nullopt});
    }
  }
  for (int row = 0; row < opt.ky; ++row) {
    const double y0 = top + row * ph;
    const int iy = opt.y_low_on_top ? row : opt.ky - 1 - row;
    for (int j = 0; j < opt.ky; ++j) {
      const int jy = opt.y_low_on_top ? j : opt.ky - 1 - j;
      const double frac = static_cast<double>(m.y_shingles[static_cast<std::size_t>(jy)].members.size()) / n;
      const double x = left - bar - 4 + j * (bar / opt.ky);
      Style s;
      s.fill = jy == iy ? highlight : idle;
      s.stroke = ColorRGB(0.4, 0.4, 0.4);
      s.stroke_width = 0.4;
      const double h = frac * (ph - 10), w = bar / opt.ky - 3;
      const double yb = y0 + ph - 5;
      scene.add("margins", PolygonPrim{{{{x, yb}, {x + w, yb}, {x + w, yb - h}, {x, yb - h}, {x, yb}}}, s, std::nullopt});
    }
  }
  scene.add("titles", TextPrim{{left + opt.kx * pw / 2, scene.height - 6}, opt.x_name + " (low to high)", 10.0,
                               TextAnchor::Middle, black, std::nullopt});
  scene.add("titles", TextPrim{{4, top - 10}, opt.y_name + (opt.y_low_on_top ? " (rank 1 at top)" : " (high at top)"),
                               10.0, TextAnchor::Start, black, std::nullopt});

  LegendPrim legend;
  legend.at = {left + opt.kx * pw + 10, top};
  legend.title = opt.response_name + " (crime rate)";
  const std::array<const char*, 8> pct = {"< 20%", "20-30%", "30-40%", "40-50%", "50-60%", "60-70%", "70-80%", "> 80%"};
  for (int c = 1; c <= 8; ++c) legend.entries.push_back({diverging_class_color(c), pct[static_cast<std::size_t>(c - 1)]});
  scene.add("legend", legend);
  return scene;
}

std::pair<Scene, Scene> fitted_residual_maps(const BaseMap& map, std::span<const int> codes,
                                             std::span<const std::string> names, const mv::RegressionFit& fit,
                                             const ResidualMapOptions& opt) {
  const auto n = codes.size();
  if (static_cast<std::size_t>(fit.fitted.size()) != n || static_cast<std::size_t>(fit.residuals.size()) != n ||
      names.size() != n)
    throw std::invalid_argument("fit, codes and names differ in length");
  std::vector<double> fitted(fit.fitted.data(), fit.fitted.data() + n);
  const auto t = minmax_normalize(fitted);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(fit.residuals[static_cast<Eigen::Index>(i)]));

  std::map<int, ColorRGB> ffill, rfill;
  for (std::size_t i = 0; i < n; ++i) {
    ffill[codes[i]] = sequential_color(t[i]);
    double u = scale > 0 ? fit.residuals[static_cast<Eigen::Index>(i)] / scale : 0.0;
    if (opt.positive_is_blue) u = -u;
    rfill[codes[i]] = diverging_continuous(u);
  }
  auto make = [&](const std::map<int, ColorRGB>& fill, const std::string& title) {
    Scene s;
    s.width = 520;
    s.height = 560;
    s.title = title;
    warn_unmapped(s, map, codes);
    const MapProjection proj(map.bounds(), Frame{0, 20, 520, 500});
    draw_map(s, map, proj, fill);
    s.add("titles", TextPrim{{260, 15}, title, 12.0, TextAnchor::Middle, ColorRGB(0, 0, 0), std::nullopt});
    return std::pair{std::move(s), proj};
  };
  auto [fs, fproj] = make(ffill, "Fitted " + opt.response_name);
  auto [rs, rproj] = make(rfill, "Residuals, " + opt.response_name);
  for (auto i : fit.outside) {
    if (const auto* f = map.find(codes[i])) {
      const Point at = rproj(label_point(*f));
      rs.add("labels", TextPrim{{at.x, at.y + 3}, names[i], 8.0, TextAnchor::Middle, ColorRGB(0, 0, 0), codes[i]});
    }
  }
  LegendPrim fl;
  fl.at = {10, 522};
  fl.entries = {{sequential_color(0), "low"}, {sequential_color(1), "high"}};
  fs.add("legend", fl);
  LegendPrim rl;
  rl.at = {10, 522};
  rl.entries = {{diverging_continuous(-1), opt.positive_is_blue ? "above fit" : "below fit"},
                {diverging_continuous(1), opt.positive_is_blue ? "below fit" : "above fit"}};
  rs.add("legend", rl);
  return {std::move(fs), std::move(rs)};
}

}  // namespace moralstat::viz
