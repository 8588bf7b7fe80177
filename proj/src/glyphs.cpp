#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "moralstat/geoviz.hpp"

namespace moralstat::viz {

std::vector<std::size_t> effect_order(const Eigen::MatrixXd& vectors, std::span<const std::string> names) {
  if (vectors.rows() < 1 || vectors.cols() < 2) throw std::invalid_argument("effect order needs variable vectors");
  const auto p = static_cast<std::size_t>(vectors.rows());
  std::vector<double> angle(p);
  for (std::size_t i = 0; i < p; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    double a = std::atan2(vectors(r, 1), vectors(r, 0));
    if (a < 0) a += 2 * std::numbers::pi;
    angle[i] = a;
  }
  std::vector<std::size_t> idx(p);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (angle[a] != angle[b]) return angle[a] < angle[b];
    if (!names.empty()) return names[a] < names[b];
    return a < b;
  });
  return idx;
}

GlyphSpec star_glyph(std::span<const double> fractions, std::span<const std::size_t> order) {
  if (fractions.empty()) throw std::invalid_argument("star glyph needs at least one variable");
  if (order.size() != fractions.size()) throw std::invalid_argument("glyph order length differs from values");
  std::vector<bool> seen(order.size(), false);
  for (auto o : order) {
    if (o >= order.size() || seen[o]) throw std::invalid_argument("glyph order is not a permutation");
    seen[o] = true;
  }
  GlyphSpec g;
  for (double f : fractions) g.ray_fractions.push_back(std::clamp(f, 0.0, 1.0));
  g.angular_order.assign(order.begin(), order.end());
  return g;
}

double ray_angle(std::size_t k, std::size_t p) {
  return std::numbers::pi / 2 + 2 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(p);
}

data::Ring star_polygon(const GlyphSpec& g, const Point& center, double radius) {
  const std::size_t p = g.angular_order.size();
  data::Ring ring;
  ring.reserve(p + 1);
  for (std::size_t k = 0; k < p; ++k) {
    const double len = radius * std::max(g.ray_fractions[g.angular_order[k]], kMinRay);
    const double t = ray_angle(k, p);
    ring.push_back({center.x + len * std::cos(t), center.y + len * std::sin(t)});
  }
  ring.push_back(ring.front());
  return ring;
}

data::Ring star_polygon_device(const GlyphSpec& g, const Point& center, double radius) {
  data::Ring ring = star_polygon(g, {0, 0}, radius);
  for (auto& q : ring) q = {center.x + q.x, center.y - q.y};
  return ring;
}

StarMapModel star_map_model(const data::MoralDataset& ds, std::span<const std::string> variables,
                            std::span<const std::size_t> order, ColorEncode color) {
  const std::size_t n = ds.size(), p = variables.size();
  if (p == 0) throw std::invalid_argument("star map needs at least one variable");
  StarMapModel m;
  m.variables.assign(variables.begin(), variables.end());
  m.order.assign(order.begin(), order.end());
  m.codes = ds.codes();
  m.fractions.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  Eigen::MatrixXd ranks(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t v = 0; v < p; ++v) {
    const auto meta = data::describe_variable(variables[v]);
    const auto r = num::rank_transform(ds.column(variables[v]), meta.more_is_better ? RankOne::Highest : RankOne::Lowest);
    for (std::size_t i = 0; i < n; ++i) {
      ranks(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(v)) = r[i];
      m.fractions(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(v)) =
          (static_cast<double>(n) - r[i] + 1.0) / static_cast<double>(n);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(p);
    for (std::size_t v = 0; v < p; ++v) row[v] = ranks(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(v));
    m.mean_rank.push_back(num::mean(row));
    m.sd_rank.push_back(p > 1 ? num::sample_sd(row) : 0.0);
  }
  if (color != ColorEncode::None && n >= 4) {
    const auto& stat = color == ColorEncode::MeanRank ? m.mean_rank : m.sd_rank;
    for (auto i : num::boxplot_outside(stat)) m.annotated.push_back(m.codes[i]);
    std::sort(m.annotated.begin(), m.annotated.end());
  }
  const auto regions = ds.regions();
  for (auto reg : data::kAllRegions) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; ++i)
      if (regions[i] == reg) rows.push_back(i);
    if (rows.empty()) continue;
    RegionGlyphs g;
    g.region = reg;
    g.members = rows.size();
    g.median_only = rows.size() < 4;
    for (std::size_t v = 0; v < p; ++v) {
      std::vector<double> col;
      for (auto i : rows) col.push_back(m.fractions(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(v)));
      const double med = num::quantile(col, 0.5);
      g.median.push_back(med);
      g.lower.push_back(g.median_only ? med : num::quantile(col, 0.25));
      g.upper.push_back(g.median_only ? med : num::quantile(col, 0.75));
    }
    m.regions.push_back(std::move(g));
  }
  return m;
}

namespace {

void draw_key(Scene& scene, const Point& at, double radius, std::span<const std::string> variables,
              std::span<const std::size_t> order) {
  const std::vector<double> ones(variables.size(), 1.0);
  GlyphSpec g = star_glyph(ones, order);
  Style s;
  s.stroke = ColorRGB(0, 0, 0);
  s.stroke_width = 0.6;
  scene.add("key", PolygonPrim{{star_polygon_device(g, at, radius)}, s, std::nullopt});
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double t = ray_angle(k, order.size());
    const Point end{at.x + (radius + 4) * std::cos(t), at.y - (radius + 4) * std::sin(t)};
    const TextAnchor anchor = std::cos(t) > 0.3 ? TextAnchor::Start : std::cos(t) < -0.3 ? TextAnchor::End : TextAnchor::Middle;
    scene.add("key", PolylinePrim{{at, {at.x + radius * std::cos(t), at.y - radius * std::sin(t)}}, s, std::nullopt});
    scene.add("key", TextPrim{{end.x, end.y + 3}, variables[order[k]], 8.0, anchor, ColorRGB(0, 0, 0), std::nullopt});
  }
}

}  // namespace

Scene star_map(const BaseMap& map, const data::MoralDataset& ds, std::span<const std::string> variables,
               std::span<const std::size_t> order, GlyphEncoding encoding, ColorEncode color) {
  const StarMapModel m = star_map_model(ds, variables, order, color);
  Scene scene;
  scene.width = 620;
  scene.height = 600;
  scene.title = encoding == GlyphEncoding::Individual ? "Star map" : "Region quartile star map";
  const auto codes = ds.codes();
  warn_unmapped(scene, map, codes);
  const MapProjection proj(map.bounds(), Frame{0, 20, 620, 580});

  std::map<int, ColorRGB> fill;
  if (color != ColorEncode::None) {
    const auto& stat = color == ColorEncode::MeanRank ? m.mean_rank : m.sd_rank;
    const auto norm = minmax_normalize(stat);
    for (std::size_t i = 0; i < codes.size(); ++i) fill[codes[i]] = sequential_color(0.85 * norm[i]);
  } else {
    for (int c : codes) fill[c] = ColorRGB(1, 1, 1);
  }
  draw_map(scene, map, proj, fill);

  Style glyph_style;
  glyph_style.fill = ColorRGB::from_hex("#F4A582");
  glyph_style.stroke = ColorRGB(0.1, 0.1, 0.1);
  glyph_style.stroke_width = 0.4;

  if (encoding == GlyphEncoding::Individual) {
    for (std::size_t i = 0; i < codes.size(); ++i) {
      const auto* f = map.find(codes[i]);
      if (!f) continue;
      std::vector<double> row(variables.size());
      for (std::size_t v = 0; v < row.size(); ++v) row[v] = m.fractions(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(v));
      const GlyphSpec g = star_glyph(row, order);
      scene.add("glyphs", PolygonPrim{{star_polygon_device(g, proj(label_point(*f)), 11.0)}, glyph_style, codes[i]});
    }
  } else {
    const auto regions = ds.regions();
    for (const auto& rg : m.regions) {
      Point at{0, 0};
      std::size_t k = 0;
      for (std::size_t i = 0; i < codes.size(); ++i) {
        if (regions[i] != rg.region) continue;
        if (const auto* f = map.find(codes[i])) {
          const Point q = proj(label_point(*f));
          at.x += q.x, at.y += q.y, ++k;
        }
      }
      if (k == 0) continue;
      at.x /= k, at.y /= k;
      const double radius = rg.median_only ? 14.0 : 34.0;
      Style upper, median = glyph_style, lower;
      upper.fill = ColorRGB(0.6, 0.6, 0.6);
      upper.stroke = ColorRGB(0.3, 0.3, 0.3);
      upper.stroke_width = 0.5;
      lower.fill = ColorRGB(1, 1, 1);
      lower.stroke = ColorRGB(0.3, 0.3, 0.3);
      lower.stroke_width = 0.5;
      if (!rg.median_only)
        scene.add("glyphs", PolygonPrim{{star_polygon_device(star_glyph(rg.upper, order), at, radius)}, upper, std::nullopt});
      scene.add("glyphs", PolygonPrim{{star_polygon_device(star_glyph(rg.median, order), at, radius)}, median, std::nullopt});
      if (!rg.median_only)
        scene.add("glyphs", PolygonPrim{{star_polygon_device(star_glyph(rg.lower, order), at, radius)}, lower, std::nullopt});
      scene.add("glyphs", TextPrim{{at.x, at.y + radius + 10}, std::string(data::region_name(rg.region)), 9.0,
                                   TextAnchor::Middle, ColorRGB(0, 0, 0), std::nullopt});
    }
  }

  for (int c : m.annotated) {
    if (const auto* f = map.find(c)) {
      Point at = proj(label_point(*f));
      scene.add("annotations", TextPrim{{at.x, at.y + 3}, std::to_string(c), 8.0, TextAnchor::Middle,
                                        ColorRGB::from_hex("#B2182B"), c});
    }
  }
  draw_key(scene, {70, 80}, 28.0, variables, order);
  return scene;
}

}  // namespace moralstat::viz
