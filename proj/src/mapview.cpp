#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "moralstat/geoviz.hpp"

namespace moralstat::viz {

double ring_area(const data::Ring& ring) {
  double a = 0.0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i)
    a += ring[i].x * ring[i + 1].y - ring[i + 1].x * ring[i].y;
  return a / 2.0;
}

Point ring_centroid(const data::Ring& ring) {
  const double a = ring_area(ring);
  if (std::abs(a) < 1e-15) {
    Point c;
    const std::size_t n = ring.size() > 1 ? ring.size() - 1 : ring.size();
    for (std::size_t i = 0; i < n; ++i) c.x += ring[i].x, c.y += ring[i].y;
    if (n) c.x /= n, c.y /= n;
    return c;
  }
  double cx = 0, cy = 0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const double cr = ring[i].x * ring[i + 1].y - ring[i + 1].x * ring[i].y;
    cx += (ring[i].x + ring[i + 1].x) * cr;
    cy += (ring[i].y + ring[i + 1].y) * cr;
  }
  return {cx / (6 * a), cy / (6 * a)};
}

bool point_in_ring(const Point& p, const data::Ring& ring) {
  bool inside = false;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const Point& a = ring[i];
    const Point& b = ring[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

bool point_in_feature(const Point& p, const MapFeature& f) {
  bool inside = false;
  for (const auto& r : f.rings)
    if (point_in_ring(p, r)) inside = !inside;
  return inside;
}

namespace {

std::optional<Point> scanline_point(const MapFeature& f, const data::Ring& ring) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& p : ring) lo = std::min(lo, p.y), hi = std::max(hi, p.y);
  std::optional<Point> best;
  double best_w = -1.0;
  for (double frac : {0.5, 0.4, 0.6, 0.3, 0.7, 0.2, 0.8}) {
    const double y = lo + (hi - lo) * frac;
    std::vector<double> xs;
    for (const auto& r : f.rings)
      for (std::size_t i = 0, j = r.size() - 1; i < r.size(); j = i++) {
        const Point& a = r[i];
        const Point& b = r[j];
        if ((a.y > y) != (b.y > y)) xs.push_back(a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x));
      }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      if (xs[k + 1] - xs[k] > best_w) {
        best_w = xs[k + 1] - xs[k];
        best = Point{(xs[k] + xs[k + 1]) / 2, y};
      }
    }
    if (best) return best;
  }
  return best;
}

}  // namespace

Point label_point(const MapFeature& f) {
  const data::Ring* largest = nullptr;
  double best = -1.0;
  for (const auto& r : f.rings) {
    const double a = std::abs(ring_area(r));
    if (a > best) best = a, largest = &r;
  }
  if (!largest || largest->empty()) return {};
  const Point c = ring_centroid(*largest);
  if (point_in_feature(c, f)) return c;

  // Nearest boundary point, then a small step along the edge normal into the polygon.
  double dmin = std::numeric_limits<double>::infinity();
  Point q, normal;
  const auto& r = *largest;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    const double ex = r[i + 1].x - r[i].x, ey = r[i + 1].y - r[i].y;
    const double len2 = ex * ex + ey * ey;
    if (len2 <= 0) continue;
    const double t = std::clamp(((c.x - r[i].x) * ex + (c.y - r[i].y) * ey) / len2, 0.0, 1.0);
    const Point p{r[i].x + t * ex, r[i].y + t * ey};
    const double d = std::hypot(c.x - p.x, c.y - p.y);
    if (d < dmin) {
      dmin = d, q = p;
      const double len = std::sqrt(len2);
      normal = {-ey / len, ex / len};
    }
  }
  const double step = 0.02 * std::sqrt(best);
  for (double sgn : {1.0, -1.0}) {
    const Point p{q.x + sgn * step * normal.x, q.y + sgn * step * normal.y};
    if (point_in_feature(p, f)) return p;
  }
  if (auto s = scanline_point(f, *largest)) return *s;
  return c;
}

void draw_map(Scene& scene, const BaseMap& map, const MapProjection& proj,
              const std::map<int, ColorRGB>& fill, std::string_view layer) {
  for (const auto& f : map.features()) {
    PolygonPrim poly;
    poly.feature = f.code;
    for (const auto& r : f.rings) {
      data::Ring out;
      out.reserve(r.size());
      for (const auto& p : r) out.push_back(proj(p));
      poly.rings.push_back(std::move(out));
    }
    if (auto it = fill.find(f.code); it != fill.end()) poly.style.fill = it->second;
    poly.style.stroke = ColorRGB(0.35, 0.35, 0.35);
    poly.style.stroke_width = 0.4;
    scene.add(layer, std::move(poly));
  }
}

void warn_unmapped(Scene& scene, const BaseMap& map, std::span<const int> codes) {
  std::set<int> sorted(codes.begin(), codes.end());
  for (int c : sorted)
    if (!map.find(c)) scene.warnings.push_back("code " + std::to_string(c) + " missing from base map");
}

RankShading rank_shading(std::span<const double> values, const ChoroplethOptions& opt) {
  RankShading out;
  out.ranks = num::rank_transform(values, opt.rank_one_is);
  const std::size_t n = values.size();
  std::vector<double> basis;
  if (opt.darker_is == DarkerIs::Worse)
    basis = num::rank_transform(values, opt.more_is_better ? RankOne::Lowest : RankOne::Highest);
  else
    basis = out.ranks;
  out.darkness.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.darkness[i] = n > 1 ? (static_cast<double>(n) - basis[i]) / static_cast<double>(n - 1) : 1.0;
  return out;
}

namespace {

std::string rank_text(double r) {
  char buf[32];
  if (std::abs(r - std::round(r)) < 1e-9)
    std::snprintf(buf, sizeof buf, "%d", static_cast<int>(std::lround(r)));
  else
    std::snprintf(buf, sizeof buf, "%.1f", r);
  return buf;
}

}  // namespace

void draw_rank_choropleth(Scene& scene, const Frame& frame, const BaseMap& map,
                          std::span<const int> codes, std::span<const double> values,
                          const ChoroplethOptions& opt, std::string_view prefix) {
  if (codes.size() != values.size()) throw std::invalid_argument("codes and values differ in length");
  const std::string p(prefix);
  warn_unmapped(scene, map, codes);
  const RankShading shade = rank_shading(values, opt);
  std::map<int, ColorRGB> fill;
  std::map<int, double> rank_of;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    fill[codes[i]] = sequential_color(shade.darkness[i]);
    rank_of[codes[i]] = shade.ranks[i];
  }
  const Frame map_frame{frame.x, frame.y + 18, frame.w, frame.h - 18};
  const MapProjection proj(map.bounds(), map_frame);
  if (!opt.title.empty())
    scene.add(p + "titles", TextPrim{{frame.x + frame.w / 2, frame.y + 13}, opt.title, 12.0,
                                     TextAnchor::Middle, ColorRGB(0, 0, 0), std::nullopt});
  draw_map(scene, map, proj, fill, p + "map");
  if (!opt.show_ranks) return;
  for (const auto& f : map.features()) {
    auto it = rank_of.find(f.code);
    if (it == rank_of.end()) continue;
    const auto d = fill.at(f.code);
    const ColorRGB ink = d.luminance() < 0.45 ? ColorRGB(1, 1, 1) : ColorRGB(0, 0, 0);
    Point at = proj(label_point(f));
    at.y += 2.5;
    scene.add(p + "ranks", TextPrim{at, rank_text(it->second), 6.5, TextAnchor::Middle, ink, f.code});
  }
}

Scene rank_choropleth(const BaseMap& map, std::span<const int> codes, std::span<const double> values,
                      const ChoroplethOptions& opt) {
  Scene scene;
  scene.width = 520;
  scene.height = 540;
  scene.title = opt.title;
  draw_rank_choropleth(scene, Frame{0, 0, 520, 500}, map, codes, values, opt);
  LegendPrim legend;
  legend.at = {10, 505};
  legend.entries = {{sequential_color(0.0), opt.darker_is == DarkerIs::Worse ? "best" : "rank n"},
                    {sequential_color(1.0), opt.darker_is == DarkerIs::Worse ? "worst" : "rank 1"}};
  scene.add("legend", legend);
  return scene;
}

}  // namespace moralstat::viz
