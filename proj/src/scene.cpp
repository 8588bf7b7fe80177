#include "moralstat/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace moralstat::viz {

namespace {

double clamp01(double v) {
  if (std::isnan(v)) return 0.0;
  return std::clamp(v, 0.0, 1.0);
}

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  throw std::invalid_argument("bad hex digit");
}

}  // namespace

ColorRGB::ColorRGB(double r, double g, double b) : r_(clamp01(r)), g_(clamp01(g)), b_(clamp01(b)) {}

ColorRGB ColorRGB::from_hex(std::string_view hex) {
  if (hex.size() != 7 || hex[0] != '#') throw std::invalid_argument("colour must be #RRGGBB");
  auto byte = [&](int i) { return (hex_digit(hex[i]) * 16 + hex_digit(hex[i + 1])) / 255.0; };
  return {byte(1), byte(3), byte(5)};
}

std::string ColorRGB::hex() const {
  auto byte = [](double v) { return static_cast<int>(std::lround(v * 255.0)); };
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02X%02X%02X", byte(r_), byte(g_), byte(b_));
  return buf;
}

double ColorRGB::luminance() const { return 0.2126 * r_ + 0.7152 * g_ + 0.0722 * b_; }

double ColorRGB::hue() const {
  const double mx = std::max({r_, g_, b_});
  const double mn = std::min({r_, g_, b_});
  const double d = mx - mn;
  if (d <= 1e-12) return 0.0;
  double h;
  if (mx == r_)
    h = std::fmod((g_ - b_) / d, 6.0);
  else if (mx == g_)
    h = (b_ - r_) / d + 2.0;
  else
    h = (r_ - g_) / d + 4.0;
  h *= 60.0;
  if (h < 0) h += 360.0;
  return h;
}

ColorRGB lerp(const ColorRGB& a, const ColorRGB& b, double t) {
  t = clamp01(t);
  return {a.r() + (b.r() - a.r()) * t, a.g() + (b.g() - a.g()) * t, a.b() + (b.b() - a.b()) * t};
}

Layer& Scene::layer(std::string_view name) {
  for (auto& l : layers)
    if (l.name == name) return l;
  layers.push_back(Layer{std::string(name), {}});
  return layers.back();
}

const Layer* Scene::find_layer(std::string_view name) const {
  for (const auto& l : layers)
    if (l.name == name) return &l;
  return nullptr;
}

std::string format_fixed(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("non-finite coordinate in scene");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

}  // namespace moralstat::viz

namespace moralstat::viz {

namespace {

struct Shift {
  double dx, dy;
  Point at(const Point& p) const { return {p.x + dx, p.y + dy}; }
  void operator()(PolygonPrim& p) const {
    for (auto& r : p.rings)
      for (auto& q : r) q = at(q);
  }
  void operator()(PolylinePrim& p) const {
    for (auto& q : p.points) q = at(q);
  }
  void operator()(MarkerPrim& m) const { m.at = at(m.at); }
  void operator()(TextPrim& t) const { t.at = at(t.at); }
  void operator()(LegendPrim& l) const { l.at = at(l.at); }
};

}  // namespace

void append_scene(Scene& dst, const Scene& src, double dx, double dy, std::string_view prefix) {
  const Shift shift{dx, dy};
  for (const auto& layer : src.layers) {
    Layer& out = dst.layer(std::string(prefix) + layer.name);
    for (auto item : layer.items) {
      std::visit(shift, item);
      out.items.push_back(std::move(item));
    }
  }
  for (const auto& w : src.warnings)
    if (std::find(dst.warnings.begin(), dst.warnings.end(), w) == dst.warnings.end()) dst.warnings.push_back(w);
}

}  // namespace moralstat::viz
