#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "moralstat/geoviz.hpp"

namespace moralstat::viz {

ColorRGB sequential_color(double t) {
  static const ColorRGB light = ColorRGB::from_hex(kRampLight);
  static const ColorRGB dark = ColorRGB::from_hex(kRampDark);
  return lerp(light, dark, t);
}

ColorRGB diverging_class_color(int cls) {
  if (cls < 1 || cls > 8) throw std::invalid_argument("diverging class must be in 1..8");
  return ColorRGB::from_hex(kDivergingHex[static_cast<std::size_t>(cls - 1)]);
}

ColorRGB diverging_continuous(double t) {
  static const std::array<ColorRGB, 9> stops = {
      ColorRGB::from_hex(kDivergingHex[0]), ColorRGB::from_hex(kDivergingHex[1]),
      ColorRGB::from_hex(kDivergingHex[2]), ColorRGB::from_hex(kDivergingHex[3]),
      ColorRGB::from_hex(kNeutralHex),      ColorRGB::from_hex(kDivergingHex[4]),
      ColorRGB::from_hex(kDivergingHex[5]), ColorRGB::from_hex(kDivergingHex[6]),
      ColorRGB::from_hex(kDivergingHex[7])};
  if (std::isnan(t)) t = 0.0;
  t = std::clamp(t, -1.0, 1.0);
  const double pos = (t + 1.0) * 4.0;
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(pos), 7);
  return lerp(stops[i], stops[i + 1], pos - static_cast<double>(i));
}

ColorRGB neutral_background() { return ColorRGB::from_hex(kBackgroundHex); }

MapProjection::MapProjection(const Bounds& bounds, const Frame& frame, double pad) : bounds_(bounds) {
  const double bw = std::max(bounds.width(), 1e-12);
  const double bh = std::max(bounds.height(), 1e-12);
  const double aw = std::max(frame.w - 2 * pad, 1e-9);
  const double ah = std::max(frame.h - 2 * pad, 1e-9);
  scale_ = std::min(aw / bw, ah / bh);
  ox_ = frame.x + (frame.w - bw * scale_) / 2.0;
  oy_ = frame.y + (frame.h - bh * scale_) / 2.0;
}

Point MapProjection::operator()(const Point& p) const {
  return {ox_ + (p.x - bounds_.min_x) * scale_, oy_ + (bounds_.max_y - p.y) * scale_};
}

Point PlotArea::to_device(double x, double y) const {
  return {frame.x + (x - xmin) * sx(), frame.y + (ymax - y) * sy()};
}

PlotArea fit_plot_area(const Frame& frame, double xmin, double xmax, double ymin, double ymax,
                       double pad, bool equal) {
  auto widen = [](double& lo, double& hi) {
    if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) {
      lo -= 0.5;
      hi += 0.5;
    }
  };
  widen(xmin, xmax);
  widen(ymin, ymax);
  double dx = (xmax - xmin) * pad, dy = (ymax - ymin) * pad;
  xmin -= dx, xmax += dx, ymin -= dy, ymax += dy;
  if (equal) {
    const double s = std::min(frame.w / (xmax - xmin), frame.h / (ymax - ymin));
    const double cx = (xmin + xmax) / 2, cy = (ymin + ymax) / 2;
    const double hw = frame.w / s / 2, hh = frame.h / s / 2;
    xmin = cx - hw, xmax = cx + hw, ymin = cy - hh, ymax = cy + hh;
  }
  return PlotArea{frame, xmin, xmax, ymin, ymax};
}

std::vector<double> nice_ticks(double lo, double hi, int target) {
  std::vector<double> out;
  if (!(hi > lo) || target < 1) return out;
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  const double first = std::ceil(lo / step - 1e-9);
  for (double k = first; k * step <= hi + 1e-9 * step; k += 1.0) {
    double v = k * step;
    if (std::abs(v) < step * 1e-9) v = 0.0;
    out.push_back(v);
  }
  return out;
}

namespace {

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

void draw_axes(Scene& scene, const PlotArea& area, const std::string& x_label,
               const std::string& y_label, std::string_view layer) {
  const Frame& f = area.frame;
  Style frame_style;
  frame_style.stroke = ColorRGB(0, 0, 0);
  frame_style.stroke_width = 0.8;
  scene.add(layer, PolylinePrim{{{f.x, f.y}, {f.right(), f.y}, {f.right(), f.bottom()}, {f.x, f.bottom()}, {f.x, f.y}},
                                frame_style, std::nullopt});
  Style tick_style = frame_style;
  tick_style.stroke_width = 0.6;
  const ColorRGB black(0, 0, 0);
  for (double t : nice_ticks(area.xmin, area.xmax)) {
    const double x = area.to_device(t, area.ymin).x;
    scene.add(layer, PolylinePrim{{{x, f.bottom()}, {x, f.bottom() + 4}}, tick_style, std::nullopt});
    scene.add(layer, TextPrim{{x, f.bottom() + 13}, tick_label(t), 8.0, TextAnchor::Middle, black, std::nullopt});
  }
  for (double t : nice_ticks(area.ymin, area.ymax)) {
    const double y = area.to_device(area.xmin, t).y;
    scene.add(layer, PolylinePrim{{{f.x - 4, y}, {f.x, y}}, tick_style, std::nullopt});
    scene.add(layer, TextPrim{{f.x - 6, y + 3}, tick_label(t), 8.0, TextAnchor::End, black, std::nullopt});
  }
  if (!x_label.empty())
    scene.add(layer, TextPrim{{f.x + f.w / 2, f.bottom() + 26}, x_label, 10.0, TextAnchor::Middle, black, std::nullopt});
  if (!y_label.empty())
    scene.add(layer, TextPrim{{f.x, f.y - 6}, y_label, 10.0, TextAnchor::Start, black, std::nullopt});
}

}  // namespace moralstat::viz
