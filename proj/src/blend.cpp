#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "moralstat/geoviz.hpp"

namespace moralstat::viz {

std::vector<double> minmax_normalize(std::span<const double> values) {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  if (range <= 0) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - *lo) / range;
  return out;
}

ColorRGB rgb_blend(double x1, double x2, double x3, std::array<int, 3> channel_of) {
  std::array<double, 3> ch{0, 0, 0};
  std::array<bool, 3> used{false, false, false};
  const std::array<double, 3> xs{x1, x2, x3};
  for (int i = 0; i < 3; ++i) {
    const int c = channel_of[static_cast<std::size_t>(i)];
    if (c < 0 || c > 2 || used[static_cast<std::size_t>(c)]) throw std::invalid_argument("channel mapping must be a permutation of 0, 1, 2");
    used[static_cast<std::size_t>(c)] = true;
    ch[static_cast<std::size_t>(c)] = xs[static_cast<std::size_t>(i)];
  }
  return {ch[0], ch[1], ch[2]};
}

ColorRGB trilinear_color(double a, double b, double c) {
  const double s = a + b + c;
  if (!(s > 0)) return {0, 0, 0};
  return {a / s, b / s, c / s};
}

std::vector<TrilinearCell> trilinear_cells() {
  std::vector<TrilinearCell> cells;
  const int N = kTrilinearSteps;
  for (int i = N; i >= 0; --i)
    for (int j = N - i; j >= 0; --j) {
      const int k = N - i - j;
      cells.push_back({{i, j, k}, trilinear_color(i, j, k)});
    }
  return cells;
}

void draw_trilinear_legend(Scene& scene, const Frame& frame, const std::array<std::string, 3>& names) {
  // Red apex on top, green bottom-left, blue bottom-right.
  const double side = std::min(frame.w, frame.h * 2 / std::sqrt(3.0)) * 0.8;
  const double h = side * std::sqrt(3.0) / 2;
  const Point top{frame.x + frame.w / 2, frame.y + (frame.h - h) / 2};
  const Point left{top.x - side / 2, top.y + h};
  const Point right{top.x + side / 2, top.y + h};
  const double N = kTrilinearSteps;
  const double cell = side / N;
  for (const auto& c : trilinear_cells()) {
    const Point p{(c.weights[0] * top.x + c.weights[1] * left.x + c.weights[2] * right.x) / N,
                  (c.weights[0] * top.y + c.weights[1] * left.y + c.weights[2] * right.y) / N};
    Style s;
    s.fill = c.color;
    const double r = cell * 0.62;
    data::Ring tri{{p.x, p.y - r}, {p.x - r * 0.866, p.y + r / 2}, {p.x + r * 0.866, p.y + r / 2}, {p.x, p.y - r}};
    scene.add("trilinear", PolygonPrim{{tri}, s, std::nullopt});
  }
  const ColorRGB black(0, 0, 0);
  scene.add("trilinear", TextPrim{{top.x, top.y - 6}, names[0], 9.0, TextAnchor::Middle, black, std::nullopt});
  scene.add("trilinear", TextPrim{{left.x, left.y + 14}, names[1], 9.0, TextAnchor::Middle, black, std::nullopt});
  scene.add("trilinear", TextPrim{{right.x, right.y + 14}, names[2], 9.0, TextAnchor::Middle, black, std::nullopt});
}

Scene trilinear_legend(const std::array<std::string, 3>& names) {
  Scene scene;
  scene.width = 240;
  scene.height = 220;
  scene.title = "Trilinear colour legend";
  draw_trilinear_legend(scene, Frame{10, 10, 220, 200}, names);
  return scene;
}

Scene rgb_map(const BaseMap& map, std::span<const int> codes, const Eigen::MatrixXd& channels,
              const std::array<std::string, 3>& names, std::span<const int> annotate, const std::string& title) {
  if (channels.rows() != static_cast<Eigen::Index>(codes.size()) || channels.cols() != 3)
    throw std::invalid_argument("rgb map needs one row of 3 channels per code");
  Scene scene;
  scene.width = 760;
  scene.height = 600;
  scene.title = title;
  warn_unmapped(scene, map, codes);
  std::map<int, ColorRGB> fill;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    fill[codes[i]] = rgb_blend(channels(r, 0), channels(r, 1), channels(r, 2));
  }
  const MapProjection proj(map.bounds(), Frame{0, 20, 560, 580});
  draw_map(scene, map, proj, fill);
  for (int c : annotate) {
    if (const auto* f = map.find(c)) {
      const Point at = proj(label_point(*f));
      Style ring;
      ring.stroke = ColorRGB(1, 1, 1);
      ring.stroke_width = 1.2;
      scene.add("annotations", MarkerPrim{at, 9.0, MarkerShape::Circle, ring, c});
      scene.add("annotations", TextPrim{{at.x, at.y + 3}, std::to_string(c), 8.0, TextAnchor::Middle, ColorRGB(1, 1, 1), c});
    }
  }
  if (!title.empty())
    scene.add("titles", TextPrim{{280, 15}, title, 12.0, TextAnchor::Middle, ColorRGB(0, 0, 0), std::nullopt});
  draw_trilinear_legend(scene, Frame{560, 200, 200, 200}, names);
  return scene;
}

Scene factor_rgb_map(const BaseMap& map, std::span<const int> codes, const Eigen::MatrixXd& scores,
                     std::span<const int> outliers, const std::array<std::string, 3>& names) {
  if (scores.cols() != 3) throw std::invalid_argument("factor map needs three score columns");
  Eigen::MatrixXd norm(scores.rows(), 3);
  for (Eigen::Index j = 0; j < 3; ++j) {
    std::vector<double> col(scores.col(j).data(), scores.col(j).data() + scores.rows());
    const auto n = minmax_normalize(col);
    for (Eigen::Index i = 0; i < scores.rows(); ++i) norm(i, j) = n[static_cast<std::size_t>(i)];
  }
  return rgb_map(map, codes, norm, names, outliers, "Factor scores as RGB");
}

}  // namespace moralstat::viz
