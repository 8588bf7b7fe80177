#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "moralstat/error.hpp"
#include "moralstat/geoviz.hpp"

namespace moralstat::viz {

namespace {

const std::array<const char*, 6> kGroupHex = {"#1B9E77", "#D95F02", "#7570B3",
                                              "#E7298A", "#66A61E", "#A6761D"};

ColorRGB group_color(std::size_t i) { return ColorRGB::from_hex(kGroupHex[i % kGroupHex.size()]); }

void include_range(double& lo, double& hi, double v) {
  lo = std::min(lo, v);
  hi = std::max(hi, v);
}

}  // namespace

ScatterModel scatter_model(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                           std::span<const std::string> groups, const ScatterOptions& opt) {
  if (x.size() != y.size()) throw std::invalid_argument("x and y differ in length");
  if (!groups.empty() && groups.size() != static_cast<std::size_t>(x.size()))
    throw std::invalid_argument("groups differ in length from x");
  const auto n = static_cast<std::size_t>(x.size());
  ScatterModel m;
  m.points.resize(x.size(), 2);
  m.points.col(0) = x;
  m.points.col(1) = y;

  if (n >= 3)
    for (double level : opt.pooled_levels) m.pooled.push_back(num::data_ellipse(m.points, level));

  if (!groups.empty()) {
    std::set<std::string> labels(groups.begin(), groups.end());
    for (const auto& g : labels) {
      std::vector<Eigen::Index> rows;
      for (std::size_t i = 0; i < n; ++i)
        if (groups[i] == g) rows.push_back(static_cast<Eigen::Index>(i));
      GroupSummary s;
      s.label = g;
      s.n = rows.size();
      Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows.size()), 2);
      for (std::size_t k = 0; k < rows.size(); ++k) sub.row(static_cast<Eigen::Index>(k)) = m.points.row(rows[k]);
      s.mean = sub.colwise().mean().transpose();
      if (s.n >= 2) {
        const Eigen::Matrix2d S = num::covariance(sub);
        s.se = Eigen::Vector2d(std::sqrt(S(0, 0) / s.n), std::sqrt(S(1, 1) / s.n));
      }
      if (opt.group_ellipses && s.n >= 3) s.ellipse = num::data_ellipse(sub, opt.group_level);
      m.groups.push_back(std::move(s));
    }
  }

  if (opt.smooth && n >= 4) {
    const num::LoessFit fit = num::loess(x, y, opt.span, 1);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return x[static_cast<Eigen::Index>(a)] < x[static_cast<Eigen::Index>(b)];
    });
    for (auto i : idx) m.smooth.push_back({x[static_cast<Eigen::Index>(i)], fit.fitted[static_cast<Eigen::Index>(i)]});
  }

  if (opt.label_coverage && n >= 3) {
    m.flagged = num::outside_ellipse(m.points, *opt.label_coverage);
    if (!m.flagged.empty() && !m.pooled.empty() && !m.pooled.front().degenerate) {
      const Eigen::VectorXd d2 = num::mahalanobis_all(m.points);
      std::stable_sort(m.flagged.begin(), m.flagged.end(), [&](std::size_t a, std::size_t b) {
        return d2[static_cast<Eigen::Index>(a)] > d2[static_cast<Eigen::Index>(b)];
      });
    }
  }
  return m;
}

PlotArea draw_scatter(Scene& scene, const Frame& frame, const ScatterModel& model,
                      std::span<const std::string> labels, std::span<const std::string> short_labels,
                      const ScatterOptions& opt, std::string_view prefix) {
  const std::string p(prefix);
  const auto n = static_cast<std::size_t>(model.points.rows());
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (std::size_t i = 0; i < n; ++i) {
    include_range(xlo, xhi, model.points(static_cast<Eigen::Index>(i), 0));
    include_range(ylo, yhi, model.points(static_cast<Eigen::Index>(i), 1));
  }
  auto include_ellipse = [&](const num::EllipseGeom& e) {
    const double ex = e.extent(Eigen::Vector2d(1, 0)), ey = e.extent(Eigen::Vector2d(0, 1));
    include_range(xlo, xhi, e.center.x() - ex);
    include_range(xlo, xhi, e.center.x() + ex);
    include_range(ylo, yhi, e.center.y() - ey);
    include_range(ylo, yhi, e.center.y() + ey);
  };
  for (const auto& e : model.pooled) include_ellipse(e);
  for (const auto& g : model.groups)
    if (g.ellipse) include_ellipse(*g.ellipse);
  if (n == 0) xlo = ylo = 0, xhi = yhi = 1;
  const PlotArea area = fit_plot_area(frame, xlo, xhi, ylo, yhi);

  auto polyline = [&](const std::vector<Point>& pts) {
    std::vector<Point> out;
    out.reserve(pts.size() + 1);
    for (const auto& q : pts) out.push_back(area.to_device(q.x, q.y));
    return out;
  };
  auto ellipse_prim = [&](const num::EllipseGeom& e, ColorRGB c, double width) {
    Style s;
    s.stroke = c;
    s.stroke_width = width;
    if (e.degenerate) {
      const auto [a, b] = e.major_axis();
      return PolylinePrim{polyline({a, b}), s, std::nullopt};
    }
    auto pts = e.boundary();
    pts.push_back(pts.front());
    return PolylinePrim{polyline(pts), s, std::nullopt};
  };

  for (const auto& e : model.pooled) scene.add(p + "ellipses", ellipse_prim(e, ColorRGB(0.1, 0.1, 0.1), 1.2));
  for (std::size_t g = 0; g < model.groups.size(); ++g)
    if (model.groups[g].ellipse) scene.add(p + "ellipses", ellipse_prim(*model.groups[g].ellipse, group_color(g), 1.2));

  if (!model.smooth.empty()) {
    Style s;
    s.stroke = ColorRGB::from_hex("#C0392B");
    s.stroke_width = 1.8;
    scene.add(p + "smooth", PolylinePrim{polyline(model.smooth), s, std::nullopt});
  }

  std::map<std::string, std::size_t> group_index;
  for (std::size_t g = 0; g < model.groups.size(); ++g) group_index[model.groups[g].label] = g;

  std::vector<Point> device(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    device[i] = area.to_device(model.points(r, 0), model.points(r, 1));
  }
  LabelOptions lopt;
  lopt.marker_radius = opt.axes ? 2.5 : 1.2;
  for (std::size_t i = 0; i < n; ++i) {
    Style s;
    s.fill = ColorRGB(0.55, 0.55, 0.55);
    s.stroke = ColorRGB(0.2, 0.2, 0.2);
    s.stroke_width = 0.4;
    scene.add(p + "points", MarkerPrim{device[i], lopt.marker_radius, MarkerShape::Circle, s, std::nullopt});
  }

  if (opt.group_crosses) {
    for (std::size_t g = 0; g < model.groups.size(); ++g) {
      const auto& gs = model.groups[g];
      Style s;
      s.stroke = group_color(g);
      s.stroke_width = 2.0;
      scene.add(p + "crosses", PolylinePrim{{area.to_device(gs.mean.x() - gs.se.x(), gs.mean.y()),
                                             area.to_device(gs.mean.x() + gs.se.x(), gs.mean.y())},
                                            s, std::nullopt});
      scene.add(p + "crosses", PolylinePrim{{area.to_device(gs.mean.x(), gs.mean.y() - gs.se.y()),
                                             area.to_device(gs.mean.x(), gs.mean.y() + gs.se.y())},
                                            s, std::nullopt});
      const Point c = area.to_device(gs.mean.x(), gs.mean.y());
      scene.add(p + "crosses", TextPrim{{c.x + 3, c.y - 3}, gs.label, 9.0, TextAnchor::Start, group_color(g), std::nullopt});
    }
  }

  if (!model.flagged.empty() && !labels.empty()) {
    std::vector<LabelRequest> req;
    for (auto i : model.flagged)
      req.push_back({i, labels[i], short_labels.empty() ? std::string() : short_labels[i]});
    const auto placed = place_labels(device, req, lopt);
    draw_labels(scene, placed, lopt, p + "labels");
  }

  if (opt.axes) draw_axes(scene, area, opt.x_label, opt.y_label, p + "axes");
  return area;
}

Scene scatter_overlay(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      std::span<const std::string> groups, std::span<const std::string> labels,
                      const ScatterOptions& opt) {
  Scene scene;
  scene.width = 560;
  scene.height = 520;
  scene.title = opt.title;
  const ScatterModel m = scatter_model(x, y, groups, opt);
  draw_scatter(scene, Frame{60, 30, 480, 440}, m, labels, {}, opt);
  return scene;
}

Scene scatterplot_matrix(const data::MoralDataset& ds, std::span<const std::string> variables,
                         double span) {
  const std::size_t p = variables.size();
  if (p < 2) throw std::invalid_argument("scatterplot matrix needs at least 2 variables");
  const double cell = 150, gap = 6, margin = 10;
  Scene scene;
  scene.width = scene.height = 2 * margin + p * cell + (p - 1) * gap;
  scene.title = "Scatterplot matrix";
  ScatterOptions opt;
  opt.axes = false;
  opt.label_coverage.reset();
  opt.span = span;
  Style frame_style;
  frame_style.stroke = ColorRGB(0, 0, 0);
  frame_style.stroke_width = 0.6;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const Frame f{margin + j * (cell + gap), margin + i * (cell + gap), cell, cell};
      scene.add("panels", PolylinePrim{{{f.x, f.y}, {f.right(), f.y}, {f.right(), f.bottom()}, {f.x, f.bottom()}, {f.x, f.y}},
                                       frame_style, std::nullopt});
      if (i == j) {
        scene.add("diagonal", TextPrim{{f.x + cell / 2, f.y + cell / 2 + 4}, variables[i], 12.0,
                                       TextAnchor::Middle, ColorRGB(0, 0, 0), std::nullopt});
        continue;
      }
      const ScatterModel m = scatter_model(ds.column(variables[j]), ds.column(variables[i]), {}, opt);
      draw_scatter(scene, Frame{f.x + 4, f.y + 4, f.w - 8, f.h - 8}, m, {}, {}, opt);
    }
  }
  return scene;
}

std::vector<Segment> parallel_segments(std::span<const double> rank_a, std::span<const double> rank_b,
                                       const Frame& frame) {
  if (rank_a.size() != rank_b.size()) throw std::invalid_argument("rank vectors differ in length");
  const std::size_t n = rank_a.size();
  auto ypos = [&](double r) {
    return n > 1 ? frame.y + (r - 1.0) / static_cast<double>(n - 1) * frame.h : frame.y + frame.h / 2;
  };
  std::vector<Segment> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back({{frame.x, ypos(rank_a[i])}, {frame.right(), ypos(rank_b[i])}});
  return out;
}

std::size_t count_crossings(std::span<const Segment> segments) {
  auto orient = [](const Point& a, const Point& b, const Point& c) {
    const double v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    return (v > 1e-12) - (v < -1e-12);
  };
  std::size_t count = 0;
  for (std::size_t i = 0; i < segments.size(); ++i)
    for (std::size_t j = i + 1; j < segments.size(); ++j) {
      const auto& s = segments[i];
      const auto& t = segments[j];
      const int o1 = orient(s.a, s.b, t.a), o2 = orient(s.a, s.b, t.b);
      const int o3 = orient(t.a, t.b, s.a), o4 = orient(t.a, t.b, s.b);
      if (o1 * o2 < 0 && o3 * o4 < 0) ++count;
    }
  return count;
}

void draw_parallel_ranks(Scene& scene, const Frame& frame, std::span<const double> rank_a,
                         std::span<const double> rank_b, std::span<const std::string> names,
                         const std::string& label_a, const std::string& label_b) {
  const auto segs = parallel_segments(rank_a, rank_b, frame);
  const ColorRGB black(0, 0, 0);
  Style axis;
  axis.stroke = black;
  axis.stroke_width = 1.2;
  scene.add("parallel-axes", PolylinePrim{{{frame.x, frame.y}, {frame.x, frame.bottom()}}, axis, std::nullopt});
  scene.add("parallel-axes", PolylinePrim{{{frame.right(), frame.y}, {frame.right(), frame.bottom()}}, axis, std::nullopt});
  scene.add("parallel-axes", TextPrim{{frame.x, frame.y - 8}, label_a, 10.0, TextAnchor::Middle, black, std::nullopt});
  scene.add("parallel-axes", TextPrim{{frame.right(), frame.y - 8}, label_b, 10.0, TextAnchor::Middle, black, std::nullopt});
  const std::size_t n = segs.size();
  for (std::size_t i = 0; i < n; ++i) {
    // Shade by mean rank.
    const double t = n > 1 ? ((rank_a[i] + rank_b[i]) / 2 - 1) / static_cast<double>(n - 1) : 0.5;
    Style s;
    s.stroke = lerp(ColorRGB::from_hex("#2166AC"), ColorRGB::from_hex("#B2182B"), t);
    s.stroke_width = 0.7;
    scene.add("links", PolylinePrim{{segs[i].a, segs[i].b}, s, std::nullopt});
  }
  if (!names.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      scene.add("link-labels", TextPrim{{segs[i].a.x - 3, segs[i].a.y + 2}, names[i], 4.5, TextAnchor::End, black, std::nullopt});
      scene.add("link-labels", TextPrim{{segs[i].b.x + 3, segs[i].b.y + 2}, names[i], 4.5, TextAnchor::Start, black, std::nullopt});
    }
  }
}

Scene parallel_ranks(const std::map<int, double>& rank_a, const std::map<int, double>& rank_b,
                     const std::map<int, std::string>& names, const std::string& label_a,
                     const std::string& label_b) {
  if (rank_a.size() != rank_b.size() ||
      !std::equal(rank_a.begin(), rank_a.end(), rank_b.begin(),
                  [](const auto& a, const auto& b) { return a.first == b.first; }))
    throw DataError("parallel ranks: mismatched code sets");
  std::vector<double> a, b;
  std::vector<std::string> nm;
  for (const auto& [code, r] : rank_a) {
    a.push_back(r);
    b.push_back(rank_b.at(code));
    auto it = names.find(code);
    nm.push_back(it == names.end() ? std::to_string(code) : it->second);
  }
  Scene scene;
  scene.width = 360;
  scene.height = 620;
  scene.title = label_a + " vs " + label_b;
  draw_parallel_ranks(scene, Frame{90, 30, 180, 570}, a, b, nm, label_a, label_b);
  return scene;
}

}  // namespace moralstat::viz
