#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "moralstat/dataset.hpp"
#include "moralstat/mvstats.hpp"
#include "moralstat/numcore.hpp"
#include "moralstat/scene.hpp"

namespace moralstat::viz {

using data::BaseMap;
using data::Bounds;
using data::MapFeature;
using num::RankOne;

// ---------------------------------------------------------------------------
// Palettes

inline constexpr const char* kRampLight = "#F0F0F0";
inline constexpr const char* kRampDark = "#22304A";
inline constexpr std::array<const char*, 8> kDivergingHex = {
    "#08306B", "#2171B5", "#6BAED6", "#C6DBEF", "#FCBBA1", "#FB6A4A", "#CB181D", "#67000D"};
inline constexpr const char* kNeutralHex = "#FFFFFF";
inline constexpr const char* kBackgroundHex = "#E6E6E6";

// t = 0 light, t = 1 dark; t clamped.
ColorRGB sequential_color(double t);
// Class 1..8; 1 deepest blue, 8 deepest red.
ColorRGB diverging_class_color(int cls);
// t in [-1, 1]: -1 deepest blue, 0 white, +1 deepest red.
ColorRGB diverging_continuous(double t);
ColorRGB neutral_background();

// ---------------------------------------------------------------------------
// Coordinate mapping

// Fits map bounds into a frame with equal x/y scale; map y points up.
class MapProjection {
 public:
  MapProjection(const Bounds& bounds, const Frame& frame, double pad = 4.0);
  Point operator()(const Point& p) const;
  double scale() const { return scale_; }

 private:
  Bounds bounds_;
  double scale_ = 1.0, ox_ = 0.0, oy_ = 0.0;
};

// Linear data -> device mapping for a plot area.
struct PlotArea {
  Frame frame;
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;

  Point to_device(double x, double y) const;
  double sx() const { return frame.w / (xmax - xmin); }
  double sy() const { return frame.h / (ymax - ymin); }
};

// Data ranges padded by `pad` of the span; `equal` forces a common scale.
PlotArea fit_plot_area(const Frame& frame, double xmin, double xmax, double ymin, double ymax,
                       double pad = 0.05, bool equal = false);

// "Nice" tick values covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target = 5);

void draw_axes(Scene& scene, const PlotArea& area, const std::string& x_label,
               const std::string& y_label, std::string_view layer = "axes");

// ---------------------------------------------------------------------------
// Map geometry

double ring_area(const data::Ring& ring);  // signed shoelace
Point ring_centroid(const data::Ring& ring);
bool point_in_ring(const Point& p, const data::Ring& ring);
bool point_in_feature(const Point& p, const MapFeature& f);

// Centroid of the largest ring, moved inside the polygon when it falls outside.
Point label_point(const MapFeature& f);

// Polygons of every map feature in map order; `fill` gives the colour per code
// (std::nullopt draws the feature hollow).
void draw_map(Scene& scene, const BaseMap& map, const MapProjection& proj,
              const std::map<int, ColorRGB>& fill, std::string_view layer = "map");

// Codes present in `codes` but absent from the map, recorded as scene warnings.
void warn_unmapped(Scene& scene, const BaseMap& map, std::span<const int> codes);

// ---------------------------------------------------------------------------
// Label placement

struct LabelBox {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
  bool intersects(const LabelBox& o) const {
    return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1;
  }
  LabelBox hull(const LabelBox& o) const;
};

enum class LabelOutcome { Full, Degraded, Dropped };

struct LabelRequest {
  std::size_t anchor = 0;   // index into the marker list
  std::string text;         // full label (name)
  std::string short_text;   // degraded label (number); empty = no degraded form
};

struct PlacedLabel {
  std::size_t request = 0;
  LabelOutcome outcome = LabelOutcome::Dropped;
  std::string text;
  LabelBox box;        // text box; zero when dropped
  int candidate = -1;  // 0..7 = E, W, N, S, NE, NW, SE, SW
};

struct LabelOptions {
  double font_size = 8.0;
  double char_width = 0.6;  // fraction of font size per glyph
  double marker_radius = 2.5;
  double gap = 1.5;
};

LabelBox marker_box(const Point& p, double radius);
LabelBox candidate_box(const Point& anchor, std::string_view text, int candidate,
                       const LabelOptions& opt);

// Greedy placement in request order (callers sort by priority).
std::vector<PlacedLabel> place_labels(std::span<const Point> markers,
                                      std::span<const LabelRequest> requests,
                                      const LabelOptions& opt = {});

void draw_labels(Scene& scene, std::span<const PlacedLabel> placed, const LabelOptions& opt,
                 std::string_view layer = "labels");

// ---------------------------------------------------------------------------
// Rank choropleth

enum class DarkerIs { Worse, Rank1 };

struct ChoroplethOptions {
  RankOne rank_one_is = RankOne::Highest;
  DarkerIs darker_is = DarkerIs::Worse;
  bool more_is_better = true;
  std::string title;
  bool show_ranks = true;
};

struct RankShading {
  std::vector<double> ranks;  // as displayed, aligned with the input
  std::vector<double> darkness;  // ramp parameter in [0, 1]
};

RankShading rank_shading(std::span<const double> values, const ChoroplethOptions& opt);

void draw_rank_choropleth(Scene& scene, const Frame& frame, const BaseMap& map,
                          std::span<const int> codes, std::span<const double> values,
                          const ChoroplethOptions& opt, std::string_view prefix = "");

Scene rank_choropleth(const BaseMap& map, std::span<const int> codes,
                      std::span<const double> values, const ChoroplethOptions& opt);

// ---------------------------------------------------------------------------
// Scatterplots with data ellipses, loess and labels

struct ScatterOptions {
  std::string x_label, y_label, title;
  std::vector<double> pooled_levels = {0.68};
  bool group_ellipses = false;
  double group_level = 0.68;
  bool group_crosses = false;
  bool smooth = true;
  double span = num::kDefaultLoessSpan;
  std::optional<double> label_coverage = 0.90;
  bool axes = true;
};

struct GroupSummary {
  std::string label;
  std::size_t n = 0;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Vector2d se = Eigen::Vector2d::Zero();  // s / sqrt(n); zero when n < 2
  std::optional<num::EllipseGeom> ellipse;      // only for n >= 3
};

struct ScatterModel {
  Eigen::MatrixXd points;  // n x 2
  std::vector<num::EllipseGeom> pooled;
  std::vector<GroupSummary> groups;  // sorted by label
  std::vector<Point> smooth;         // loess curve in data units, sorted by x
  std::vector<std::size_t> flagged;  // label candidates, descending distance
};

ScatterModel scatter_model(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                           std::span<const std::string> groups, const ScatterOptions& opt);

// Draws into `frame`; returns the plot area used.
PlotArea draw_scatter(Scene& scene, const Frame& frame, const ScatterModel& model,
                      std::span<const std::string> labels, std::span<const std::string> short_labels,
                      const ScatterOptions& opt, std::string_view prefix = "");

Scene scatter_overlay(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      std::span<const std::string> groups, std::span<const std::string> labels,
                      const ScatterOptions& opt);

Scene scatterplot_matrix(const data::MoralDataset& ds, std::span<const std::string> variables,
                         double span = num::kDefaultLoessSpan);

// ---------------------------------------------------------------------------
// Parallel rank plot

struct Segment {
  Point a, b;
};

std::vector<Segment> parallel_segments(std::span<const double> rank_a,
                                       std::span<const double> rank_b, const Frame& frame);

// Pairs of segments that cross strictly between the two axes.
std::size_t count_crossings(std::span<const Segment> segments);

void draw_parallel_ranks(Scene& scene, const Frame& frame, std::span<const double> rank_a,
                         std::span<const double> rank_b, std::span<const std::string> names,
                         const std::string& label_a, const std::string& label_b);

// rank vectors keyed by code; code sets must match.
Scene parallel_ranks(const std::map<int, double>& rank_a, const std::map<int, double>& rank_b,
                     const std::map<int, std::string>& names, const std::string& label_a = "A",
                     const std::string& label_b = "B");

// ---------------------------------------------------------------------------
// Star glyphs

// Variables sorted by the angle of their (x, y) vectors in [0, 2 pi); ties by name.
std::vector<std::size_t> effect_order(const Eigen::MatrixXd& vectors,
                                      std::span<const std::string> names);

inline constexpr double kMinRay = 0.05;

struct GlyphSpec {
  std::vector<double> ray_fractions;       // per variable, in [0, 1]
  std::vector<std::size_t> angular_order;  // ray k shows variable angular_order[k]
  Style style;
};

GlyphSpec star_glyph(std::span<const double> fractions, std::span<const std::size_t> order);

// Angle of ray k of p: 90 degrees plus k steps counterclockwise.
double ray_angle(std::size_t k, std::size_t p);

// Closed ring through the ray ends in math orientation (y up) around `center`.
data::Ring star_polygon(const GlyphSpec& g, const Point& center, double radius);

// Ring in device space (y down).
data::Ring star_polygon_device(const GlyphSpec& g, const Point& center, double radius);

enum class GlyphEncoding { Individual, RegionQuartiles };
enum class ColorEncode { None, MeanRank, SdRank };

struct RegionGlyphs {
  data::Region region;
  std::size_t members = 0;
  bool median_only = false;
  std::vector<double> lower, median, upper;  // per variable
};

struct StarMapModel {
  std::vector<std::string> variables;
  std::vector<std::size_t> order;
  std::vector<int> codes;
  Eigen::MatrixXd fractions;  // n x p, (n - rank + 1) / n with rank 1 = best
  std::vector<double> mean_rank, sd_rank;
  std::vector<int> annotated;  // codes outside the 1.5 IQR fences of the encoded statistic
  std::vector<RegionGlyphs> regions;
};

StarMapModel star_map_model(const data::MoralDataset& ds, std::span<const std::string> variables,
                            std::span<const std::size_t> order, ColorEncode color);

Scene star_map(const BaseMap& map, const data::MoralDataset& ds,
               std::span<const std::string> variables, std::span<const std::size_t> order,
               GlyphEncoding encoding, ColorEncode color);

// ---------------------------------------------------------------------------
// Colour blending

std::vector<double> minmax_normalize(std::span<const double> values);

// channel_of[i] is the channel (0 = R, 1 = G, 2 = B) receiving x_i.
ColorRGB rgb_blend(double x1, double x2, double x3, std::array<int, 3> channel_of = {0, 1, 2});

// Relative-amount colour (a, b, c) / (a + b + c).
ColorRGB trilinear_color(double a, double b, double c);

inline constexpr int kTrilinearSteps = 32;

struct TrilinearCell {
  std::array<int, 3> weights;  // barycentric numerators, sum kTrilinearSteps
  ColorRGB color;
};

std::vector<TrilinearCell> trilinear_cells();

void draw_trilinear_legend(Scene& scene, const Frame& frame, const std::array<std::string, 3>& names);
Scene trilinear_legend(const std::array<std::string, 3>& names);

Scene rgb_map(const BaseMap& map, std::span<const int> codes, const Eigen::MatrixXd& channels,
              const std::array<std::string, 3>& names, std::span<const int> annotate,
              const std::string& title);

// Scores normalized per column, then blended as (R, G, B).
Scene factor_rgb_map(const BaseMap& map, std::span<const int> codes, const Eigen::MatrixXd& scores,
                     std::span<const int> outliers,
                     const std::array<std::string, 3>& names = {"F1", "F2", "F3"});

// ---------------------------------------------------------------------------
// Conditioned choropleth maps

struct Shingle {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<std::size_t> members;  // ascending observation indices
};

double shingle_target(std::size_t n, int k, double overlap);
std::vector<Shingle> equal_count_shingles(std::span<const double> values, int k, double overlap);

inline constexpr std::array<double, 7> kPercentileCuts = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};

struct DivergingScale {
  std::array<double, 7> cuts{};  // in crime-rate units
  std::vector<double> rates;
  std::vector<int> classes;      // 1..8
};

// `reciprocal`: values are population per event, classes follow the rate.
DivergingScale diverging_percentile_scale(std::span<const double> values, bool reciprocal = true);

struct CcMapOptions {
  int kx = 2;
  int ky = 2;
  double overlap = 0.10;
  bool reciprocal = true;
  bool y_low_on_top = true;  // rank index with 1 = best: top row holds ranks near 1
  std::string response_name = "response";
  std::string x_name = "x";
  std::string y_name = "y";
};

struct CcPanel {
  int ix = 0;
  int row = 0;  // display row, 0 = top
  int iy = 0;   // y shingle index
  std::vector<std::size_t> members;
  std::optional<double> median;  // of the response, population per event
};

struct CcMapModel {
  std::vector<Shingle> x_shingles, y_shingles;
  DivergingScale scale;
  std::vector<CcPanel> panels;  // row-major in display order
};

CcMapModel ccmap_model(std::span<const double> response, std::span<const double> given_x,
                       std::span<const double> given_y, const CcMapOptions& opt);

Scene ccmap(const BaseMap& map, std::span<const int> codes, std::span<const double> response,
            std::span<const double> given_x, std::span<const double> given_y,
            const CcMapOptions& opt);

// ---------------------------------------------------------------------------
// Fitted and residual maps

struct ResidualMapOptions {
  std::string response_name = "response";
  bool positive_is_blue = true;  // population per event: above the fit = less crime
};

std::pair<Scene, Scene> fitted_residual_maps(const BaseMap& map, std::span<const int> codes,
                                             std::span<const std::string> names,
                                             const mv::RegressionFit& fit,
                                             const ResidualMapOptions& opt = {});

}  // namespace moralstat::viz
