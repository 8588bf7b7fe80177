#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "moralstat/dataset.hpp"
#include "moralstat/error.hpp"
#include "moralstat/geoviz.hpp"
#include "moralstat/scene.hpp"

using namespace moralstat;
using namespace moralstat::viz;

namespace {

const std::string kData = MORALSTAT_TEST_DATA;

const data::MoralDataset& fixture() {
  static const auto ds = data::load_dataset_file(kData + "/guerry.csv").sorted_by_code();
  return ds;
}

const BaseMap& france() {
  static const auto map = data::load_basemap_file(kData + "/france1830.geojson");
  return map;
}

data::Ring square(double x, double y, double s = 1.0) {
  return {{x, y}, {x + s, y}, {x + s, y + s}, {x, y + s}, {x, y}};
}

// n unit squares in a row, codes 1..n.
BaseMap strip(int n) {
  std::vector<MapFeature> f;
  for (int i = 0; i < n; ++i) f.push_back({i + 1, "d" + std::to_string(i + 1), {square(i, 0)}});
  return BaseMap(std::move(f));
}

std::map<int, std::string> fills_of(const Scene& s, std::string_view layer) {
  std::map<int, std::string> out;
  const auto* l = s.find_layer(layer);
  if (!l) return out;
  for (const auto& item : l->items)
    if (const auto* p = std::get_if<PolygonPrim>(&item); p && p->feature && p->style.fill)
      out[*p->feature] = p->style.fill->hex();
  return out;
}

double shoelace(const data::Ring& r) {
  double a = 0;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) a += r[i].x * r[i + 1].y - r[i + 1].x * r[i].y;
  return a / 2;
}

double type7(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<double> column(const data::MoralDataset& ds, std::string_view name) {
  const auto c = ds.column(name);
  return {c.data(), c.data() + c.size()};
}

}  // namespace

// ---------------------------------------------------------------------------
// Scene and SVG

TEST(Svg, UnitSquarePath) {
  Scene s;
  s.width = 10;
  s.height = 10;
  Style st;
  st.fill = ColorRGB(1, 0, 0);
  s.add("map", PolygonPrim{{square(0, 0)}, st, 1});
  const auto svg = render_svg(s);
  const std::regex path_re("<path [^>]*d=\"([^\"]*)\"");
  std::vector<std::string> paths;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), path_re); it != std::sregex_iterator(); ++it)
    paths.push_back((*it)[1]);
  ASSERT_EQ(paths.size(), 1u);
  const std::regex num_re("-?[0-9]+\\.[0-9]{6}");
  const auto count = std::distance(std::sregex_iterator(paths[0].begin(), paths[0].end(), num_re), std::sregex_iterator());
  EXPECT_EQ(count, 10);
  EXPECT_NE(svg.find("#FF0000"), std::string::npos);
  EXPECT_NE(svg.find("data-code=\"1\""), std::string::npos);
}

TEST(Svg, EmptySceneAndDeterminism) {
  Scene s;
  s.width = 200;
  s.height = 100;
  const auto svg = render_svg(s);
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(svg.find("viewBox=\"0.000000 0.000000 200.000000 100.000000\""), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  s.add("t", TextPrim{{1, 2}, "a<b & c", 9, TextAnchor::Start, ColorRGB(), std::nullopt});
  EXPECT_EQ(render_svg(s), render_svg(s));
  EXPECT_NE(render_svg(s).find("a&lt;b &amp; c"), std::string::npos);
}

TEST(Svg, FixedFormatting) {
  EXPECT_EQ(format_fixed(1.5), "1.500000");
  EXPECT_EQ(format_fixed(-0.0000001), "0.000000");
  EXPECT_EQ(format_fixed(-2.25), "-2.250000");
  EXPECT_THROW(format_fixed(std::nan("")), std::invalid_argument);
  Scene s;
  s.width = 1;
  s.height = 1;
  s.add("x", MarkerPrim{{std::numeric_limits<double>::infinity(), 0}, 1, MarkerShape::Circle, {}, std::nullopt});
  EXPECT_THROW(render_svg(s), std::invalid_argument);
}

TEST(Svg, JsonScene) {
  Scene s;
  s.width = 3;
  s.height = 4;
  s.add("a", PolylinePrim{{{0.1234567891, 1}, {2, 3}}, {}, std::nullopt});
  s.add("b", TextPrim{{1, 1}, "x", 9, TextAnchor::Start, ColorRGB(), std::nullopt});
  const auto j = scene_to_json(s);
  ASSERT_EQ(j["layers"].size(), 2u);
  EXPECT_EQ(j["layers"][0]["name"], "a");
  EXPECT_EQ(j["layers"][1]["name"], "b");
  EXPECT_EQ(j.dump(), scene_to_json(s).dump());
  EXPECT_NE(j.dump().find("0.123457"), std::string::npos);
}

TEST(Scene, AppendScene) {
  Scene a, b;
  b.add("map", MarkerPrim{{1, 2}, 1, MarkerShape::Circle, {}, std::nullopt});
  b.warnings.push_back("w");
  a.warnings.push_back("w");
  append_scene(a, b, 10, 20, "left/");
  const auto* l = a.find_layer("left/map");
  ASSERT_NE(l, nullptr);
  const auto& m = std::get<MarkerPrim>(l->items[0]);
  EXPECT_EQ(m.at.x, 11);
  EXPECT_EQ(m.at.y, 22);
  EXPECT_EQ(a.warnings.size(), 1u);
}

// ---------------------------------------------------------------------------
// Colour

TEST(Color, ClampAndHex) {
  const ColorRGB c(1.5, -0.2, 0.5);
  EXPECT_EQ(c.r(), 1.0);
  EXPECT_EQ(c.g(), 0.0);
  EXPECT_EQ(c.hex(), "#FF0080");
  EXPECT_EQ(ColorRGB::from_hex("#22304A").hex(), "#22304A");
  EXPECT_EQ(sequential_color(0).hex(), kRampLight);
  EXPECT_EQ(sequential_color(1).hex(), kRampDark);
  EXPECT_EQ(sequential_color(2), sequential_color(1));
  for (int k = 1; k <= 8; ++k) EXPECT_EQ(diverging_class_color(k).hex(), kDivergingHex[static_cast<std::size_t>(k - 1)]);
  EXPECT_EQ(diverging_continuous(0).hex(), kNeutralHex);
  EXPECT_EQ(diverging_continuous(-1).hex(), kDivergingHex[0]);
  EXPECT_EQ(diverging_continuous(1).hex(), kDivergingHex[7]);
}

TEST(Color, SequentialRampIsMonotone) {
  double prev = 2;
  for (int k = 0; k <= 100; ++k) {
    const double l = sequential_color(k / 100.0).luminance();
    EXPECT_LT(l, prev);
    prev = l;
  }
}

// ---------------------------------------------------------------------------
// Rank choropleth

TEST(RankChoropleth, TwoRegionsUseEndpoints) {
  const auto map = strip(2);
  const std::vector<int> codes = {1, 2};
  const std::vector<double> values = {10, 20};
  const auto s = rank_choropleth(map, codes, values, {});
  const auto fills = fills_of(s, "map");
  EXPECT_EQ(fills.at(1), sequential_color(1).hex());
  EXPECT_EQ(fills.at(2), sequential_color(0).hex());
}

TEST(RankChoropleth, WorseIsDarkerForEveryAdjacentPair) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 100);
  std::vector<double> v(40);
  for (auto& x : v) x = u(rng);
  for (bool more_is_better : {true, false}) {
    ChoroplethOptions opt;
    opt.more_is_better = more_is_better;
    const auto sh = rank_shading(v, opt);
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    // Worst first.
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return more_is_better ? v[a] < v[b] : v[a] > v[b]; });
    for (std::size_t k = 0; k + 1 < order.size(); ++k)
      EXPECT_LT(sequential_color(sh.darkness[order[k]]).luminance(),
                sequential_color(sh.darkness[order[k + 1]]).luminance());
  }
}

TEST(RankChoropleth, RankNumbersAndHollowFeatures) {
  const auto map = strip(3);
  const std::vector<int> codes = {1, 2, 9};
  const std::vector<double> values = {5, 7, 6};
  const auto s = rank_choropleth(map, codes, values, {});
  ASSERT_EQ(s.warnings.size(), 1u);
  EXPECT_NE(s.warnings[0].find("9"), std::string::npos);
  const auto fills = fills_of(s, "map");
  EXPECT_EQ(fills.count(3), 0u);
  std::set<std::string> labels;
  for (const auto& item : s.find_layer("ranks")->items) labels.insert(std::get<TextPrim>(item).text);
  EXPECT_EQ(labels, (std::set<std::string>{"1", "3"}));
}

TEST(RankChoropleth, LiteracyDarkestInCentreAndSouth) {
  const auto& ds = fixture();
  const auto codes = ds.codes();
  const auto lit = column(ds, "Literacy");
  const auto sh = rank_shading(lit, {});
  double obscure = 0, eclairee = 0;
  int no = 0, ne = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto r = ds[i].region;
    if (r == data::Region::Central || r == data::Region::South) obscure += sh.darkness[i], ++no;
    if (r == data::Region::North || r == data::Region::East) eclairee += sh.darkness[i], ++ne;
  }
  EXPECT_GT(obscure / no, eclairee / ne + 0.2);
}

TEST(RankChoropleth, PermutationInvariantSvg) {
  const auto& ds = fixture();
  auto codes = ds.codes();
  auto lit = column(ds, "Literacy");
  const auto a = render_svg(rank_choropleth(france(), codes, lit, {}));
  std::vector<std::size_t> p(codes.size());
  std::iota(p.begin(), p.end(), 0);
  std::mt19937_64 rng(9);
  std::shuffle(p.begin(), p.end(), rng);
  std::vector<int> pc;
  std::vector<double> pv;
  for (auto i : p) pc.push_back(codes[i]), pv.push_back(lit[i]);
  EXPECT_EQ(render_svg(rank_choropleth(france(), pc, pv, {})), a);
}

// ---------------------------------------------------------------------------
// Map geometry and labels

TEST(MapGeometry, LabelPointInsideConcave) {
  // U shape: centroid falls in the notch.
  const data::Ring u = {{0, 0}, {3, 0}, {3, 3}, {2, 3}, {2, 1}, {1, 1}, {1, 3}, {0, 3}, {0, 0}};
  const MapFeature f{1, "u", {u}};
  EXPECT_FALSE(point_in_ring(ring_centroid(u), u));
  EXPECT_TRUE(point_in_feature(label_point(f), f));
  EXPECT_NEAR(std::abs(ring_area(u)), 7.0, 1e-12);
  EXPECT_TRUE(point_in_feature(label_point({2, "sq", {square(0, 0)}}), {2, "sq", {square(0, 0)}}));
  for (const auto& feat : france().features()) EXPECT_TRUE(point_in_feature(label_point(feat), feat)) << feat.code;
}

TEST(Labels, DistantPointsGoEast) {
  const std::vector<Point> pts = {{0, 0}, {500, 500}};
  const std::vector<LabelRequest> rq = {{0, "Alpha", "1"}, {1, "Beta", "2"}};
  const auto placed = place_labels(pts, rq);
  for (const auto& p : placed) {
    EXPECT_EQ(p.outcome, LabelOutcome::Full);
    EXPECT_EQ(p.candidate, 0);
  }
}

TEST(Labels, CoincidentPoints) {
  const std::vector<Point> pts(6, Point{50, 50});
  std::vector<LabelRequest> rq;
  for (std::size_t i = 0; i < pts.size(); ++i) rq.push_back({i, "Name" + std::to_string(i), std::to_string(i)});
  const auto placed = place_labels(pts, rq);
  EXPECT_EQ(std::count_if(placed.begin(), placed.end(), [](auto& p) { return p.outcome == LabelOutcome::Full; }), 1);
  EXPECT_EQ(placed[0].outcome, LabelOutcome::Full);
  for (std::size_t i = 1; i < placed.size(); ++i) EXPECT_NE(placed[i].outcome, LabelOutcome::Full);
}

TEST(Labels, PlacementSoundness) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0, 300);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Point> pts(80);
    for (auto& p : pts) p = {u(rng), u(rng)};
    std::vector<LabelRequest> rq;
    for (std::size_t i = 0; i < pts.size(); ++i) rq.push_back({i, "Dept-" + std::to_string(i), std::to_string(i)});
    const LabelOptions opt;
    const auto placed = place_labels(pts, rq, opt);
    std::vector<const PlacedLabel*> ok;
    for (const auto& p : placed)
      if (p.outcome != LabelOutcome::Dropped) ok.push_back(&p);
    EXPECT_GT(ok.size(), 20u);
    for (std::size_t a = 0; a < ok.size(); ++a) {
      const auto& ba = ok[a]->box;
      for (std::size_t b = a + 1; b < ok.size(); ++b) {
        const auto& bb = ok[b]->box;
        const bool overlap = ba.x0 < bb.x1 && bb.x0 < ba.x1 && ba.y0 < bb.y1 && bb.y0 < ba.y1;
        EXPECT_FALSE(overlap);
      }
      const std::size_t own = rq[ok[a]->request].anchor;
      for (std::size_t m = 0; m < pts.size(); ++m) {
        if (m == own) continue;
        const double r = opt.marker_radius;
        const bool covers = ba.x0 < pts[m].x + r && pts[m].x - r < ba.x1 && ba.y0 < pts[m].y + r && pts[m].y - r < ba.y1;
        EXPECT_FALSE(covers);
      }
      const auto expect_text = ok[a]->outcome == LabelOutcome::Full ? rq[ok[a]->request].text : rq[ok[a]->request].short_text;
      EXPECT_EQ(ok[a]->text, expect_text);
    }
  }
}

// ---------------------------------------------------------------------------
// Scatterplots

TEST(Scatter, SingleGroupOneEllipseOneCross) {
  Eigen::VectorXd x(5), y(5);
  x << 1, 2, 3, 4, 5;
  y << 2, 1, 4, 3, 6;
  const std::vector<std::string> g(5, "A");
  ScatterOptions opt;
  opt.group_ellipses = true;
  opt.group_crosses = true;
  opt.pooled_levels = {};
  opt.label_coverage = std::nullopt;
  const auto m = scatter_model(x, y, g, opt);
  ASSERT_EQ(m.groups.size(), 1u);
  EXPECT_TRUE(m.groups[0].ellipse.has_value());
  const auto s = scatter_overlay(x, y, g, {}, opt);
  EXPECT_EQ(s.find_layer("ellipses")->items.size(), 1u);
  const auto& cross = s.find_layer("crosses")->items;
  EXPECT_EQ(std::count_if(cross.begin(), cross.end(), [](auto& i) { return std::holds_alternative<PolylinePrim>(i); }), 2);
  EXPECT_EQ(std::count_if(cross.begin(), cross.end(), [](auto& i) { return std::holds_alternative<TextPrim>(i); }), 1);
  EXPECT_EQ(s.find_layer("labels"), nullptr);
}

TEST(Scatter, CrossHalfLengthIsStandardError) {
  Eigen::VectorXd x(7), y(7);
  x << 1, 4, 2, 8, 5, 7, 3;
  y << 9, 3, 6, 1, 2, 8, 4;
  const std::vector<std::string> g = {"a", "a", "a", "a", "b", "b", "c"};
  ScatterOptions opt;
  opt.group_ellipses = true;
  const auto m = scatter_model(x, y, g, opt);
  ASSERT_EQ(m.groups.size(), 3u);
  const std::vector<double> xa = {1, 4, 2, 8};
  const double mean = 15.0 / 4;
  double ss = 0;
  for (double v : xa) ss += (v - mean) * (v - mean);
  EXPECT_NEAR(m.groups[0].se(0), std::sqrt(ss / 3) / 2, 1e-12);
  EXPECT_FALSE(m.groups[1].ellipse.has_value());
  EXPECT_FALSE(m.groups[2].ellipse.has_value());
  EXPECT_EQ(m.groups[2].se(0), 0.0);
}

TEST(Scatter, FixtureCorsicaHasNoEllipse) {
  const auto& ds = fixture();
  std::vector<std::string> g;
  for (auto r : ds.regions()) g.emplace_back(1, data::region_letter(r));
  ScatterOptions opt;
  opt.group_ellipses = true;
  const auto m = scatter_model(ds.column("Literacy"), ds.column("Crime_pers"), g, opt);
  int with = 0;
  for (const auto& gs : m.groups) {
    with += gs.ellipse.has_value();
    if (gs.label == "X") EXPECT_FALSE(gs.ellipse.has_value());
  }
  EXPECT_EQ(with, 5);
}

TEST(ScatterMatrix, PanelCounts) {
  const auto& ds = fixture();
  std::vector<std::string> six(data::kMoralVariables.begin(), data::kMoralVariables.end());
  const auto s6 = scatterplot_matrix(ds, six);
  EXPECT_EQ(s6.find_layer("panels")->items.size(), 36u);
  const std::vector<std::string> two = {"Literacy", "Crime_prop"};
  const auto s2 = scatterplot_matrix(ds, two);
  EXPECT_EQ(s2.find_layer("panels")->items.size(), 4u);
  EXPECT_EQ(s2.find_layer("diagonal")->items.size(), 2u);
  EXPECT_THROW(scatterplot_matrix(ds, std::vector<std::string>{"Literacy"}), std::invalid_argument);
}

TEST(ScatterMatrix, TwinsAndNegativeTrend) {
  const auto& ds = fixture();
  const auto lit = ds.column("Literacy"), prop = ds.column("Crime_prop");
  ScatterOptions opt;
  const auto a = scatter_model(lit, prop, {}, opt);
  const auto b = scatter_model(prop, lit, {}, opt);
  EXPECT_TRUE(a.points.col(0).isApprox(b.points.col(1)));
  EXPECT_TRUE(a.points.col(1).isApprox(b.points.col(0)));
  EXPECT_NEAR(a.pooled[0].shape(0, 0), b.pooled[0].shape(1, 1), 1e-9);
  // Literacy against the property-crime rate: the smooth falls from left to right.
  EXPECT_LT(a.smooth.back().y, a.smooth.front().y);
  EXPECT_TRUE(std::is_sorted(a.smooth.begin(), a.smooth.end(), [](auto& p, auto& q) { return p.x < q.x; }));
}

// ---------------------------------------------------------------------------
// Parallel ranks

TEST(ParallelRanks, IdenticalAndReversed) {
  std::vector<double> r(9);
  std::iota(r.begin(), r.end(), 1.0);
  const Frame f{0, 0, 100, 80};
  for (const auto& s : parallel_segments(r, r, f)) EXPECT_EQ(s.a.y, s.b.y);
  std::vector<double> rev(r.rbegin(), r.rend());
  const auto segs = parallel_segments(r, rev, f);
  for (const auto& s : segs) {
    EXPECT_NEAR((s.a.x + s.b.x) / 2, 50.0, 1e-12);
    EXPECT_NEAR((s.a.y + s.b.y) / 2, 40.0, 1e-12);
  }
  EXPECT_EQ(count_crossings(segs), 36u);
}

TEST(ParallelRanks, CrossingsEqualDiscordantPairs) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> a(30), b(30);
    std::iota(a.begin(), a.end(), 1.0);
    std::iota(b.begin(), b.end(), 1.0);
    std::shuffle(a.begin(), a.end(), rng);
    std::shuffle(b.begin(), b.end(), rng);
    std::size_t discordant = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = i + 1; j < a.size(); ++j) discordant += (a[i] - a[j]) * (b[i] - b[j]) < 0;
    EXPECT_EQ(count_crossings(parallel_segments(a, b, {0, 0, 200, 300})), discordant);
  }
}

TEST(ParallelRanks, MismatchedCodes) {
  const std::map<int, double> a = {{1, 1}, {2, 2}}, b = {{1, 2}, {3, 1}};
  EXPECT_THROW(parallel_ranks(a, b, {}), DataError);
  const std::map<int, double> c = {{1, 2}, {2, 1}};
  const auto s = parallel_ranks(a, c, {{1, "one"}, {2, "two"}});
  EXPECT_EQ(s.find_layer("links")->items.size(), 2u);
}

// ---------------------------------------------------------------------------
// Glyphs

TEST(EffectOrder, Examples) {
  auto vec = [](std::initializer_list<double> deg) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(deg.size()), 2);
    Eigen::Index i = 0;
    for (double d : deg) m.row(i++) << std::cos(d * M_PI / 180), std::sin(d * M_PI / 180);
    return m;
  };
  const std::vector<std::string> names = {"v1", "v2", "v3"};
  EXPECT_EQ(effect_order(vec({10, 100, 250}), names), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(effect_order(vec({250, 10, 100}), names), (std::vector<std::size_t>{1, 2, 0}));

  const auto base = effect_order(vec({20, 75, 140, 200, 300}), std::vector<std::string>{"a", "b", "c", "d", "e"});
  const auto rot = effect_order(vec({20 + 95, 75 + 95, 140 + 95, 200 + 95, 300 + 95}),
                                std::vector<std::string>{"a", "b", "c", "d", "e"});
  const auto pos = std::find(rot.begin(), rot.end(), base[0]) - rot.begin();
  for (std::size_t k = 0; k < base.size(); ++k) EXPECT_EQ(rot[(pos + static_cast<long>(k)) % 5], base[k]);

  const auto twin = effect_order(vec({30, 200, 30}), std::vector<std::string>{"c", "x", "a"});
  EXPECT_EQ(twin, (std::vector<std::size_t>{2, 0, 1}));
}

TEST(StarGlyph, RegularAndScaled) {
  const std::vector<std::size_t> order = {0, 1, 2, 3, 4, 5};
  const std::vector<double> ones(6, 1.0), half(6, 0.5);
  const auto full = star_polygon(star_glyph(ones, order), {0, 0}, 10);
  ASSERT_EQ(full.size(), 7u);
  EXPECT_EQ(full.front(), full.back());
  for (std::size_t k = 0; k < 6; ++k) {
    EXPECT_NEAR(std::hypot(full[k].x, full[k].y), 10.0, 1e-12);
    EXPECT_NEAR(std::atan2(full[k].y, full[k].x), std::remainder(M_PI / 2 + 2 * M_PI * k / 6, 2 * M_PI), 1e-12);
  }
  const auto scaled = star_polygon(star_glyph(half, order), {0, 0}, 10);
  for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(std::hypot(scaled[k].x, scaled[k].y), 5.0, 1e-12);
  EXPECT_NEAR(shoelace(scaled), shoelace(full) / 4, 1e-9);
  EXPECT_GT(shoelace(full), 0.0);
  EXPECT_NEAR(shoelace(full), 0.5 * 6 * 100 * std::sin(2 * M_PI / 6), 1e-9);
}

TEST(StarGlyph, SpikeAreaBelowRegular) {
  const std::vector<std::size_t> order = {0, 1, 2, 3, 4};
  const std::vector<double> spike = {1, 0, 0, 0, 0};
  const auto s = star_polygon(star_glyph(spike, order), {0, 0}, 1);
  const auto full = star_polygon(star_glyph(std::vector<double>(5, 1.0), order), {0, 0}, 1);
  EXPECT_LT(shoelace(s), shoelace(full));
  EXPECT_NEAR(std::hypot(s[1].x, s[1].y), kMinRay, 1e-12);
  const auto dev = star_polygon_device(star_glyph(spike, order), {0, 0}, 1);
  EXPECT_NEAR(dev[0].y, -1.0, 1e-12);
  EXPECT_THROW(star_glyph(std::vector<double>{}, std::vector<std::size_t>{}), std::invalid_argument);
  EXPECT_THROW(star_glyph(spike, std::vector<std::size_t>{0, 0, 1, 2, 3}), std::invalid_argument);
}

TEST(StarMap, QuartileContainmentAndCorsica) {
  const auto& ds = fixture();
  std::vector<std::string> vars(data::kMoralVariables.begin(), data::kMoralVariables.end());
  std::vector<std::size_t> order = {0, 1, 2, 3, 4, 5};
  const auto m = star_map_model(ds, vars, order, ColorEncode::MeanRank);
  for (const auto& rg : m.regions)
    for (std::size_t j = 0; j < vars.size(); ++j) {
      EXPECT_LE(rg.lower[j], rg.median[j]);
      EXPECT_LE(rg.median[j], rg.upper[j]);
    }
  const auto ci = std::find(m.codes.begin(), m.codes.end(), data::kCorsica) - m.codes.begin();
  const Eigen::RowVectorXd c = m.fractions.row(ci);
  for (int j : {0, 1}) {
    std::vector<double> col(m.fractions.col(j).data(), m.fractions.col(j).data() + m.fractions.rows());
    EXPECT_LE(c(j), type7(col, 0.15)) << j;
  }
  EXPECT_GT((c(2) + c(3) + c(4) + c(5)) / 4, 0.5);
  const auto s = star_map(france(), ds, vars, order, GlyphEncoding::RegionQuartiles, ColorEncode::None);
  EXPECT_FALSE(render_svg(s).empty());
}

TEST(StarMap, IdenticalProfilesGiveCoincidentStars) {
  std::vector<data::VariableMeta> vars;
  for (auto v : data::kMoralVariables) vars.push_back(data::describe_variable(v));
  std::vector<data::DepartementRecord> recs;
  const int north[] = {2, 8, 14, 27, 50};
  for (int k = 0; k < 5; ++k) recs.push_back({north[k], "n", data::Region::North, {1, 2, 3, 4, 5, 6}});
  const int east[] = {1, 10, 21, 25};
  for (int k = 0; k < 4; ++k) recs.push_back({east[k], "e", data::Region::East, {k + 1.0, 7, 8 - k, 9, 10, k * 2.0}});
  const data::MoralDataset ds(vars, recs);
  std::vector<std::string> names(data::kMoralVariables.begin(), data::kMoralVariables.end());
  const auto m = star_map_model(ds, names, std::vector<std::size_t>{0, 1, 2, 3, 4, 5}, ColorEncode::None);
  const auto it = std::find_if(m.regions.begin(), m.regions.end(), [](auto& r) { return r.region == data::Region::North; });
  ASSERT_NE(it, m.regions.end());
  EXPECT_EQ(it->lower, it->median);
  EXPECT_EQ(it->median, it->upper);
}

// ---------------------------------------------------------------------------
// Colour blending

TEST(Blend, Examples) {
  EXPECT_EQ(rgb_blend(0, 0, 0).hex(), "#000000");
  EXPECT_EQ(rgb_blend(1, 1, 1).hex(), "#FFFFFF");
  const auto dim = rgb_blend(0.25, 0.25, 0), bright = rgb_blend(0.75, 0.75, 0);
  EXPECT_NEAR(dim.hue(), 60.0, 1e-9);
  EXPECT_NEAR(bright.hue(), 60.0, 1e-9);
  EXPECT_LT(dim.luminance(), bright.luminance());
  EXPECT_EQ(rgb_blend(1, 0, 0.5, {2, 0, 1}), ColorRGB(0, 0.5, 1));
  EXPECT_EQ(rgb_blend(2, -1, 0.5), ColorRGB(1, 0, 0.5));
  EXPECT_EQ(minmax_normalize(std::vector<double>{2, 4, 6}), (std::vector<double>{0, 0.5, 1}));
  EXPECT_EQ(minmax_normalize(std::vector<double>{3, 3}), (std::vector<double>{0, 0}));
}

TEST(Trilinear, Cells) {
  const auto cells = trilinear_cells();
  EXPECT_EQ(cells.size(), 561u);
  int vertices = 0;
  for (const auto& c : cells) {
    EXPECT_EQ(c.weights[0] + c.weights[1] + c.weights[2], kTrilinearSteps);
    for (std::size_t v = 0; v < 3; ++v)
      if (c.weights[v] == kTrilinearSteps) {
        const std::array<std::string, 3> pure = {"#FF0000", "#00FF00", "#0000FF"};
        EXPECT_EQ(c.color.hex(), pure[v]);
        ++vertices;
      }
    const auto w = c.weights;
    EXPECT_EQ(trilinear_color(w[0], w[1], w[2]), trilinear_color(3.5 * w[0], 3.5 * w[1], 3.5 * w[2]));
    EXPECT_EQ(c.color, trilinear_color(w[0], w[1], w[2]));
  }
  EXPECT_EQ(vertices, 3);
  const auto centre = trilinear_color(1, 1, 1);
  EXPECT_EQ(centre.r(), centre.g());
  EXPECT_EQ(centre.g(), centre.b());
  const auto nearest = std::min_element(cells.begin(), cells.end(), [](auto& a, auto& b) {
    auto d = [](auto& c) { return std::pow(c.color.r() - 1.0 / 3, 2) + std::pow(c.color.g() - 1.0 / 3, 2) + std::pow(c.color.b() - 1.0 / 3, 2); };
    return d(a) < d(b);
  });
  EXPECT_LT(std::abs(nearest->color.r() - nearest->color.g()), 1.0 / kTrilinearSteps + 1e-12);
  EXPECT_LT(std::abs(nearest->color.g() - nearest->color.b()), 1.0 / kTrilinearSteps + 1e-12);
  const auto legend = trilinear_legend({"A", "B", "C"});
  EXPECT_NE(render_svg(legend).find(">A<"), std::string::npos);
}

TEST(FactorRgbMap, MinimumIsBlack) {
  const auto map = strip(3);
  Eigen::MatrixXd scores(3, 3);
  scores << -1, -2, -3, 0, 0, 0, 1, 5, 2;
  const std::vector<int> codes = {1, 2, 3};
  const auto s = factor_rgb_map(map, codes, scores, std::vector<int>{3});
  const auto fills = fills_of(s, "map");
  EXPECT_EQ(fills.at(1), "#000000");
  EXPECT_EQ(fills.at(3), "#FFFFFF");
}

// ---------------------------------------------------------------------------
// Shingles and conditioned choropleths

TEST(Shingles, Examples) {
  std::vector<double> v(10);
  std::iota(v.begin(), v.end(), 0.0);
  const auto one = equal_count_shingles(v, 1, 0.3);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].members.size(), 10u);
  const auto halves = equal_count_shingles(v, 2, 0.0);
  EXPECT_EQ(halves[0].members, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(halves[1].members, (std::vector<std::size_t>{5, 6, 7, 8, 9}));
  EXPECT_LT(halves[0].upper, type7(v, 0.5));
  EXPECT_GT(halves[1].lower, type7(v, 0.5));
  EXPECT_THROW(equal_count_shingles(v, 0, 0.1), std::invalid_argument);
  EXPECT_THROW(equal_count_shingles(v, 2, 1.0), std::invalid_argument);
  EXPECT_THROW(equal_count_shingles(v, 11, 0.0), std::invalid_argument);
}

TEST(Shingles, EnumerationOracle) {
  std::mt19937_64 rng(86);
  std::uniform_real_distribution<double> u(0, 100);
  std::vector<double> v(86);
  for (auto& x : v) x = u(rng);
  const double r = 86 / 1.9;
  EXPECT_NEAR(shingle_target(86, 2, 0.10), r, 1e-12);
  const auto sh = equal_count_shingles(v, 2, 0.10);
  ASSERT_EQ(sh.size(), 2u);
  // Sorted positions 0..44 and round(40.74)=41 .. 85.
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sh[0].lower, sorted[0]);
  EXPECT_EQ(sh[0].upper, sorted[44]);
  EXPECT_EQ(sh[1].lower, sorted[41]);
  EXPECT_EQ(sh[1].upper, sorted[85]);
  for (const auto& s : sh) EXPECT_LE(std::abs(static_cast<double>(s.members.size()) - r), 1.0 + 1e-9);
  std::vector<std::size_t> both;
  std::set_intersection(sh[0].members.begin(), sh[0].members.end(), sh[1].members.begin(), sh[1].members.end(),
                        std::back_inserter(both));
  EXPECT_GE(both.size(), 4u);
  EXPECT_LE(both.size(), 5u);
}

TEST(Shingles, CoverAndBounds) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int k = 1; k <= 4; ++k)
    for (double ov : {0.0, 0.1, 0.25, 0.5}) {
      std::vector<double> v(37 + k);
      for (auto& x : v) x = u(rng);
      const auto sh = equal_count_shingles(v, k, ov);
      const double r = shingle_target(v.size(), k, ov);
      std::set<std::size_t> covered;
      for (std::size_t s = 0; s < sh.size(); ++s) {
        EXPECT_LE(sh[s].lower, sh[s].upper);
        for (auto i : sh[s].members) {
          EXPECT_GE(v[i], sh[s].lower);
          EXPECT_LE(v[i], sh[s].upper);
          covered.insert(i);
        }
        if (s + 1 < sh.size()) EXPECT_LE(std::abs(static_cast<double>(sh[s].members.size()) - r), 1.0 + 1e-9);
      }
      EXPECT_EQ(covered.size(), v.size());
    }
}

TEST(DivergingScale, ClassesAndOracle) {
  std::vector<double> v(80);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(1000, 40000);
  for (auto& x : v) x = u(rng);
  const auto s = diverging_percentile_scale(v);
  std::vector<double> rates;
  for (double x : v) rates.push_back(1 / x);
  for (std::size_t c = 0; c < 7; ++c) EXPECT_NEAR(s.cuts[c], type7(rates, 0.2 + 0.1 * static_cast<double>(c)), 1e-15);
  const auto imin = std::max_element(v.begin(), v.end()) - v.begin();
  const auto imax = std::min_element(v.begin(), v.end()) - v.begin();
  EXPECT_EQ(s.classes[static_cast<std::size_t>(imin)], 1);
  EXPECT_EQ(s.classes[static_cast<std::size_t>(imax)], 8);
  std::vector<int> count(9, 0);
  for (int c : s.classes) ++count[static_cast<std::size_t>(c)];
  EXPECT_NEAR(count[1], 16, 1);
  for (int c = 2; c <= 7; ++c) EXPECT_NEAR(count[static_cast<std::size_t>(c)], 8, 1);
  EXPECT_NEAR(count[8], 16, 1);
  EXPECT_THROW(diverging_percentile_scale(std::vector<double>{3, 3, 3}), std::invalid_argument);
}

TEST(CcMap, SinglePanel) {
  const auto& ds = fixture();
  const auto resp = column(ds, "Crime_prop"), lit = column(ds, "Literacy"), w = column(ds, "Wealth");
  CcMapOptions opt;
  opt.kx = opt.ky = 1;
  const auto m = ccmap_model(resp, lit, w, opt);
  ASSERT_EQ(m.panels.size(), 1u);
  EXPECT_EQ(m.panels[0].members.size(), 86u);
  const auto scale = diverging_percentile_scale(resp);
  EXPECT_EQ(m.scale.classes, scale.classes);
  const auto codes = ds.codes();
  const auto s = ccmap(france(), codes, resp, lit, w, opt);
  const auto fills = fills_of(s, "panel-0-0/map");
  for (std::size_t i = 0; i < codes.size(); ++i) EXPECT_EQ(fills.at(codes[i]), diverging_class_color(scale.classes[i]).hex());
}

TEST(CcMap, GlobalClassesAndCounts) {
  const auto& ds = fixture();
  const auto resp = column(ds, "Crime_prop"), lit = column(ds, "Literacy"), w = column(ds, "Wealth");
  const auto codes = ds.codes();
  const CcMapOptions opt;
  const auto m = ccmap_model(resp, lit, w, opt);
  ASSERT_EQ(m.panels.size(), 4u);
  std::size_t total = 0;
  for (const auto& p : m.panels) total += p.members.size();
  std::size_t xs = 0, ys = 0;
  for (const auto& s : m.x_shingles) xs += s.members.size();
  for (const auto& s : m.y_shingles) ys += s.members.size();
  // Union oracle: each observation appears once per (x shingle, y shingle) pair that holds it.
  std::size_t expect = 0;
  for (std::size_t i = 0; i < resp.size(); ++i) {
    int cx = 0, cy = 0;
    for (const auto& s : m.x_shingles) cx += std::binary_search(s.members.begin(), s.members.end(), i);
    for (const auto& s : m.y_shingles) cy += std::binary_search(s.members.begin(), s.members.end(), i);
    expect += static_cast<std::size_t>(cx * cy);
  }
  EXPECT_EQ(total, expect);
  EXPECT_GE(total, 86u);
  EXPECT_GT(xs, 86u);
  EXPECT_GT(ys, 86u);

  const auto s = ccmap(france(), codes, resp, lit, w, opt);
  std::map<int, std::set<std::string>> seen;
  const std::string neutral = neutral_background().hex();
  for (const auto& p : m.panels) {
    const auto fills = fills_of(s, "panel-" + std::to_string(p.row) + "-" + std::to_string(p.ix) + "/map");
    for (std::size_t i = 0; i < codes.size(); ++i) {
      const bool member = std::binary_search(p.members.begin(), p.members.end(), i);
      const auto& f = fills.at(codes[i]);
      if (member) {
        seen[codes[i]].insert(f);
        EXPECT_EQ(f, diverging_class_color(m.scale.classes[i]).hex());
      } else {
        EXPECT_EQ(f, neutral);
      }
    }
  }
  for (const auto& [code, colors] : seen) EXPECT_EQ(colors.size(), 1u) << code;
}

TEST(CcMap, LiterateWealthyPanelIsRed) {
  const auto& ds = fixture();
  const auto resp = column(ds, "Crime_prop"), lit = column(ds, "Literacy"), w = column(ds, "Wealth");
  const auto m = ccmap_model(resp, lit, w, {});
  const auto it = std::find_if(m.panels.begin(), m.panels.end(), [](auto& p) { return p.ix == 1 && p.iy == 0; });
  ASSERT_NE(it, m.panels.end());
  EXPECT_EQ(it->row, 0);
  int red = 0, blue = 0, north = 0;
  for (auto i : it->members) {
    (m.scale.classes[i] >= 5 ? red : blue)++;
    north += ds[i].region == data::Region::North;
  }
  EXPECT_GT(red, 2 * blue);
  EXPECT_GT(north, static_cast<int>(it->members.size()) / 3);
}

TEST(CcMap, EmptyPanelAndOverlapZero) {
  std::vector<double> x(20), resp(20);
  for (int i = 0; i < 20; ++i) x[static_cast<std::size_t>(i)] = i, resp[static_cast<std::size_t>(i)] = 100 + (i * 7) % 20;
  CcMapOptions opt;
  opt.overlap = 0.0;
  const auto m = ccmap_model(resp, x, x, opt);
  std::size_t total = 0;
  int empty = 0;
  for (const auto& p : m.panels) {
    total += p.members.size();
    if (p.members.empty()) {
      ++empty;
      EXPECT_FALSE(p.median.has_value());
    }
  }
  EXPECT_EQ(total, 20u);
  EXPECT_EQ(empty, 2);
}

// ---------------------------------------------------------------------------
// Fitted and residual maps

TEST(ResidualMaps, IdentityAndOutsideLabels) {
  const auto& ds = fixture();
  const auto y = ds.column("Crime_pers");
  const auto fit = mv::response_surface(y, ds.column("Literacy"), ds.column("Wealth"));
  EXPECT_LT((fit.fitted + fit.residuals - y).cwiseAbs().maxCoeff(), 1e-10 * y.cwiseAbs().maxCoeff());

  std::vector<double> res(fit.residuals.data(), fit.residuals.data() + fit.residuals.size());
  const double q1 = type7(res, 0.25), q3 = type7(res, 0.75);
  std::set<std::string> expect;
  const auto names = ds.names();
  for (std::size_t i = 0; i < res.size(); ++i)
    if (res[i] < q1 - 1.5 * (q3 - q1) || res[i] > q3 + 1.5 * (q3 - q1)) expect.insert(names[i]);
  const auto codes = ds.codes();
  const auto [fitted, residual] = fitted_residual_maps(france(), codes, names, fit);
  std::set<std::string> got;
  if (const auto* l = residual.find_layer("labels"))
    for (const auto& item : l->items) got.insert(std::get<TextPrim>(item).text);
  EXPECT_EQ(got, expect);
  EXPECT_FALSE(fitted.find_layer("map")->items.empty());
}

TEST(ResidualMaps, ZeroResidualsAreNeutral) {
  const auto map = strip(4);
  mv::RegressionFit fit;
  fit.fitted = Eigen::Vector4d(1, 2, 3, 4);
  fit.residuals = Eigen::Vector4d::Zero();
  const std::vector<int> codes = {1, 2, 3, 4};
  const std::vector<std::string> names = {"a", "b", "c", "d"};
  const auto [fitted, residual] = fitted_residual_maps(map, codes, names, fit);
  for (const auto& [code, hex] : fills_of(residual, "map")) EXPECT_EQ(hex, kNeutralHex) << code;
  const auto ff = fills_of(fitted, "map");
  EXPECT_EQ(ff.at(1), sequential_color(0).hex());
  EXPECT_EQ(ff.at(4), sequential_color(1).hex());
}
