#include <algorithm>
#include <cmath>

#include "moralstat/app.hpp"

namespace moralstat::app {

namespace {

double segment_distance(const data::Point& p, const data::Point& a, const data::Point& b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  if (len2 == 0.0) return std::hypot(p.x - a.x, p.y - a.y);
  const double t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

void dp_mark(const std::vector<data::Point>& pts, std::size_t lo, std::size_t hi, double tol,
             std::vector<bool>& keep) {
  // Explicit stack keeps long rings from recursing deeply.
  std::vector<std::pair<std::size_t, std::size_t>> stack{{lo, hi}};
  while (!stack.empty()) {
    const auto [a, b] = stack.back();
    stack.pop_back();
    if (b <= a + 1) continue;
    double dmax = -1.0;
    std::size_t idx = a;
    for (std::size_t i = a + 1; i < b; ++i) {
      const double d = segment_distance(pts[i], pts[a], pts[b]);
      if (d > dmax) dmax = d, idx = i;
    }
    if (dmax > tol) {
      keep[idx] = true;
      stack.push_back({a, idx});
      stack.push_back({idx, b});
    }
  }
}

Json round_point(const data::Point& p) {
  auto r = [](double v) {
    const double x = std::round(v * 100.0) / 100.0;
    return x == 0.0 ? 0.0 : x;
  };
  return Json::array({r(p.x), r(p.y)});
}

}  // namespace

std::vector<data::Point> douglas_peucker(const std::vector<data::Point>& pts, double tolerance) {
  if (pts.size() <= 2) return pts;
  const bool closed = pts.front() == pts.back() && pts.size() >= 4;
  std::vector<bool> keep(pts.size(), false);
  keep.front() = keep.back() = true;
  if (closed) {
    // Split a closed ring at its farthest vertex from the start.
    std::size_t far = 1;
    double dmax = -1;
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
      const double d = std::hypot(pts[i].x - pts[0].x, pts[i].y - pts[0].y);
      if (d > dmax) dmax = d, far = i;
    }
    keep[far] = true;
    dp_mark(pts, 0, far, tolerance, keep);
    dp_mark(pts, far, pts.size() - 1, tolerance, keep);
  } else {
    dp_mark(pts, 0, pts.size() - 1, tolerance, keep);
  }
  std::vector<data::Point> out;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (keep[i]) out.push_back(pts[i]);
  // A closed ring needs at least a triangle.
  if (closed && out.size() < 4) return pts;
  return out;
}

Json ccmap_model_json(const data::MoralDataset& input, const std::string& response, const std::string& given_x,
                      const std::string& given_y, int kx, int ky, double overlap) {
  const auto ds = input.sorted_by_code();
  auto vec = [&](const std::string& v) {
    const Eigen::VectorXd c = ds.column(v);
    return std::vector<double>(c.data(), c.data() + c.size());
  };
  viz::CcMapOptions opt;
  opt.kx = kx;
  opt.ky = ky;
  opt.overlap = overlap;
  opt.reciprocal = data::describe_variable(response).kind == data::VariableKind::PopPerEvent;
  opt.y_low_on_top = data::describe_variable(given_y).kind == data::VariableKind::RankIndex;
  const auto m = viz::ccmap_model(vec(response), vec(given_x), vec(given_y), opt);
  const auto codes = ds.codes();
  auto member_codes = [&](const std::vector<std::size_t>& idx) {
    Json a = Json::array();
    for (auto i : idx) a.push_back(codes[i]);
    return a;
  };
  auto shingles = [&](const std::vector<viz::Shingle>& sh) {
    Json a = Json::array();
    for (const auto& s : sh)
      a.push_back({{"lower", sig9(s.lower)}, {"upper", sig9(s.upper)}, {"count", s.members.size()},
                   {"members", member_codes(s.members)}});
    return a;
  };
  Json j;
  j["schema"] = kSchema;
  j["kind"] = "ccmap";
  j["response"] = response;
  j["given_x"] = given_x;
  j["given_y"] = given_y;
  j["kx"] = kx;
  j["ky"] = ky;
  j["overlap"] = sig9(overlap);
  j["reciprocal"] = opt.reciprocal;
  j["y_low_on_top"] = opt.y_low_on_top;
  j["target_members"] = sig9(viz::shingle_target(ds.size(), kx, overlap));
  j["x_shingles"] = shingles(m.x_shingles);
  j["y_shingles"] = shingles(m.y_shingles);
  Json cuts = Json::array();
  for (double c : m.scale.cuts) cuts.push_back(sig9(c));
  j["rate_cuts"] = std::move(cuts);
  Json classes = Json::object();
  for (std::size_t i = 0; i < codes.size(); ++i) classes[std::to_string(codes[i])] = m.scale.classes[i];
  j["classes"] = std::move(classes);
  Json panels = Json::array();
  for (const auto& p : m.panels) {
    Json pj;
    pj["row"] = p.row;
    pj["ix"] = p.ix;
    pj["iy"] = p.iy;
    pj["count"] = p.members.size();
    pj["median"] = p.median ? Json(sig9(*p.median)) : Json(nullptr);
    pj["members"] = member_codes(p.members);
    panels.push_back(std::move(pj));
  }
  j["panels"] = std::move(panels);
  return j;
}

Json explorer_bundle(const data::MoralDataset& input, const data::BaseMap& map) {
  const auto ds = input.sorted_by_code();
  const auto b = map.bounds();
  const double tol = 0.001 * std::max(b.width(), b.height());
  Json j;
  j["schema"] = kSchema;
  j["kind"] = "explorer-bundle";
  j["simplify_tolerance"] = sig9(tol);
  j["bounds"] = Json::array({sig9(b.min_x), sig9(b.min_y), sig9(b.max_x), sig9(b.max_y)});

  std::vector<const data::MapFeature*> feats;
  for (const auto& f : map.features()) feats.push_back(&f);
  std::sort(feats.begin(), feats.end(), [](auto a, auto c) { return a->code < c->code; });
  Json features = Json::array();
  for (const auto* f : feats) {
    Json rings = Json::array();
    for (const auto& r : f->rings) {
      Json ring = Json::array();
      for (const auto& p : douglas_peucker(r, tol)) ring.push_back(round_point(p));
      rings.push_back(std::move(ring));
    }
    Json fj;
    fj["code"] = f->code;
    fj["name"] = f->name;
    fj["rings"] = std::move(rings);
    features.push_back(std::move(fj));
  }
  j["features"] = std::move(features);

  Json codes = Json::array(), names = Json::array(), regions = Json::array();
  for (const auto& r : ds.records()) {
    codes.push_back(r.code);
    names.push_back(r.name);
    regions.push_back(std::string(1, data::region_letter(r.region)));
  }
  j["codes"] = std::move(codes);
  j["names"] = std::move(names);
  j["regions"] = std::move(regions);

  Json meta = Json::array();
  Json values = Json::object();
  for (const auto& v : ds.variables()) {
    const char* kind = v.kind == data::VariableKind::PopPerEvent ? "pop_per_event"
                       : v.kind == data::VariableKind::Percent   ? "percent"
                       : v.kind == data::VariableKind::RankIndex ? "rank_index"
                                                                 : "opaque";
    meta.push_back({{"name", v.name}, {"kind", kind}, {"more_is_better", v.more_is_better}});
    Json col = Json::array();
    for (std::size_t i = 0; i < ds.size(); ++i) col.push_back(sig9(ds.value(i, v.name)));
    values[v.name] = std::move(col);
  }
  j["variables"] = std::move(meta);
  j["values"] = std::move(values);

  j["defaults"] = {{"response", "Crime_prop"}, {"given_x", "Literacy"}, {"given_y", "Wealth"},
                   {"kx", 2},                  {"ky", 2},              {"overlap", 0.1}};
  Json div = Json::array();
  for (const char* h : viz::kDivergingHex) div.push_back(h);
  Json cuts = Json::array();
  for (double c : viz::kPercentileCuts) cuts.push_back(c);
  j["palette"] = {{"diverging", std::move(div)},
                  {"neutral", viz::kNeutralHex},
                  {"background", viz::kBackgroundHex},
                  {"sequential", Json::array({viz::kRampLight, viz::kRampDark})}};
  j["rules"] = {{"percentile_cuts", std::move(cuts)},
                {"percentile_type", 7},
                {"class", "1 + count(cut < rate); rate = 1/value for pop_per_event"},
                {"shingle_target", "n / (k (1 - overlap) + overlap)"},
                {"shingle_step", "target (1 - overlap)"},
                {"shingle_rounding", "half-up index boundaries, closed value intervals"}};
  return j;
}

}  // namespace moralstat::app
