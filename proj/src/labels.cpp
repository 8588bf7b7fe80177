#include <algorithm>

#include "moralstat/geoviz.hpp"

namespace moralstat::viz {

LabelBox LabelBox::hull(const LabelBox& o) const {
  return {std::min(x0, o.x0), std::min(y0, o.y0), std::max(x1, o.x1), std::max(y1, o.y1)};
}

LabelBox marker_box(const Point& p, double radius) {
  return {p.x - radius, p.y - radius, p.x + radius, p.y + radius};
}

LabelBox candidate_box(const Point& a, std::string_view text, int candidate, const LabelOptions& opt) {
  const double w = opt.char_width * opt.font_size * static_cast<double>(text.size());
  const double h = opt.font_size;
  const double g = opt.marker_radius + opt.gap;
  double x0 = 0, y0 = 0;
  switch (candidate) {
    case 0: x0 = a.x + g, y0 = a.y - h / 2; break;          // E
    case 1: x0 = a.x - g - w, y0 = a.y - h / 2; break;      // W
    case 2: x0 = a.x - w / 2, y0 = a.y - g - h; break;      // N
    case 3: x0 = a.x - w / 2, y0 = a.y + g; break;          // S
    case 4: x0 = a.x + g, y0 = a.y - g - h; break;          // NE
    case 5: x0 = a.x - g - w, y0 = a.y - g - h; break;      // NW
    case 6: x0 = a.x + g, y0 = a.y + g; break;              // SE
    default: x0 = a.x - g - w, y0 = a.y + g; break;         // SW
  }
  return {x0, y0, x0 + w, y0 + h};
}

std::vector<PlacedLabel> place_labels(std::span<const Point> markers,
                                      std::span<const LabelRequest> requests,
                                      const LabelOptions& opt) {
  std::vector<LabelBox> marks;
  marks.reserve(markers.size());
  for (const auto& m : markers) marks.push_back(marker_box(m, opt.marker_radius));

  // Footprints of accepted labels: text box joined with the owning marker.
  std::vector<LabelBox> taken;
  std::vector<PlacedLabel> out;
  out.reserve(requests.size());

  auto try_text = [&](const LabelRequest& rq, const std::string& text, PlacedLabel& pl) {
    const Point& a = markers[rq.anchor];
    for (int c = 0; c < 8; ++c) {
      const LabelBox box = candidate_box(a, text, c, opt);
      const LabelBox foot = box.hull(marks[rq.anchor]);
      bool ok = std::none_of(taken.begin(), taken.end(), [&](const LabelBox& t) { return t.intersects(foot); });
      for (std::size_t m = 0; ok && m < marks.size(); ++m)
        if (m != rq.anchor && marks[m].intersects(box)) ok = false;
      if (ok) {
        pl.text = text;
        pl.box = box;
        pl.candidate = c;
        taken.push_back(foot);
        return true;
      }
    }
    return false;
  };

  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& rq = requests[i];
    if (rq.anchor >= markers.size()) throw std::out_of_range("label anchor out of range");
    PlacedLabel pl;
    pl.request = i;
    if (try_text(rq, rq.text, pl))
      pl.outcome = LabelOutcome::Full;
    else if (!rq.short_text.empty() && rq.short_text != rq.text && try_text(rq, rq.short_text, pl))
      pl.outcome = LabelOutcome::Degraded;
    else
      pl.outcome = LabelOutcome::Dropped;
    out.push_back(std::move(pl));
  }
  return out;
}

void draw_labels(Scene& scene, std::span<const PlacedLabel> placed, const LabelOptions& opt,
                 std::string_view layer) {
  for (const auto& pl : placed) {
    if (pl.outcome == LabelOutcome::Dropped) continue;
    // Baseline sits slightly above the box bottom for the monospace model.
    scene.add(layer, TextPrim{{pl.box.x0, pl.box.y1 - 0.15 * opt.font_size}, pl.text, opt.font_size,
                              TextAnchor::Start, ColorRGB(0, 0, 0), std::nullopt});
  }
}

}  // namespace moralstat::viz
