#include <cmath>
#include <sstream>

#include "moralstat/scene.hpp"

namespace moralstat::viz {

namespace {

std::string escape_xml(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string paint(const std::optional<ColorRGB>& c) { return c ? c->hex() : "none"; }

void style_attrs(std::ostream& os, const Style& s) {
  os << " fill=\"" << paint(s.fill) << "\" stroke=\"" << paint(s.stroke) << "\"";
  if (s.stroke) os << " stroke-width=\"" << format_fixed(s.stroke_width) << "\"";
  if (s.opacity < 1.0) os << " opacity=\"" << format_fixed(s.opacity) << "\"";
  if (s.dashed) os << " stroke-dasharray=\"4.000000 3.000000\"";
}

void feature_attr(std::ostream& os, const std::optional<int>& f) {
  if (f) os << " data-code=\"" << *f << "\"";
}

const char* anchor_name(TextAnchor a) {
  switch (a) {
    case TextAnchor::Start: return "start";
    case TextAnchor::Middle: return "middle";
    case TextAnchor::End: return "end";
  }
  return "start";
}

struct SvgWriter {
  std::ostream& os;

  void operator()(const PolygonPrim& p) const {
    os << "<path d=\"";
    bool first_ring = true;
    for (const auto& ring : p.rings) {
      if (ring.empty()) continue;
      if (!first_ring) os << ' ';
      first_ring = false;
      for (std::size_t i = 0; i < ring.size(); ++i) {
        os << (i == 0 ? "M " : " L ") << format_fixed(ring[i].x) << ' ' << format_fixed(ring[i].y);
      }
      os << " Z";
    }
    os << "\" fill-rule=\"evenodd\"";
    style_attrs(os, p.style);
    feature_attr(os, p.feature);
    os << "/>\n";
  }

  void operator()(const PolylinePrim& p) const {
    os << "<polyline points=\"";
    for (std::size_t i = 0; i < p.points.size(); ++i) {
      if (i) os << ' ';
      os << format_fixed(p.points[i].x) << ',' << format_fixed(p.points[i].y);
    }
    os << "\"";
    Style s = p.style;
    s.fill.reset();
    style_attrs(os, s);
    feature_attr(os, p.feature);
    os << "/>\n";
  }

  void operator()(const MarkerPrim& m) const {
    if (m.shape == MarkerShape::Circle) {
      os << "<circle cx=\"" << format_fixed(m.at.x) << "\" cy=\"" << format_fixed(m.at.y)
         << "\" r=\"" << format_fixed(m.size) << "\"";
    } else {
      os << "<rect x=\"" << format_fixed(m.at.x - m.size) << "\" y=\""
         << format_fixed(m.at.y - m.size) << "\" width=\"" << format_fixed(2 * m.size)
         << "\" height=\"" << format_fixed(2 * m.size) << "\"";
    }
    style_attrs(os, m.style);
    feature_attr(os, m.feature);
    os << "/>\n";
  }

  void operator()(const TextPrim& t) const {
    os << "<text x=\"" << format_fixed(t.at.x) << "\" y=\"" << format_fixed(t.at.y)
       << "\" font-size=\"" << format_fixed(t.size) << "\" text-anchor=\"" << anchor_name(t.anchor)
       << "\" fill=\"" << t.color.hex() << "\"";
    feature_attr(os, t.feature);
    os << ">" << escape_xml(t.text) << "</text>\n";
  }

  void operator()(const LegendPrim& l) const {
    os << "<g class=\"legend\">\n";
    double y = l.at.y;
    if (!l.title.empty()) {
      y += l.font_size;
      os << "<text x=\"" << format_fixed(l.at.x) << "\" y=\"" << format_fixed(y)
         << "\" font-size=\"" << format_fixed(l.font_size) << "\" text-anchor=\"start\" fill=\"#000000\">"
         << escape_xml(l.title) << "</text>\n";
      y += 3.0;
    }
    for (const auto& e : l.entries) {
      os << "<rect x=\"" << format_fixed(l.at.x) << "\" y=\"" << format_fixed(y) << "\" width=\""
         << format_fixed(l.swatch) << "\" height=\"" << format_fixed(l.swatch) << "\" fill=\""
         << e.color.hex() << "\" stroke=\"#000000\" stroke-width=\"0.500000\"/>\n";
      os << "<text x=\"" << format_fixed(l.at.x + l.swatch + 4.0) << "\" y=\""
         << format_fixed(y + l.swatch * 0.85) << "\" font-size=\"" << format_fixed(l.font_size)
         << "\" text-anchor=\"start\" fill=\"#000000\">" << escape_xml(e.label) << "</text>\n";
      y += l.swatch + 2.0;
    }
    os << "</g>\n";
  }
};

double round6(double v) {
  double r = std::round(v * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;
}

nlohmann::ordered_json point_json(const Point& p) {
  return nlohmann::ordered_json::array({round6(p.x), round6(p.y)});
}

nlohmann::ordered_json style_json(const Style& s) {
  nlohmann::ordered_json j;
  j["fill"] = s.fill ? s.fill->hex() : "none";
  j["stroke"] = s.stroke ? s.stroke->hex() : "none";
  j["stroke_width"] = round6(s.stroke_width);
  j["opacity"] = round6(s.opacity);
  if (s.dashed) j["dashed"] = true;
  return j;
}

struct JsonWriter {
  nlohmann::ordered_json operator()(const PolygonPrim& p) const {
    nlohmann::ordered_json j;
    j["type"] = "polygon";
    if (p.feature) j["feature"] = *p.feature;
    auto rings = nlohmann::ordered_json::array();
    for (const auto& r : p.rings) {
      auto ring = nlohmann::ordered_json::array();
      for (const auto& pt : r) ring.push_back(point_json(pt));
      rings.push_back(std::move(ring));
    }
    j["rings"] = std::move(rings);
    j["style"] = style_json(p.style);
    return j;
  }
  nlohmann::ordered_json operator()(const PolylinePrim& p) const {
    nlohmann::ordered_json j;
    j["type"] = "polyline";
    if (p.feature) j["feature"] = *p.feature;
    auto pts = nlohmann::ordered_json::array();
    for (const auto& pt : p.points) pts.push_back(point_json(pt));
    j["points"] = std::move(pts);
    j["style"] = style_json(p.style);
    return j;
  }
  nlohmann::ordered_json operator()(const MarkerPrim& m) const {
    nlohmann::ordered_json j;
    j["type"] = "marker";
    if (m.feature) j["feature"] = *m.feature;
    j["at"] = point_json(m.at);
    j["size"] = round6(m.size);
    j["shape"] = m.shape == MarkerShape::Circle ? "circle" : "square";
    j["style"] = style_json(m.style);
    return j;
  }
  nlohmann::ordered_json operator()(const TextPrim& t) const {
    nlohmann::ordered_json j;
    j["type"] = "text";
    if (t.feature) j["feature"] = *t.feature;
    j["at"] = point_json(t.at);
    j["text"] = t.text;
    j["size"] = round6(t.size);
    j["anchor"] = anchor_name(t.anchor);
    j["color"] = t.color.hex();
    return j;
  }
  nlohmann::ordered_json operator()(const LegendPrim& l) const {
    nlohmann::ordered_json j;
    j["type"] = "legend";
    j["at"] = point_json(l.at);
    j["title"] = l.title;
    auto entries = nlohmann::ordered_json::array();
    for (const auto& e : l.entries) entries.push_back({{"color", e.color.hex()}, {"label", e.label}});
    j["entries"] = std::move(entries);
    return j;
  }
};

}  // namespace

std::string render_svg(const Scene& scene) {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << format_fixed(scene.width)
     << "\" height=\"" << format_fixed(scene.height) << "\" viewBox=\"0.000000 0.000000 "
     << format_fixed(scene.width) << ' ' << format_fixed(scene.height) << "\">\n";
  if (!scene.title.empty()) os << "<title>" << escape_xml(scene.title) << "</title>\n";
  SvgWriter w{os};
  for (const auto& layer : scene.layers) {
    os << "<g id=\"" << escape_xml(layer.name) << "\">\n";
    for (const auto& item : layer.items) std::visit(w, item);
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

nlohmann::ordered_json scene_to_json(const Scene& scene) {
  nlohmann::ordered_json j;
  j["width"] = round6(scene.width);
  j["height"] = round6(scene.height);
  j["title"] = scene.title;
  auto layers = nlohmann::ordered_json::array();
  for (const auto& layer : scene.layers) {
    auto items = nlohmann::ordered_json::array();
    for (const auto& item : layer.items) items.push_back(std::visit(JsonWriter{}, item));
    layers.push_back({{"name", layer.name}, {"items", std::move(items)}});
  }
  j["layers"] = std::move(layers);
  j["warnings"] = scene.warnings;
  return j;
}

}  // namespace moralstat::viz
