#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "moralstat/dataset.hpp"

namespace moralstat::viz {

using data::Point;
using data::Ring;

// Channels clamped to [0, 1] once, at construction.
class ColorRGB {
 public:
  ColorRGB() = default;
  ColorRGB(double r, double g, double b);
  static ColorRGB from_hex(std::string_view hex);

  double r() const { return r_; }
  double g() const { return g_; }
  double b() const { return b_; }
  std::string hex() const;
  // Rec. 709 relative luminance of the (linear) channels.
  double luminance() const;
  // Hue in degrees [0, 360); 0 for greys.
  double hue() const;

  bool operator==(const ColorRGB&) const = default;

 private:
  double r_ = 0.0, g_ = 0.0, b_ = 0.0;
};

ColorRGB lerp(const ColorRGB& a, const ColorRGB& b, double t);

struct Style {
  std::optional<ColorRGB> fill;
  std::optional<ColorRGB> stroke;
  double stroke_width = 1.0;
  double opacity = 1.0;
  bool dashed = false;
};

struct PolygonPrim {
  std::vector<Ring> rings;
  Style style;
  std::optional<int> feature;
};

struct PolylinePrim {
  std::vector<Point> points;
  Style style;
  std::optional<int> feature;
};

enum class MarkerShape { Circle, Square };

struct MarkerPrim {
  Point at;
  double size = 2.5;  // radius / half side
  MarkerShape shape = MarkerShape::Circle;
  Style style;
  std::optional<int> feature;
};

enum class TextAnchor { Start, Middle, End };

struct TextPrim {
  Point at;  // baseline anchor
  std::string text;
  double size = 10.0;
  TextAnchor anchor = TextAnchor::Start;
  ColorRGB color;
  std::optional<int> feature;
};

struct LegendEntry {
  ColorRGB color;
  std::string label;
};

struct LegendPrim {
  Point at;  // top-left
  std::string title;
  std::vector<LegendEntry> entries;
  double swatch = 10.0;
  double font_size = 9.0;
};

using Primitive = std::variant<PolygonPrim, PolylinePrim, MarkerPrim, TextPrim, LegendPrim>;

struct Layer {
  std::string name;
  std::vector<Primitive> items;
};

// Device units, y pointing down.
struct Frame {
  double x = 0.0, y = 0.0, w = 0.0, h = 0.0;
  double right() const { return x + w; }
  double bottom() const { return y + h; }
};

struct Scene {
  double width = 0.0;
  double height = 0.0;
  std::string title;
  std::vector<Layer> layers;
  std::vector<std::string> warnings;

  // Layer with this name, appended at the end when new.
  Layer& layer(std::string_view name);
  const Layer* find_layer(std::string_view name) const;
  void add(std::string_view layer_name, Primitive p) { layer(layer_name).items.push_back(std::move(p)); }
};

// Copies every layer of `src` into `dst`, shifted by (dx, dy); layer names get `prefix`.
void append_scene(Scene& dst, const Scene& src, double dx, double dy, std::string_view prefix = "");

// Fixed 6-decimal text; negative zero prints as zero.
std::string format_fixed(double v);

std::string render_svg(const Scene& scene);
nlohmann::ordered_json scene_to_json(const Scene& scene);

}  // namespace moralstat::viz
