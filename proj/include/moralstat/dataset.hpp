#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace moralstat::data {

// Regions of France in 1830. Corsica is its own level.
enum class Region : char {
  Central = 'C',
  East = 'E',
  North = 'N',
  South = 'S',
  West = 'W',
  Other = 'X',
};

inline constexpr std::array<Region, 6> kAllRegions = {
    Region::Central, Region::East, Region::North,
    Region::South,   Region::West, Region::Other};

std::optional<Region> region_from_letter(char letter);
char region_letter(Region r);
std::string_view region_name(Region r);

// Code -> region for all 86 départements of 1830 (Corsica = 200).
const std::map<int, Region>& reference_regions();
std::optional<Region> reference_region(int code);

inline constexpr int kCorsica = 200;

enum class VariableKind { PopPerEvent, Percent, RankIndex, Opaque };

struct VariableMeta {
  std::string name;
  VariableKind kind = VariableKind::Opaque;
  bool more_is_better = true;
};

// The six moral variables, in the order used throughout the analyses.
inline constexpr std::array<std::string_view, 6> kMoralVariables = {
    "Crime_pers", "Crime_prop", "Literacy", "Donations", "Infants", "Suicides"};

// Metadata for a known column name; Opaque for anything else.
VariableMeta describe_variable(std::string_view name);

struct DepartementRecord {
  int code = 0;
  std::string name;
  Region region = Region::Other;
  std::vector<double> values;  // aligned with MoralDataset::variables()

  bool operator==(const DepartementRecord&) const = default;
};

class MoralDataset {
 public:
  MoralDataset() = default;
  MoralDataset(std::vector<VariableMeta> variables, std::vector<DepartementRecord> records);

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  const std::vector<DepartementRecord>& records() const { return records_; }
  const std::vector<VariableMeta>& variables() const { return variables_; }
  const DepartementRecord& operator[](std::size_t i) const { return records_[i]; }

  std::optional<std::size_t> variable_index(std::string_view name) const;
  bool has_variable(std::string_view name) const { return variable_index(name).has_value(); }
  const VariableMeta& variable(std::string_view name) const;

  double value(std::size_t row, std::string_view name) const;
  Eigen::VectorXd column(std::string_view name) const;
  Eigen::MatrixXd columns(std::span<const std::string> names) const;
  Eigen::MatrixXd columns(std::span<const std::string_view> names) const;

  std::vector<int> codes() const;
  std::vector<Region> regions() const;
  std::vector<std::string> names() const;
  std::optional<std::size_t> find(int code) const;

  // Records for which keep(record) is true, in the same order.
  template <class Pred>
  MoralDataset filter(Pred keep) const {
    std::vector<DepartementRecord> out;
    for (const auto& r : records_)
      if (keep(r)) out.push_back(r);
    return MoralDataset(variables_, std::move(out));
  }

  // Same records ordered by département code.
  MoralDataset sorted_by_code() const;

  bool operator==(const MoralDataset&) const;

 private:
  std::vector<VariableMeta> variables_;
  std::vector<DepartementRecord> records_;
};

struct LoadOptions {
  // source column name -> canonical name
  std::map<std::string, std::string, std::less<>> rename;
  // Require the six moral variables (off for ad-hoc toy tables).
  bool require_moral_variables = true;
};

MoralDataset load_dataset(std::istream& in, const LoadOptions& options = {});
MoralDataset load_dataset_file(const std::string& path, const LoadOptions& options = {});
void write_dataset(std::ostream& out, const MoralDataset& ds);

enum class Direction { MoreIsBetter, CrimeRate };

Eigen::VectorXd direction_transform(const MoralDataset& ds, std::string_view variable,
                                    Direction target);

// ---------------------------------------------------------------------------
// Base map

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

using Ring = std::vector<Point>;

struct Bounds {
  double min_x, min_y, max_x, max_y;
  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
};

struct MapFeature {
  int code = 0;
  std::string name;
  std::vector<Ring> rings;  // closed; holes are ordinary rings (even-odd fill)
};

class BaseMap {
 public:
  BaseMap() = default;
  explicit BaseMap(std::vector<MapFeature> features);

  const std::vector<MapFeature>& features() const { return features_; }
  std::size_t size() const { return features_.size(); }
  const MapFeature* find(int code) const;
  Bounds bounds() const;

 private:
  std::vector<MapFeature> features_;
};

BaseMap load_basemap(std::istream& in, std::string_view code_property = "dept");
BaseMap load_basemap_file(const std::string& path, std::string_view code_property = "dept");

}  // namespace moralstat::data
