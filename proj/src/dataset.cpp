#include "moralstat/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

#include "csv.hpp"
#include "moralstat/error.hpp"

namespace moralstat::data {

namespace {

std::string row_col(std::size_t line, std::string_view column) {
  std::ostringstream os;
  os << "line " << line << ", column '" << column << "'";
  return os.str();
}

}  // namespace

std::optional<Region> region_from_letter(char letter) {
  for (Region r : kAllRegions)
    if (static_cast<char>(r) == letter) return r;
  return std::nullopt;
}

char region_letter(Region r) { return static_cast<char>(r); }

std::string_view region_name(Region r) {
  switch (r) {
    case Region::Central: return "Central";
    case Region::East: return "East";
    case Region::North: return "North";
    case Region::South: return "South";
    case Region::West: return "West";
    case Region::Other: return "Other";
  }
  return "Other";
}

const std::map<int, Region>& reference_regions() {
  static const std::map<int, Region> table = [] {
    std::map<int, Region> t;
    auto add = [&t](Region r, std::initializer_list<int> codes) {
      for (int c : codes) t.emplace(c, r);
    };
    add(Region::Central, {3, 15, 18, 19, 23, 28, 36, 37, 41, 42, 43, 45, 58, 63, 72, 87, 89});
    add(Region::East, {1, 4, 5, 10, 21, 25, 26, 38, 39, 52, 54, 67, 68, 69, 70, 71, 88});
    add(Region::North, {2, 8, 14, 27, 50, 51, 55, 57, 59, 60, 61, 62, 75, 76, 77, 78, 80});
    add(Region::South, {7, 9, 11, 12, 13, 30, 31, 32, 34, 46, 48, 65, 66, 81, 82, 83, 84});
    add(Region::West, {16, 17, 22, 24, 29, 33, 35, 40, 44, 47, 49, 53, 56, 64, 79, 85, 86});
    add(Region::Other, {kCorsica});
    return t;
  }();
  return table;
}

std::optional<Region> reference_region(int code) {
  const auto& t = reference_regions();
  auto it = t.find(code);
  if (it == t.end()) return std::nullopt;
  return it->second;
}

VariableMeta describe_variable(std::string_view name) {
  static const std::map<std::string, VariableMeta, std::less<>> known = {
      {"Crime_pers", {"Crime_pers", VariableKind::PopPerEvent, true}},
      {"Crime_prop", {"Crime_prop", VariableKind::PopPerEvent, true}},
      {"Literacy", {"Literacy", VariableKind::Percent, true}},
      {"Donations", {"Donations", VariableKind::PopPerEvent, true}},
      {"Infants", {"Infants", VariableKind::PopPerEvent, true}},
      {"Suicides", {"Suicides", VariableKind::PopPerEvent, true}},
      // rank of taxes per inhabitant, 1 = wealthiest
      {"Wealth", {"Wealth", VariableKind::RankIndex, false}},
  };
  if (auto it = known.find(name); it != known.end()) return it->second;
  return VariableMeta{std::string(name), VariableKind::Opaque, true};
}

// ---------------------------------------------------------------------------

MoralDataset::MoralDataset(std::vector<VariableMeta> variables,
                           std::vector<DepartementRecord> records)
    : variables_(std::move(variables)), records_(std::move(records)) {
  std::set<std::string> seen_names;
  for (const auto& v : variables_)
    if (!seen_names.insert(v.name).second)
      throw DataError("duplicate variable '" + v.name + "'");
  std::set<int> seen_codes;
  for (const auto& r : records_) {
    if (!seen_codes.insert(r.code).second)
      throw DataError("duplicate département code " + std::to_string(r.code));
    if (r.values.size() != variables_.size())
      throw DataError("record " + std::to_string(r.code) + " has " +
                      std::to_string(r.values.size()) + " values, expected " +
                      std::to_string(variables_.size()));
  }
}

std::optional<std::size_t> MoralDataset::variable_index(std::string_view name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i)
    if (variables_[i].name == name) return i;
  return std::nullopt;
}

const VariableMeta& MoralDataset::variable(std::string_view name) const {
  auto idx = variable_index(name);
  if (!idx) throw DataError("unknown variable '" + std::string(name) + "'");
  return variables_[*idx];
}

double MoralDataset::value(std::size_t row, std::string_view name) const {
  auto idx = variable_index(name);
  if (!idx) throw DataError("unknown variable '" + std::string(name) + "'");
  return records_.at(row).values[*idx];
}

Eigen::VectorXd MoralDataset::column(std::string_view name) const {
  auto idx = variable_index(name);
  if (!idx) throw DataError("unknown variable '" + std::string(name) + "'");
  Eigen::VectorXd out(static_cast<Eigen::Index>(records_.size()));
  for (std::size_t i = 0; i < records_.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = records_[i].values[*idx];
  return out;
}

Eigen::MatrixXd MoralDataset::columns(std::span<const std::string> names) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(records_.size()),
                      static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = column(names[j]);
  return out;
}

Eigen::MatrixXd MoralDataset::columns(std::span<const std::string_view> names) const {
  std::vector<std::string> owned(names.begin(), names.end());
  return columns(std::span<const std::string>(owned));
}

std::vector<int> MoralDataset::codes() const {
  std::vector<int> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.code);
  return out;
}

std::vector<Region> MoralDataset::regions() const {
  std::vector<Region> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.region);
  return out;
}

std::vector<std::string> MoralDataset::names() const {
  std::vector<std::string> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.name);
  return out;
}

std::optional<std::size_t> MoralDataset::find(int code) const {
  for (std::size_t i = 0; i < records_.size(); ++i)
    if (records_[i].code == code) return i;
  return std::nullopt;
}

MoralDataset MoralDataset::sorted_by_code() const {
  auto recs = records_;
  std::sort(recs.begin(), recs.end(),
            [](const auto& a, const auto& b) { return a.code < b.code; });
  return MoralDataset(variables_, std::move(recs));
}

bool MoralDataset::operator==(const MoralDataset& other) const {
  if (variables_.size() != other.variables_.size()) return false;
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    const auto& a = variables_[i];
    const auto& b = other.variables_[i];
    if (a.name != b.name || a.kind != b.kind || a.more_is_better != b.more_is_better) return false;
  }
  return records_ == other.records_;
}

// ---------------------------------------------------------------------------

MoralDataset load_dataset(std::istream& in, const LoadOptions& options) {
  auto rows = csv::read_all(in);
  if (rows.empty()) throw DataError("empty input: no header row");

  std::vector<std::string> header = rows.front();
  for (auto& h : header) {
    if (auto it = options.rename.find(h); it != options.rename.end()) h = it->second;
  }

  std::optional<std::size_t> code_col, region_col, name_col;
  std::vector<std::size_t> value_cols;
  std::vector<VariableMeta> vars;
  for (std::size_t j = 0; j < header.size(); ++j) {
    const auto& h = header[j];
    if (h == "dept") {
      code_col = j;
    } else if (h == "Region") {
      region_col = j;
    } else if (h == "name" || h == "Department") {
      name_col = j;
    } else {
      value_cols.push_back(j);
      vars.push_back(describe_variable(h));
    }
  }
  if (!code_col) throw DataError("missing column 'dept' in header");
  if (!region_col) throw DataError("missing column 'Region' in header");
  if (options.require_moral_variables) {
    for (auto v : kMoralVariables)
      if (std::find(header.begin(), header.end(), v) == header.end())
        throw DataError("missing column '" + std::string(v) + "' in header");
  }
  if (rows.size() == 1) throw DataError("empty dataset: header has no data rows");

  std::vector<DepartementRecord> records;
  std::set<int> seen;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const std::size_t line = i + 1;
    if (row.size() != header.size())
      throw DataError("line " + std::to_string(line) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(row.size()));
    DepartementRecord rec;
    auto code = csv::parse_number(row[*code_col]);
    if (!code || *code != std::floor(*code))
      throw DataError(row_col(line, "dept") + ": invalid département code '" + row[*code_col] + "'");
    rec.code = static_cast<int>(*code);
    if (!seen.insert(rec.code).second)
      throw DataError(row_col(line, "dept") + ": duplicate département code " +
                      std::to_string(rec.code));

    const auto& reg = row[*region_col];
    auto region = reg.size() == 1 ? region_from_letter(reg[0]) : std::nullopt;
    if (!region)
      throw DataError(row_col(line, "Region") + ": unknown region code '" + reg + "'");
    if (auto expected = reference_region(rec.code); expected && *expected != *region)
      throw DataError(row_col(line, "Region") + ": département " + std::to_string(rec.code) +
                      " belongs to region " + region_letter(*expected) + ", not " + reg);
    rec.region = *region;
    if (name_col) rec.name = row[*name_col];

    rec.values.reserve(value_cols.size());
    for (std::size_t k = 0; k < value_cols.size(); ++k) {
      const auto& cell = row[value_cols[k]];
      auto v = csv::parse_number(cell);
      if (!v)
        throw DataError(row_col(line, header[value_cols[k]]) + ": non-numeric cell '" + cell + "'");
      rec.values.push_back(*v);
    }
    records.push_back(std::move(rec));
  }
  return MoralDataset(std::move(vars), std::move(records));
}

MoralDataset load_dataset_file(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path + "'");
  return load_dataset(in, options);
}

void write_dataset(std::ostream& out, const MoralDataset& ds) {
  out << "dept,Region,name";
  for (const auto& v : ds.variables()) out << ',' << csv::quote_if_needed(v.name);
  out << '\n';
  for (const auto& r : ds.records()) {
    out << r.code << ',' << region_letter(r.region) << ',' << csv::quote_if_needed(r.name);
    for (double v : r.values) out << ',' << csv::format_number(v);
    out << '\n';
  }
}

Eigen::VectorXd direction_transform(const MoralDataset& ds, std::string_view variable,
                                    Direction target) {
  const auto& meta = ds.variable(variable);
  Eigen::VectorXd v = ds.column(variable);
  if (target == Direction::MoreIsBetter) return v;
  if (meta.kind != VariableKind::PopPerEvent)
    throw DataError("crime-rate reciprocal requested for '" + meta.name +
                    "', which is not a population-per-event variable");
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) == 0.0)
      throw DataError("crime-rate reciprocal of zero in '" + meta.name + "' for département " +
                      std::to_string(ds[static_cast<std::size_t>(i)].code));
    v(i) = 1.0 / v(i);
  }
  return v;
}

// ---------------------------------------------------------------------------

BaseMap::BaseMap(std::vector<MapFeature> features) : features_(std::move(features)) {
  std::set<int> seen;
  for (const auto& f : features_) {
    if (!seen.insert(f.code).second)
      throw DataError("duplicate feature code " + std::to_string(f.code) + " in base map");
    for (const auto& ring : f.rings) {
      if (ring.size() < 4 || !(ring.front() == ring.back()))
        throw DataError("feature " + std::to_string(f.code) + ": ring is not closed");
    }
  }
}

const MapFeature* BaseMap::find(int code) const {
  for (const auto& f : features_)
    if (f.code == code) return &f;
  return nullptr;
}

Bounds BaseMap::bounds() const {
  Bounds b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& f : features_)
    for (const auto& ring : f.rings)
      for (const auto& p : ring) {
        b.min_x = std::min(b.min_x, p.x);
        b.min_y = std::min(b.min_y, p.y);
        b.max_x = std::max(b.max_x, p.x);
        b.max_y = std::max(b.max_y, p.y);
      }
  if (features_.empty()) b = {0, 0, 1, 1};
  return b;
}

namespace {

Ring parse_ring(const nlohmann::json& coords, std::size_t feature) {
  Ring ring;
  for (const auto& pt : coords) {
    if (!pt.is_array() || pt.size() < 2 || !pt[0].is_number() || !pt[1].is_number())
      throw DataError("feature " + std::to_string(feature) + ": malformed coordinate");
    ring.push_back({pt[0].get<double>(), pt[1].get<double>()});
  }
  if (ring.size() < 4 || !(ring.front() == ring.back()))
    throw DataError("feature " + std::to_string(feature) + ": unclosed ring");
  return ring;
}

}  // namespace

BaseMap load_basemap(std::istream& in, std::string_view code_property) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("invalid GeoJSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array())
    throw DataError("GeoJSON input is not a FeatureCollection");

  std::vector<MapFeature> features;
  const auto& feats = doc["features"];
  for (std::size_t i = 0; i < feats.size(); ++i) {
    const auto& f = feats[i];
    const std::string prop(code_property);
    if (!f.contains("properties") || !f["properties"].is_object() ||
        !f["properties"].contains(prop))
      throw DataError("feature " + std::to_string(i) + ": missing '" + prop + "' property");
    const auto& code = f["properties"][prop];
    MapFeature mf;
    if (code.is_number_integer()) {
      mf.code = code.get<int>();
    } else if (code.is_number() && code.get<double>() == std::floor(code.get<double>())) {
      mf.code = static_cast<int>(code.get<double>());
    } else {
      throw DataError("feature " + std::to_string(i) + ": '" + prop + "' is not an integer");
    }
    if (f["properties"].contains("name") && f["properties"]["name"].is_string())
      mf.name = f["properties"]["name"].get<std::string>();

    if (!f.contains("geometry") || !f["geometry"].is_object())
      throw DataError("feature " + std::to_string(i) + ": missing geometry");
    const auto& g = f["geometry"];
    const std::string type = g.value("type", "");
    if (type == "Polygon") {
      for (const auto& ring : g["coordinates"]) mf.rings.push_back(parse_ring(ring, i));
    } else if (type == "MultiPolygon") {
      for (const auto& poly : g["coordinates"])
        for (const auto& ring : poly) mf.rings.push_back(parse_ring(ring, i));
    } else {
      throw DataError("feature " + std::to_string(i) + ": geometry type '" + type +
                      "' is not polygonal");
    }
    features.push_back(std::move(mf));
  }
  return BaseMap(std::move(features));
}

BaseMap load_basemap_file(const std::string& path, std::string_view code_property) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open base map '" + path + "'");
  return load_basemap(in, code_property);
}

}  // namespace moralstat::data
