#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "moralstat/dataset.hpp"
#include "moralstat/geoviz.hpp"

namespace moralstat::app {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kSchema = "moralstat/1";
inline constexpr std::uint64_t kDefaultSeed = 1833;

std::filesystem::path default_data_dir();

struct RunConfig {
  std::filesystem::path dataset;
  std::filesystem::path basemap;
  std::filesystem::path arbuthnot;  // optional fixture
  std::filesystem::path out_dir = ".";
  std::uint64_t seed = kDefaultSeed;
};

// Paths default to the vendored fixtures.
RunConfig default_config();

// Existence and readability of the configured inputs (DataError otherwise).
void validate_config(const RunConfig& config, bool need_basemap);

struct ArbuthnotRow {
  int year = 0;
  double males = 0.0;
  double females = 0.0;
};

std::vector<ArbuthnotRow> load_arbuthnot(std::istream& in);

struct Inputs {
  data::MoralDataset dataset;
  data::BaseMap basemap;
  std::optional<std::vector<ArbuthnotRow>> arbuthnot;
  std::uint64_t seed = kDefaultSeed;
};

Inputs load_inputs(const RunConfig& config, bool need_basemap = true);

// ---------------------------------------------------------------------------
// Reports

// Rounds to 9 significant digits.
double sig9(double v);
Json sig9_array(const Eigen::VectorXd& v);
Json sig9_matrix(const Eigen::MatrixXd& m);

std::string dump_json(const Json& j);

inline const std::vector<std::string>& stats_kinds() {
  static const std::vector<std::string> kinds = {"manova", "pca", "cda", "varimax", "regression"};
  return kinds;
}

// `variables` overrides the analyzed columns (pca only); empty = the six moral variables.
Json stats_report(std::string_view kind, const data::MoralDataset& ds,
                  const std::vector<std::string>& variables = {});

Json manova_report(const data::MoralDataset& ds, double alpha = 0.05);
Json pca_report(const data::MoralDataset& ds, const std::vector<std::string>& variables);
Json cda_report(const data::MoralDataset& ds);
Json varimax_report(const data::MoralDataset& ds);
Json regression_report(const data::MoralDataset& ds);

// Analyses shared by figures and reports.
std::vector<std::string> moral_variables();
data::MoralDataset mainland(const data::MoralDataset& ds);
std::vector<std::string> region_labels(const data::MoralDataset& ds);
mv::PcaResult moral_pca(const data::MoralDataset& ds);
mv::VarimaxResult moral_varimax(const data::MoralDataset& ds);
mv::CdaResult moral_cda(const data::MoralDataset& ds);
// Codes of the `count` départements furthest from their region centroid in the biplot plane.
std::vector<int> biplot_outliers(const data::MoralDataset& ds, std::size_t count = 5);

// ---------------------------------------------------------------------------
// Figures

using FigureParams = std::map<std::string, double>;

const std::vector<std::string>& figure_ids();
// Parameter keys a figure accepts.
const std::vector<std::string>& figure_params(std::string_view id);

struct FigureOutput {
  std::string id;
  std::optional<viz::Scene> scene;  // empty when the figure was skipped
  Json report;
};

FigureOutput build_figure(std::string_view id, const Inputs& inputs, const FigureParams& params = {});

// Writes <id>.svg and <id>.json into out_dir; returns the written paths.
std::vector<std::filesystem::path> write_figure(const FigureOutput& fig, const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------
// Explorer bundle

std::vector<data::Point> douglas_peucker(const std::vector<data::Point>& pts, double tolerance);

Json explorer_bundle(const data::MoralDataset& ds, const data::BaseMap& map);

// The cc-map sidecar model shared with the fig21 report.
Json ccmap_model_json(const data::MoralDataset& ds, const std::string& response, const std::string& given_x,
                      const std::string& given_y, int kx, int ky, double overlap);

// ---------------------------------------------------------------------------
// Static server

struct StaticAsset {
  std::string path;  // URL path, leading slash
  std::string body;
  std::string content_type;
};

std::string content_type_for(std::string_view path);

// Every regular file under `dir` plus /bundle.json.
std::vector<StaticAsset> collect_assets(const std::string& bundle_bytes,
                                        const std::optional<std::filesystem::path>& dir);

class StaticServer {
 public:
  explicit StaticServer(std::vector<StaticAsset> assets);
  ~StaticServer();
  StaticServer(const StaticServer&) = delete;
  StaticServer& operator=(const StaticServer&) = delete;

  // Binds to host:port (port 0 picks a free one); returns the bound port or -1.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace moralstat::app
