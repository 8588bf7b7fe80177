#include "moralstat/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "moralstat/app.hpp"
#include "moralstat/error.hpp"

namespace moralstat::cli {

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << bytes)) throw UsageError("cannot write " + path.string());
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Moral statistics of France: figures, reports and the explorer bundle"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "moralstat 1.0");

  app::RunConfig cfg = app::default_config();
  std::string dataset = cfg.dataset.string(), basemap = cfg.basemap.string(), arbuthnot = cfg.arbuthnot.string();
  std::string out_path;

  auto add_inputs = [&](CLI::App* sub, bool map) {
    sub->add_option("--dataset", dataset, "Guerry table (CSV)")->capture_default_str();
    if (map) sub->add_option("--basemap", basemap, "1830 base map (GeoJSON)")->capture_default_str();
  };

  // figure
  auto* fig = app.add_subcommand("figure", "Render a registry figure to SVG plus a JSON report");
  std::string figure_id;
  std::optional<double> span, alpha, coverage, overlap;
  std::uint64_t seed = app::kDefaultSeed;
  fig->add_option("--figure", figure_id, "Figure id (fig1, fig4, fig8, fig12..fig22) or 'all'")->required();
  add_inputs(fig, true);
  fig->add_option("--arbuthnot", arbuthnot, "Arbuthnot table for fig1 (optional)")->capture_default_str();
  fig->add_option("--out", out_path, "Output directory")->default_str(".");
  fig->add_option("--span", span, "Loess span (fig1, fig12, fig13)");
  fig->add_option("--alpha", alpha, "Roy test level for HE scaling (fig16)");
  fig->add_option("--coverage", coverage, "Ellipse coverage for labels or circles (fig12, fig15, fig16)");
  fig->add_option("--overlap", overlap, "Shingle overlap (fig21)");
  fig->add_option("--seed", seed, "Seed for Monte Carlo checks")->capture_default_str();

  // stats
  auto* stats = app.add_subcommand("stats", "Print a statistics report as JSON");
  std::string kind;
  std::string variables;
  stats->add_option("kind", kind, "manova, pca, cda, varimax or regression")
      ->required()
      ->check(CLI::IsMember(app::stats_kinds()));
  add_inputs(stats, false);
  stats->add_option("--variables", variables, "Comma-separated columns (pca only)");

  // export
  auto* exp = app.add_subcommand("export", "Write the explorer JSON bundle");
  add_inputs(exp, true);
  exp->add_option("--out", out_path, "Bundle path")->default_str("bundle.json");

  // serve
  auto* serve = app.add_subcommand("serve", "Serve the explorer assets and bundle over HTTP GET");
  add_inputs(serve, true);
  std::string bundle_path, assets_dir, host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--bundle", bundle_path, "Previously exported bundle (default: build in memory)");
  serve->add_option("--assets", assets_dir, "Directory of explorer assets");
  serve->add_option("--port", port, "TCP port")->capture_default_str()->check(CLI::Range(0, 65535));
  serve->add_option("--host", host, "Bind address")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  cfg.dataset = dataset;
  cfg.basemap = basemap;
  cfg.arbuthnot = arbuthnot;
  cfg.seed = seed;

  try {
    if (*fig) {
      app::FigureParams params;
      if (span) params["span"] = *span;
      if (alpha) params["alpha"] = *alpha;
      if (coverage) params["coverage"] = *coverage;
      if (overlap) params["overlap"] = *overlap;
      std::vector<std::string> ids;
      if (figure_id == "all")
        ids = app::figure_ids();
      else
        ids = {figure_id};
      for (const auto& id : ids) app::figure_params(id);  // reject unknown ids before loading
      const auto inputs = app::load_inputs(cfg, true);
      const std::filesystem::path dir = out_path.empty() ? "." : out_path;
      for (const auto& id : ids) {
        app::FigureParams own;
        const auto& allowed = app::figure_params(id);
        for (const auto& [k, v] : params)
          if (ids.size() == 1 || std::find(allowed.begin(), allowed.end(), k) != allowed.end()) own[k] = v;
        const auto figure = app::build_figure(id, inputs, own);
        if (!figure.scene) err << id << ": skipped: " << figure.report.value("skipped", "") << "\n";
        for (const auto& p : app::write_figure(figure, dir)) out << p.string() << "\n";
      }
    } else if (*stats) {
      app::validate_config(cfg, false);
      data::LoadOptions lo;
      const auto vars = split_list(variables);
      if (!vars.empty()) lo.require_moral_variables = false;
      const auto ds = data::load_dataset_file(cfg.dataset.string(), lo).sorted_by_code();
      out << app::dump_json(app::stats_report(kind, ds, vars));
    } else if (*exp) {
      const auto inputs = app::load_inputs(cfg, true);
      const std::filesystem::path path = out_path.empty() ? "bundle.json" : out_path;
      write_file(path, app::dump_json(app::explorer_bundle(inputs.dataset, inputs.basemap)));
      out << path.string() << "\n";
    } else if (*serve) {
      std::string bytes;
      if (!bundle_path.empty()) {
        std::ifstream f(bundle_path, std::ios::binary);
        if (!f) throw DataError("bundle missing: " + bundle_path);
        std::ostringstream ss;
        ss << f.rdbuf();
        bytes = ss.str();
      } else {
        const auto inputs = app::load_inputs(cfg, true);
        bytes = app::dump_json(app::explorer_bundle(inputs.dataset, inputs.basemap));
      }
      std::optional<std::filesystem::path> dir;
      if (!assets_dir.empty()) {
        if (!std::filesystem::is_directory(assets_dir)) throw DataError("assets directory missing: " + assets_dir);
        dir = assets_dir;
      }
      app::StaticServer server(app::collect_assets(bytes, dir));
      const int bound = server.bind(host, port);
      if (bound < 0) throw UsageError("cannot bind " + host + ":" + std::to_string(port) + " (port busy?)");
      out << "serving on http://" << host << ":" << bound << "/" << std::endl;
      server.listen();
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace moralstat::cli
