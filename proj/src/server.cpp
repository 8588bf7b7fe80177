#include <fstream>
#include <map>
#include <sstream>

// Eigen must precede httplib: <resolv.h> defines a _res macro.
#include "moralstat/app.hpp"

#include "httplib.h"

namespace moralstat::app {

std::string content_type_for(std::string_view path) {
  static const std::map<std::string, std::string, std::less<>> types = {
      {".html", "text/html; charset=utf-8"},  {".js", "text/javascript; charset=utf-8"},
      {".mjs", "text/javascript; charset=utf-8"}, {".css", "text/css; charset=utf-8"},
      {".json", "application/json"},          {".svg", "image/svg+xml"},
      {".png", "image/png"},                  {".ico", "image/x-icon"},
      {".txt", "text/plain; charset=utf-8"},  {".map", "application/json"}};
  const auto dot = path.rfind('.');
  if (dot != std::string_view::npos && path.find('/', dot) == std::string_view::npos)
    if (auto it = types.find(path.substr(dot)); it != types.end()) return it->second;
  return "application/octet-stream";
}

std::vector<StaticAsset> collect_assets(const std::string& bundle_bytes,
                                        const std::optional<std::filesystem::path>& dir) {
  std::vector<StaticAsset> out;
  if (dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(*dir))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::ifstream in(f, std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      const std::string url = "/" + std::filesystem::relative(f, *dir).generic_string();
      out.push_back({url, ss.str(), content_type_for(url)});
    }
  }
  out.push_back({"/bundle.json", bundle_bytes, content_type_for("/bundle.json")});
  return out;
}

struct StaticServer::Impl {
  std::map<std::string, StaticAsset> assets;  // immutable after construction
  httplib::Server server;
};

StaticServer::StaticServer(std::vector<StaticAsset> assets) : impl_(std::make_unique<Impl>()) {
  for (auto& a : assets) impl_->assets[a.path] = std::move(a);
  if (auto it = impl_->assets.find("/index.html"); it != impl_->assets.end()) impl_->assets["/"] = it->second;
  const auto* table = &impl_->assets;
  impl_->server.Get(".*", [table](const httplib::Request& req, httplib::Response& res) {
    auto it = table->find(req.path);
    if (it == table->end()) {
      res.status = 404;
      res.set_content("not found\n", "text/plain");
      return;
    }
    res.set_content(it->second.body, it->second.content_type);
  });
  auto refuse = [](const httplib::Request&, httplib::Response& res) {
    res.status = 405;
    res.set_header("Allow", "GET, HEAD");
    res.set_content("method not allowed\n", "text/plain");
  };
  impl_->server.Post(".*", refuse);
  impl_->server.Put(".*", refuse);
  impl_->server.Delete(".*", refuse);
  impl_->server.Patch(".*", refuse);
}

StaticServer::~StaticServer() { stop(); }

int StaticServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

void StaticServer::listen() { impl_->server.listen_after_bind(); }

void StaticServer::stop() {
  if (impl_) impl_->server.stop();
}

bool StaticServer::running() const { return impl_->server.is_running(); }

}  // namespace moralstat::app
