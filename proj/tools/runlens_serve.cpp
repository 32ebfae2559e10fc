// runlens-serve: read-only HTTP API over an artifact store.

#include "runlens/service.hpp"
#include "runlens/store.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <iostream>

using namespace runlens;

int main(int argc, char** argv) {
  CLI::App app{"runlens-serve: HTTP API over a runlens store"};
  std::string store_dir = "store";
  std::string host = "127.0.0.1";
  std::string ui;
  int port = 8080;
  app.add_option("--store", store_dir, "Artifact store directory")->capture_default_str();
  app.add_option("--port", port, "Port (0 picks a free one)")->capture_default_str()->check(CLI::Range(0, 65535));
  app.add_option("--host", host, "Bind address")->capture_default_str();
  app.add_option("--ui", ui, "Directory with a built UI bundle to serve at /")->check(CLI::ExistingDirectory);
  CLI11_PARSE(app, argc, argv);

  std::unique_ptr<ProfileService> service;
  try {
    const Store store = Store::open(store_dir);
    service = std::make_unique<ProfileService>(Season::build(store.load_summaries(), store.config()));
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  httplib::Server server;
  service->mount(server, ui.empty() ? std::nullopt : std::optional<std::filesystem::path>(ui));
  if (port == 0) port = server.bind_to_any_port(host);
  else if (!server.bind_to_port(host, port)) port = -1;
  if (port < 0) {
    std::cerr << "cannot bind " << host << "\n";
    return 1;
  }
  std::cout << "listening on http://" << host << ":" << port << std::endl;
  return server.listen_after_bind() ? 0 : 1;
}
