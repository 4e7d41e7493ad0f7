// cvp_serve: HTTP service for interactive scribble rounds.

#include <csignal>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "httplib.h"

#include "cvp/service.hpp"

namespace {
httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Session service for convexity-constrained segmentation"};
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
  int idle_ttl = 3600;
  app.add_option("--host", host, "bind address");
  app.add_option("--port", port, "port (0 picks a free one)");
  app.add_option("--static-dir", static_dir, "directory served at /");
  app.add_option("--idle-ttl", idle_ttl, "seconds before an idle session is evicted");
  CLI11_PARSE(app, argc, argv);

  cvp::service::Options opts;
  opts.idle_ttl = std::chrono::seconds(idle_ttl);
  cvp::service::Service service(opts);
  httplib::Server server;
  service.install(server, static_dir);

  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  if (port == 0) {
    port = server.bind_to_any_port(host);
  } else if (!server.bind_to_port(host, port)) {
    std::fprintf(stderr, "error: cannot bind %s:%d\n", host.c_str(), port);
    return 2;
  }
  if (port < 0) {
    std::fprintf(stderr, "error: cannot bind %s\n", host.c_str());
    return 2;
  }
  std::printf("listening on http://%s:%d/v1\n", host.c_str(), port);
  std::fflush(stdout);
  server.listen_after_bind();
  return 0;
}
