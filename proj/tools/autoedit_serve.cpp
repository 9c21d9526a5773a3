#include <cstdio>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>

#include "autoedit/service.hpp"

int main(int argc, char** argv) {
  CLI::App app{"REST service for interactive edit tuning"};
  std::string host = "127.0.0.1";
  int port = 8080;
  app.add_option("--host", host, "Address to bind");
  app.add_option("--port", port, "Port to listen on");
  CLI11_PARSE(app, argc, argv);

  autoedit::EditService service;
  httplib::Server server;
  service.mount(server);
  std::printf("listening on %s:%d\n", host.c_str(), port);
  std::fflush(stdout);
  if (!server.listen(host, port)) {
    std::fprintf(stderr, "error: cannot listen on %s:%d\n", host.c_str(), port);
    return 1;
  }
  return 0;
}
