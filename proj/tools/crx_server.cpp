#include <chrono>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "crx/http_server.hpp"

int main(int argc, char** argv) {
  CLI::App app{"HTTP service for cited-reference exploration sessions"};
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
  int ttl_minutes = 60;
  app.add_option("--host", host, "Address to listen on");
  app.add_option("--port", port, "Port to listen on")->check(CLI::Range(1, 65535));
  app.add_option("--static", static_dir, "Directory with the browser bundle")->check(CLI::ExistingDirectory);
  app.add_option("--session-ttl", ttl_minutes, "Idle minutes before a session is dropped")
      ->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  crx::api::ApiService service{std::chrono::minutes(ttl_minutes)};
  httplib::Server server;
  crx::api::bind(server, service, static_dir);
  std::cout << "listening on http://" << host << ":" << port << std::endl;
  if (!server.listen(host, port)) {
    std::cerr << "crx-server: cannot listen on " << host << ":" << port << std::endl;
    return 1;
  }
  return 0;
}
