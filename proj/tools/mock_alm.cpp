// Minimal stand-in for an ALM server. GET /requirements serves a payload
// file; POST /reports stores JSON reports. Prints "listening <port>" once
// ready so callers can bind to port 0.
#include <httplib.h>

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <mutex>
#include <sstream>

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mock ALM endpoint for reqtocode", "mock_alm"};
  std::string host = "127.0.0.1";
  int port = 0;
  std::string payload;
  std::string token;
  std::string reports_dir;
  app.add_option("--host", host);
  app.add_option("--port", port, "0 picks a free port");
  app.add_option("--payload", payload, "JSON served at GET /requirements")
      ->check(CLI::ExistingFile);
  app.add_option("--token", token, "Require this bearer token");
  app.add_option("--reports-dir", reports_dir,
                 "Directory receiving report-<n>.json for each POST");
  CLI11_PARSE(app, argc, argv);

  httplib::Server server;
  std::mutex mu;
  int received = 0;
  std::string latest;

  const auto authorized = [&](const httplib::Request& req,
                              httplib::Response& res) {
    if (token.empty() ||
        req.get_header_value("Authorization") == "Bearer " + token) {
      return true;
    }
    res.status = 401;
    res.set_content(R"({"error":"unauthorized"})", "application/json");
    return false;
  };

  server.Get("/requirements", [&](const httplib::Request& req,
                                  httplib::Response& res) {
    if (!authorized(req, res)) return;
    if (payload.empty()) {
      res.status = 404;
      return;
    }
    // Re-read on every request so tests can edit the payload between syncs.
    res.set_content(read_file(payload), "application/json");
  });

  server.Post("/reports", [&](const httplib::Request& req,
                              httplib::Response& res) {
    if (!authorized(req, res)) return;
    const auto doc = nlohmann::json::parse(req.body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("kind") ||
        !doc.contains("rows")) {
      res.status = 400;
      res.set_content(R"({"accepted":false})", "application/json");
      return;
    }
    std::lock_guard lock(mu);
    ++received;
    latest = req.body;
    if (!reports_dir.empty()) {
      std::ofstream(std::filesystem::path(reports_dir) /
                        ("report-" + std::to_string(received) + ".json"),
                    std::ios::binary)
          << req.body;
    }
    res.status = 201;
    res.set_content(
        nlohmann::json{{"accepted", true}, {"id", received}}.dump(),
        "application/json");
  });

  server.Get("/reports/latest", [&](const httplib::Request&,
                                    httplib::Response& res) {
    std::lock_guard lock(mu);
    if (latest.empty()) {
      res.status = 404;
      return;
    }
    res.set_content(latest, "application/json");
  });

  server.Post("/shutdown", [&](const httplib::Request&, httplib::Response&) {
    server.stop();
  });

  const int bound = port == 0 ? server.bind_to_any_port(host)
                              : (server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    std::cerr << "mock_alm: cannot bind " << host << ":" << port << '\n';
    return 2;
  }
  std::cout << "listening " << bound << std::endl;
  return server.listen_after_bind() ? 0 : 2;
}
