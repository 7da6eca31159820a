#include "traffnet/gateway/server.hpp"

#include <httplib.h>
#include <json.hpp>

namespace traffnet::gateway {

namespace {

void reply(httplib::Response& res, const Response& r) {
  res.status = r.status;
  res.set_content(r.body, "application/json");
}

}  // namespace

void register_routes(httplib::Server& server, Session& session) {
  server.Get("/network", [&](const httplib::Request&, httplib::Response& res) { reply(res, session.network()); });
  server.Get("/state", [&](const httplib::Request&, httplib::Response& res) { reply(res, session.state()); });
  server.Post("/step", [&](const httplib::Request&, httplib::Response& res) { reply(res, session.step()); });
  server.Get("/forecast", [&](const httplib::Request&, httplib::Response& res) { reply(res, session.forecast()); });
  server.Post("/whatif", [&](const httplib::Request& req, httplib::Response& res) {
    reply(res, session.whatif(req.body));
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    res.status = 500;
    nlohmann::ordered_json j;
    j["schema_version"] = kApiSchemaVersion;
    j["error"] = what;
    res.set_content(j.dump(), "application/json");
  });
}

void serve(Session& session, const std::string& host, int port) {
  httplib::Server server;
  register_routes(server, session);
  if (!server.listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace traffnet::gateway
