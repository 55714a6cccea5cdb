#include "uuaudit/service/http.hpp"

#include <cstdlib>
#include <string>

// Before httplib.h: resolv.h defines a `_res` macro that breaks Eigen.
#include "uuaudit/errors.hpp"
#include "uuaudit/service/session.hpp"

#include <httplib.h>
#include <json.hpp>

namespace uuaudit::service {
namespace {

using nlohmann::json;

void send_json(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& msg) {
  send_json(res, status, {{"error", msg}, {"status", status}});
}

// Runs a handler and maps failures onto status codes.
template <class F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const RequestError& e) {
      send_error(res, e.status, e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, std::string("malformed JSON: ") + e.what());
    } catch (const ConfigError& e) {
      send_error(res, 400, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

}  // namespace

void install_routes(httplib::Server& server, SessionStore& store) {
  server.Get("/sessions", guarded([&](const httplib::Request&, httplib::Response& res) {
               send_json(res, 200, store.list());
             }));
  server.Post("/sessions", guarded([&](const httplib::Request& req,
                                       httplib::Response& res) {
                const auto session = store.create(json::parse(req.body));
                auto body = session->brief();
                if (session->status() == SessionStatus::awaiting_label) {
                  body["next"] = session->next();
                }
                send_json(res, 201, body);
              }));
  server.Get(R"(/sessions/([^/]+)/next)",
             guarded([&](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, store.get(req.matches[1].str())->next());
             }));
  server.Post(R"(/sessions/([^/]+)/label)",
              guarded([&](const httplib::Request& req, httplib::Response& res) {
                const auto session = store.get(req.matches[1].str());
                const json body = json::parse(req.body);
                if (!body.is_object() || !body.contains("point_id") ||
                    !body["point_id"].is_string() || !body.contains("label") ||
                    !body["label"].is_string()) {
                  throw BadRequest("body needs string fields 'point_id' and 'label'");
                }
                send_json(res, 200,
                          session->label(body["point_id"].get<std::string>(),
                                         body["label"].get<std::string>()));
              }));
  server.Get(R"(/sessions/([^/]+)/summary)",
             guarded([&](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, store.get(req.matches[1].str())->summary());
             }));
  server.Get(R"(/sessions/([^/]+)/trace)",
             guarded([&](const httplib::Request& req, httplib::Response& res) {
               res.set_content(store.get(req.matches[1].str())->trace_jsonl(),
                               "application/x-ndjson");
             }));
}

std::uint16_t port_from_env(std::uint16_t fallback) {
  const char* v = std::getenv("UUAUDIT_PORT");
  if (v == nullptr || *v == '\0') return fallback;
  char* end = nullptr;
  const long port = std::strtol(v, &end, 10);
  if (*end != '\0' || port < 1 || port > 65535) {
    throw ConfigError(std::string("UUAUDIT_PORT is not a valid port: ") + v);
  }
  return static_cast<std::uint16_t>(port);
}

}  // namespace uuaudit::service
