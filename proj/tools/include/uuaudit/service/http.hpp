#pragma once

#include <cstdint>

namespace httplib {
class Server;
}

namespace uuaudit::service {

class SessionStore;

/// Registers the session endpoints:
///   GET  /sessions
///   POST /sessions
///   GET  /sessions/{id}/next
///   POST /sessions/{id}/label   {"point_id": ..., "label": ...}
///   GET  /sessions/{id}/summary
///   GET  /sessions/{id}/trace   (JSONL)
void install_routes(httplib::Server& server, SessionStore& store);

/// Port from UUAUDIT_PORT, else the fallback.
std::uint16_t port_from_env(std::uint16_t fallback = 8080);

}  // namespace uuaudit::service
