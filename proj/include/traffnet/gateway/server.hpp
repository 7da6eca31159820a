#pragma once

#include <string>

#include "traffnet/gateway/session.hpp"

namespace httplib {
class Server;
}

namespace traffnet::gateway {

/// GET /network, GET /state, POST /step, GET /forecast, POST /whatif.
void register_routes(httplib::Server& server, Session& session);

/// Blocks serving until the server is stopped.
void serve(Session& session, const std::string& host, int port);

}  // namespace traffnet::gateway
