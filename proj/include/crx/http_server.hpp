#pragma once

#include <string>

#include "httplib.h"

#include "crx/api_service.hpp"

namespace crx::api {

inline Request from_httplib(const httplib::Request& in) {
  Request out;
  out.method = in.method;
  out.path = in.path;
  for (const auto& [k, v] : in.params) out.query[k] = v;
  out.body = in.body;
  for (const auto& [field, part] : in.files) out.files.push_back({field, part.filename, part.content});
  return out;
}

// Routes every /sessions request on the server to the service. When
// static_dir is given it is served at "/" (the browser bundle).
inline void bind(httplib::Server& server, ApiService& service, const std::string& static_dir = {}) {
  auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    const Response r = service.handle(from_httplib(req));
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Get(R"(/sessions.*)", forward);
  server.Post(R"(/sessions.*)", forward);
  if (!static_dir.empty()) server.set_mount_point("/", static_dir);
}

}  // namespace crx::api
