#pragma once

#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "tabgraph/embed.hpp"
#include "tabgraph/error.hpp"

namespace tabgraph {

// Remote sentence-encoder client. Wire contract:
//   POST <endpoint>  body {"texts": [...]}  ->  {"vectors": [[...], ...]}
// Any non-200 response or transport failure is ProviderUnavailable.
inline BatchEmbedFn make_remote_provider(const std::string& endpoint) {
  return [endpoint](const std::vector<std::string>& texts) {
    std::string host = endpoint;
    std::string path = "/embed";
    std::string rest = endpoint;
    auto scheme_pos = rest.find("://");
    std::string scheme_host;
    if (scheme_pos != std::string::npos) {
      std::string scheme = rest.substr(0, scheme_pos);
      rest = rest.substr(scheme_pos + 3);
      auto slash = rest.find('/');
      if (slash != std::string::npos) {
        path = rest.substr(slash);
        rest = rest.substr(0, slash);
      }
      scheme_host = scheme + "://" + rest;
    } else {
      auto slash = rest.find('/');
      if (slash != std::string::npos) {
        path = rest.substr(slash);
        rest = rest.substr(0, slash);
      }
      scheme_host = "http://" + rest;
    }

    httplib::Client client(scheme_host);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(120, 0);

    ordered_json body;
    body["texts"] = texts;
    httplib::Result res = client.Post(path, body.dump(), "application/json");
    if (!res)
      throw Error(Errc::provider_unavailable,
                  "no response from " + endpoint + " (" + httplib::to_string(res.error()) + ")");
    if (res->status != 200)
      throw Error(Errc::provider_unavailable,
                  endpoint + " returned status " + std::to_string(res->status));
    ordered_json j = ordered_json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("vectors"))
      throw Error(Errc::provider_unavailable, "malformed provider response");
    return j.at("vectors").get<std::vector<std::vector<double>>>();
  };
}

inline BatchEmbedFn make_provider(const ProviderConfig& cfg) {
  cfg.validate();
  if (cfg.kind == ProviderKind::DeterministicTest) return make_test_provider(cfg.dim);
  return make_remote_provider(cfg.endpoint);
}

}  // namespace tabgraph
