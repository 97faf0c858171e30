#pragma once

#include <map>
#include <optional>
#include <string>

namespace fans::http {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;    // begins with '/'
};

/// Splits an absolute http(s) URL. Throws ConfigError on anything else.
Url parse_url(const std::string& url);

struct Response {
  int status = 0;
  std::string body;
};

/// Returns nullopt with `error` filled when no HTTP response was received.
std::optional<Response> post_json(const std::string& url, const std::string& body,
                                  const std::string& bearer_token, int timeout_seconds, std::string& error);
std::optional<Response> get(const std::string& url, int timeout_seconds, std::string& error);

std::string url_encode_path_segment(const std::string& s);

}  // namespace fans::http
