#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "http_client.hpp"

#include <httplib.h>

#include <cctype>

#include "fans/errors.hpp"

namespace fans::http {

Url parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("not an absolute URL: '" + url + "'");
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw ConfigError("unsupported URL scheme in '" + url + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  Url out;
  out.origin = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (out.origin.size() <= scheme_end + 3) throw ConfigError("URL has no host: '" + url + "'");
  return out;
}

namespace {

httplib::Client make_client(const Url& u, int timeout_seconds) {
  httplib::Client cli(u.origin);
  cli.set_connection_timeout(timeout_seconds, 0);
  cli.set_read_timeout(timeout_seconds, 0);
  cli.set_write_timeout(timeout_seconds, 0);
  return cli;
}

}  // namespace

std::optional<Response> post_json(const std::string& url, const std::string& body,
                                  const std::string& bearer_token, int timeout_seconds, std::string& error) {
  const Url u = parse_url(url);
  auto cli = make_client(u, timeout_seconds);
  httplib::Headers headers;
  if (!bearer_token.empty()) headers.emplace("Authorization", "Bearer " + bearer_token);
  auto res = cli.Post(u.path, headers, body, "application/json");
  if (!res) {
    error = httplib::to_string(res.error());
    return std::nullopt;
  }
  return Response{res->status, res->body};
}

std::optional<Response> get(const std::string& url, int timeout_seconds, std::string& error) {
  const Url u = parse_url(url);
  auto cli = make_client(u, timeout_seconds);
  auto res = cli.Get(u.path);
  if (!res) {
    error = httplib::to_string(res.error());
    return std::nullopt;
  }
  return Response{res->status, res->body};
}

std::string url_encode_path_segment(const std::string& s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '_' || c == '-' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

}  // namespace fans::http
