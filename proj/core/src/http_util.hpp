/* Copyright 2026 The modguard Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef MODGUARD_SRC_HTTP_UTIL_HPP_
#define MODGUARD_SRC_HTTP_UTIL_HPP_

// Internal helpers around cpp-httplib. Not installed.

#include <httplib.h>

#include <chrono>
#include <memory>
#include <string>
#include <string_view>

#include "modguard/error.hpp"

namespace modguard::detail {

struct Url {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 0;
  std::string path;  // starts with '/', includes any query

  // scheme://host[:port] as accepted by httplib::Client.
  std::string origin() const { return scheme + "://" + host + ":" + std::to_string(port); }
};

// Throws InvalidInput for anything but absolute http(s) URLs.
inline Url parse_url(std::string_view url, std::string_view module) {
  Url u;
  const auto sep = url.find("://");
  if (sep == std::string_view::npos) {
    throw Error(ErrorKind::kInvalidInput, module, "not an absolute URL: " + std::string(url));
  }
  u.scheme = std::string(url.substr(0, sep));
  for (char& c : u.scheme) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (u.scheme != "http" && u.scheme != "https") {
    throw Error(ErrorKind::kInvalidInput, module, "unsupported URL scheme: " + u.scheme);
  }
  std::string_view rest = url.substr(sep + 3);
  const auto slash = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, slash);
  u.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  if (!u.path.empty() && u.path[0] != '/') u.path.insert(0, "/");
  if (const auto hash = u.path.find('#'); hash != std::string::npos) u.path.erase(hash);
  if (const auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);
  u.port = u.scheme == "https" ? 443 : 80;
  if (const auto colon = authority.rfind(':');
      colon != std::string_view::npos && authority.find(']') == std::string_view::npos) {
    const std::string port(authority.substr(colon + 1));
    authority = authority.substr(0, colon);
    try {
      std::size_t used = 0;
      u.port = std::stoi(port, &used);
      if (used != port.size() || u.port <= 0 || u.port > 65535) throw std::out_of_range("port");
    } catch (const std::exception&) {
      throw Error(ErrorKind::kInvalidInput, module, "bad port in URL: " + std::string(url));
    }
  }
  u.host = std::string(authority);
  if (u.host.empty()) throw Error(ErrorKind::kInvalidInput, module, "URL without host: " + std::string(url));
  return u;
}

inline std::unique_ptr<httplib::Client> make_client(const Url& url, double timeout_s) {
  auto client = std::make_unique<httplib::Client>(url.origin());
  const auto timeout = std::chrono::duration<double>(timeout_s);
  const auto sec = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usec = std::chrono::duration_cast<std::chrono::microseconds>(timeout - sec);
  client->set_connection_timeout(sec.count(), usec.count());
  client->set_read_timeout(sec.count(), usec.count());
  client->set_write_timeout(sec.count(), usec.count());
  client->set_follow_location(true);
  return client;
}

inline std::string percent_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 15]);
    }
  }
  return out;
}

}  // namespace modguard::detail

#endif  // MODGUARD_SRC_HTTP_UTIL_HPP_
