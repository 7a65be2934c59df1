#include "l4r/url.hpp"

#include <charconv>

#include "l4r/text.hpp"

namespace l4r {

namespace {

int default_port(std::string_view scheme) {
  if (scheme == "https") return 443;
  if (scheme == "http") return 80;
  return 0;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string UrlParts::origin() const {
  std::string out = scheme + "://" + host;
  if (port != default_port(scheme)) out += ":" + std::to_string(port);
  return out;
}

std::optional<UrlParts> parse_url(std::string_view url) {
  const auto sep = url.find("://");
  if (sep == std::string_view::npos || sep == 0) return std::nullopt;
  UrlParts parts;
  parts.scheme = ascii_lower(url.substr(0, sep));
  auto rest = url.substr(sep + 3);
  if (const auto hash = rest.find('#'); hash != std::string_view::npos) {
    parts.fragment = std::string(rest.substr(hash + 1));
    rest = rest.substr(0, hash);
  }
  auto slash = rest.find_first_of("/?");
  auto authority = rest.substr(0, slash);
  parts.target = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  if (!parts.target.empty() && parts.target.front() == '?') parts.target.insert(0, "/");
  if (const auto at = authority.rfind('@'); at != std::string_view::npos) {
    authority = authority.substr(at + 1);
  }
  parts.port = default_port(parts.scheme);
  // Bracketed IPv6 literals keep their colons.
  const auto close = authority.find(']');
  const auto colon = authority.rfind(':');
  if (colon != std::string_view::npos && (close == std::string_view::npos || colon > close)) {
    const auto port_s = authority.substr(colon + 1);
    int port = 0;
    auto [p, ec] = std::from_chars(port_s.data(), port_s.data() + port_s.size(), port);
    if (port_s.empty() || ec != std::errc{} || p != port_s.data() + port_s.size() || port <= 0 ||
        port > 65535) {
      return std::nullopt;
    }
    parts.port = port;
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) return std::nullopt;
  parts.host = std::string(authority);
  return parts;
}

std::string normalize_url(std::string_view url) {
  const auto sep = url.find("://");
  if (sep == std::string_view::npos) return std::string(url);
  std::string scheme = ascii_lower(url.substr(0, sep));
  auto rest = url.substr(sep + 3);
  if (const auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);
  const auto slash = rest.find_first_of("/?");
  std::string host = ascii_lower(rest.substr(0, slash));
  std::string tail = slash == std::string_view::npos ? "" : std::string(rest.substr(slash));
  // Only the path part loses its trailing slash; "?x=/" keeps it.
  const auto q = tail.find('?');
  std::string path = tail.substr(0, q);
  const std::string query = q == std::string::npos ? "" : tail.substr(q);
  if (!path.empty() && path.back() == '/') path.pop_back();
  return scheme + "://" + host + path + query;
}

std::string rebase_url(std::string_view url, std::string_view base) {
  const auto parts = parse_url(url);
  std::string b(base);
  while (!b.empty() && b.back() == '/') b.pop_back();
  return b + (parts ? parts->target : std::string("/"));
}

std::string percent_encode(std::string_view s) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) {
    const bool unreserved = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                            (c >= '0' && c <= '9') || c == '-' || c == '.' || c == '_' || c == '~';
    if (unreserved) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 0xF]);
    }
  }
  return out;
}

std::string percent_decode(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      const int hi = hex_value(s[i + 1]);
      const int lo = hex_value(s[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out.push_back(static_cast<char>(hi * 16 + lo));
        i += 2;
        continue;
      }
    }
    out.push_back(s[i]);
  }
  return out;
}

}  // namespace l4r
