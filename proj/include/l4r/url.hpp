#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace l4r {

struct UrlParts {
  std::string scheme;     // lowercase
  std::string host;       // as written
  int port = 0;           // explicit port, or the scheme default
  std::string target;     // path + query, always starting with '/'
  std::string fragment;   // without '#'

  /// scheme://host[:port] with the port omitted when it is the default.
  std::string origin() const;
};

/// Splits an absolute http(s)-style URL. Returns nullopt for anything else.
std::optional<UrlParts> parse_url(std::string_view url);

/// Comparison key for source links: scheme and host lowercased, fragment
/// removed, one trailing slash removed from the path.
std::string normalize_url(std::string_view url);

/// Replaces scheme, host and port of `url` with those of `base`, keeping the
/// target. `base` may carry a path prefix which is prepended.
std::string rebase_url(std::string_view url, std::string_view base);

/// RFC 3986 percent-encoding of everything except unreserved characters.
std::string percent_encode(std::string_view s);
std::string percent_decode(std::string_view s);

}  // namespace l4r
