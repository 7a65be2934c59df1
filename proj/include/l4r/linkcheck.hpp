#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "l4r/model.hpp"

namespace l4r::linkcheck {

enum class Status { Valid, Broken, PermissionRequired, Missing, Timeout, NetworkError };

std::string_view to_string(Status s) noexcept;
bool is_invalid(Status s) noexcept;

struct LinkStatus {
  std::string url;
  Status status = Status::Valid;
  std::optional<int> http_code;  // present iff a response was received
  friend bool operator==(const LinkStatus&, const LinkStatus&) = default;
};

inline constexpr std::string_view kUserAgent =
    "l4r-linkcheck/1.0 (+https://github.com/linked4resilience/l4r)";

struct CheckConfig {
  std::size_t concurrency = 8;
  std::chrono::milliseconds timeout{10000};
  std::chrono::milliseconds politeness{200};  // minimum gap between requests to one host
  int max_redirects = 5;
  /// When set, every request (including redirects) goes to this origin
  /// instead, keeping the path and query.
  std::optional<std::string> base_url;
  std::string user_agent = std::string(kUserAgent);

  void validate() const;
};

CheckConfig check_config_from_json(const nlohmann::json& j);

/// Status codes map as: 2xx and 3xx (once redirects are exhausted) Valid,
/// 401/403 PermissionRequired, any other 4xx/5xx Broken. HEAD is tried first
/// and GET is used when the server answers 405.
Status classify_http(int code) noexcept;

LinkStatus check_url(const std::string& url, const CheckConfig& cfg);

struct Row {
  std::string url;  // empty for Missing
  Status status = Status::Valid;
  std::optional<int> http_code;
  std::string event_id;
  Dataset dataset = Dataset::EOR;
};

struct DatasetSummary {
  std::size_t events = 0;
  std::size_t urls = 0;            // URL occurrences
  std::size_t missing_events = 0;  // events without any URL
  std::map<Status, std::size_t> per_status;  // over urls + missing_events
  std::size_t invalid = 0;
  double invalid_fraction = 0.0;        // invalid / (urls + missing_events)
  std::size_t events_with_invalid = 0;  // events with a Missing or invalid link
  double invalid_event_fraction = 0.0;  // events_with_invalid / events
};

struct LinkReport {
  std::vector<Row> rows;
  std::map<Dataset, DatasetSummary> summary;
  std::size_t requests = 0;  // distinct URLs fetched
};

/// Checks every distinct URL once on a pool of cfg.concurrency workers and
/// fans the results back out to events in input order.
LinkReport link_report(const std::vector<Event>& events, const CheckConfig& cfg);

/// `url,status,http_code,event_id`
std::string rows_csv(const std::vector<Row>& rows);
nlohmann::json summary_json(const LinkReport& report);

}  // namespace l4r::linkcheck
