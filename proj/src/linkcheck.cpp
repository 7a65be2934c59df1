#include "l4r/linkcheck.hpp"

#include <atomic>
#include <mutex>
#include <set>
#include <thread>

#include <httplib.h>

#include "l4r/csv_writer.hpp"
#include "l4r/text.hpp"
#include "l4r/url.hpp"

namespace l4r::linkcheck {

namespace {

using Clock = std::chrono::steady_clock;

// Hands out request slots so that starts to one host are at least `gap` apart.
class HostScheduler {
 public:
  explicit HostScheduler(std::chrono::milliseconds gap) : gap_(gap) {}

  void wait_turn(const std::string& host) {
    Clock::time_point slot;
    {
      std::lock_guard lock(mu_);
      const auto now = Clock::now();
      auto& next = next_[host];
      slot = std::max(now, next);
      next = slot + gap_;
    }
    std::this_thread::sleep_until(slot);
  }

 private:
  std::chrono::milliseconds gap_;
  std::mutex mu_;
  std::map<std::string, Clock::time_point> next_;
};

std::string resolve_location(const UrlParts& current, const std::string& location) {
  if (location.find("://") != std::string::npos) return location;
  if (location.starts_with("//")) return current.scheme + ":" + location;
  if (location.starts_with("/")) return current.origin() + location;
  auto dir = current.target.substr(0, current.target.find('?'));
  dir = dir.substr(0, dir.rfind('/') + 1);
  return current.origin() + dir + location;
}

LinkStatus fetch(const std::string& url, const CheckConfig& cfg, HostScheduler* scheduler) {
  LinkStatus out{url, Status::NetworkError, std::nullopt};
  std::string current = url;
  for (int hop = 0;; ++hop) {
    auto logical = parse_url(current);
    if (!logical || (logical->scheme != "http" && logical->scheme != "https")) {
      out.status = Status::NetworkError;
      return out;
    }
    const auto effective_url = cfg.base_url ? rebase_url(current, *cfg.base_url) : current;
    const auto target = parse_url(effective_url);
    if (!target) {
      out.status = Status::NetworkError;
      return out;
    }

    httplib::Client http(target->origin());
    const auto ms = cfg.timeout.count();
    http.set_connection_timeout(ms / 1000, (ms % 1000) * 1000);
    http.set_read_timeout(ms / 1000, (ms % 1000) * 1000);
    http.set_write_timeout(ms / 1000, (ms % 1000) * 1000);
    http.set_follow_location(false);
    const httplib::Headers headers{{"User-Agent", cfg.user_agent}};

    if (scheduler) scheduler->wait_turn(ascii_lower(logical->host));
    const auto started = Clock::now();
    auto res = http.Head(target->target, headers);
    if (res && res->status == 405) {
      if (scheduler) scheduler->wait_turn(ascii_lower(logical->host));
      res = http.Get(target->target, headers);
    }
    if (!res) {
      const auto err = res.error();
      const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                             (err == httplib::Error::Read && Clock::now() - started >= cfg.timeout);
      out.status = timed_out ? Status::Timeout : Status::NetworkError;
      out.http_code.reset();
      return out;
    }

    out.http_code = res->status;
    if (res->status >= 300 && res->status < 400 && hop < cfg.max_redirects &&
        res->has_header("Location")) {
      current = resolve_location(*logical, res->get_header_value("Location"));
      continue;
    }
    out.status = classify_http(res->status);
    return out;
  }
}

}  // namespace

std::string_view to_string(Status s) noexcept {
  switch (s) {
    case Status::Valid: return "Valid";
    case Status::Broken: return "Broken";
    case Status::PermissionRequired: return "PermissionRequired";
    case Status::Missing: return "Missing";
    case Status::Timeout: return "Timeout";
    case Status::NetworkError: return "NetworkError";
  }
  return "";
}

bool is_invalid(Status s) noexcept { return s != Status::Valid; }

void CheckConfig::validate() const {
  if (concurrency < 1) throw Error("linkcheck: concurrency must be at least 1");
  if (timeout.count() <= 0) throw Error("linkcheck: timeout must be positive");
  if (politeness.count() < 0) throw Error("linkcheck: politeness delay must not be negative");
  if (max_redirects < 0) throw Error("linkcheck: max_redirects must not be negative");
  if (base_url && !parse_url(*base_url)) throw Error("linkcheck: bad base url " + *base_url);
}

CheckConfig check_config_from_json(const nlohmann::json& j) {
  CheckConfig cfg;
  cfg.concurrency = j.value("concurrency", cfg.concurrency);
  cfg.timeout = std::chrono::milliseconds(
      static_cast<long long>(j.value("timeout_s", cfg.timeout.count() / 1000.0) * 1000.0));
  cfg.politeness = std::chrono::milliseconds(j.value("politeness_ms", cfg.politeness.count()));
  cfg.max_redirects = j.value("max_redirects", cfg.max_redirects);
  if (j.contains("base_url") && !j["base_url"].is_null()) {
    cfg.base_url = j["base_url"].get<std::string>();
  }
  cfg.validate();
  return cfg;
}

Status classify_http(int code) noexcept {
  if (code >= 200 && code < 400) return Status::Valid;
  if (code == 401 || code == 403) return Status::PermissionRequired;
  return Status::Broken;
}

LinkStatus check_url(const std::string& url, const CheckConfig& cfg) {
  cfg.validate();
  return fetch(url, cfg, nullptr);
}

LinkReport link_report(const std::vector<Event>& events, const CheckConfig& cfg) {
  cfg.validate();
  std::vector<std::string> urls;
  {
    std::set<std::string> seen;
    for (const auto& ev : events) {
      for (const auto& u : ev.source_urls) {
        if (seen.insert(u).second) urls.push_back(u);
      }
    }
  }

  std::vector<LinkStatus> results(urls.size());
  HostScheduler scheduler(cfg.politeness);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < urls.size(); i = next++) {
      results[i] = fetch(urls[i], cfg, &scheduler);
    }
  };
  const auto n = std::min(cfg.concurrency, std::max<std::size_t>(urls.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::map<std::string, const LinkStatus*> by_url;
  for (std::size_t i = 0; i < urls.size(); ++i) by_url.emplace(urls[i], &results[i]);

  LinkReport report;
  report.requests = urls.size();
  for (const auto& ev : events) {
    auto& sum = report.summary[ev.dataset];
    ++sum.events;
    bool bad = false;
    if (ev.source_urls.empty()) {
      report.rows.push_back({"", Status::Missing, std::nullopt, ev.id, ev.dataset});
      ++sum.missing_events;
      ++sum.per_status[Status::Missing];
      bad = true;
    }
    for (const auto& u : ev.source_urls) {
      const auto& r = *by_url.at(u);
      report.rows.push_back({u, r.status, r.http_code, ev.id, ev.dataset});
      ++sum.urls;
      ++sum.per_status[r.status];
      bad = bad || is_invalid(r.status);
    }
    if (bad) ++sum.events_with_invalid;
  }
  for (auto& [ds, sum] : report.summary) {
    for (const auto& [status, count] : sum.per_status) {
      if (is_invalid(status)) sum.invalid += count;
    }
    const auto denom = sum.urls + sum.missing_events;
    sum.invalid_fraction = denom ? static_cast<double>(sum.invalid) / static_cast<double>(denom) : 0.0;
    sum.invalid_event_fraction =
        sum.events ? static_cast<double>(sum.events_with_invalid) / static_cast<double>(sum.events)
                   : 0.0;
  }
  return report;
}

std::string rows_csv(const std::vector<Row>& rows) {
  CsvWriter csv;
  csv.row({"url", "status", "http_code", "event_id"});
  for (const auto& r : rows) {
    csv.row({r.url, std::string(to_string(r.status)),
             r.http_code ? std::to_string(*r.http_code) : std::string(), r.event_id});
  }
  return csv.str();
}

nlohmann::json summary_json(const LinkReport& report) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [ds, sum] : report.summary) {
    nlohmann::json per_status = nlohmann::json::object();
    for (auto s : {Status::Valid, Status::Broken, Status::PermissionRequired, Status::Missing,
                   Status::Timeout, Status::NetworkError}) {
      const auto it = sum.per_status.find(s);
      per_status[std::string(to_string(s))] = it == sum.per_status.end() ? 0 : it->second;
    }
    out[std::string(to_string(ds))] = {
        {"events", sum.events},
        {"urls", sum.urls},
        {"missing_events", sum.missing_events},
        {"per_status", per_status},
        {"invalid", sum.invalid},
        {"invalid_fraction", sum.invalid_fraction},
        {"events_with_invalid", sum.events_with_invalid},
        {"invalid_event_fraction", sum.invalid_event_fraction},
    };
  }
  return out;
}

}  // namespace l4r::linkcheck
