#include "mock_servers.hpp"

#include <charconv>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "l4r/error.hpp"

namespace l4r::test {

MockServer::MockServer() : server_(std::make_unique<httplib::Server>()) {
  server_->new_task_queue = [] { return new httplib::ThreadPool(64); };
}

MockServer::~MockServer() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

void MockServer::start() {
  port_ = server_->bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw Error("mock server: cannot bind");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

std::string MockServer::base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

namespace {

double param(const httplib::Request& req, const char* key) {
  const auto s = req.get_param_value(key);
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) throw Error("bad param");
  return v;
}

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

nlohmann::json place_json(const gazetteer::GazetteerEntry& e) {
  // Coordinates as strings, the way the live service sends them.
  nlohmann::json j = {{"geonameId", e.geoname_id},
                      {"name", e.name},
                      {"asciiName", e.ascii_name},
                      {"lat", shortest(e.point.latitude())},
                      {"lng", shortest(e.point.longitude())},
                      {"fcl", std::string(1, e.feature_class)},
                      {"fcode", e.feature_code},
                      {"countryCode", e.country_code},
                      {"adminCode1", e.admin1_code}};
  return j;
}

}  // namespace

MockGeoNames::MockGeoNames(gazetteer::GazetteerIndex index) : index_(std::move(index)) {
  auto guard = [this](const std::string& endpoint, auto body) {
    return [this, endpoint, body](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      {
        std::lock_guard lock(mu_);
        ++by_endpoint_[endpoint];
        last_username_ = req.get_param_value("username");
        if (!failures_.empty()) {
          res.status = failures_.front();
          failures_.pop_front();
          return;
        }
        if (!statuses_.empty()) {
          const auto [value, message] = statuses_.front();
          statuses_.pop_front();
          res.set_content(nlohmann::json{{"status", {{"value", value}, {"message", message}}}}.dump(),
                          "application/json");
          return;
        }
      }
      try {
        res.set_content(body(req).dump(), "application/json");
      } catch (const Error&) {
        res.status = 400;
      }
    };
  };

  server().Get("/findNearbyPlaceNameJSON", guard("findNearbyPlaceNameJSON", [this](const httplib::Request& req) {
    const auto p = validate_point(param(req, "lat"), param(req, "lng"));
    const double radius = req.has_param("radius") ? param(req, "radius") : 30.0;
    nlohmann::json list = nlohmann::json::array();
    if (const auto* e = index_.nearest_place(p, radius)) list.push_back(place_json(*e));
    return nlohmann::json{{"geonames", list}};
  }));

  server().Get("/findNearbyPostalCodesJSON", guard("findNearbyPostalCodesJSON", [this](const httplib::Request& req) {
    const auto p = validate_point(param(req, "lat"), param(req, "lng"));
    const double radius = req.has_param("radius") ? param(req, "radius") : 15.0;
    nlohmann::json list = nlohmann::json::array();
    if (const auto* e = index_.nearest_postal(p, radius)) {
      list.push_back({{"postalCode", e->postal_code},
                      {"placeName", e->place_name},
                      {"countryCode", e->country_code},
                      {"lat", e->point.latitude()},
                      {"lng", e->point.longitude()}});
    }
    return nlohmann::json{{"postalCodes", list}};
  }));

  server().Get("/getJSON", guard("getJSON", [this](const httplib::Request& req) {
    const auto id = static_cast<std::int64_t>(param(req, "geonameId"));
    const auto* e = index_.find(id);
    if (!e) {
      return nlohmann::json{{"status", {{"value", 11}, {"message", "the geoname feature does not exist."}}}};
    }
    auto j = place_json(*e);
    nlohmann::json alts = nlohmann::json::array();
    for (const auto& [lang, name] : e->alternate_names) {
      nlohmann::json a = {{"name", name}};
      if (!lang.empty()) a["lang"] = lang;
      alts.push_back(a);
    }
    j["alternateNames"] = alts;
    if (e->feature_code != "ADM1" && e->feature_code.rfind("PCL", 0) != 0) {
      if (const auto* adm = index_.admin1(e->country_code, e->admin1_code)) {
        j["adminId1"] = std::to_string(adm->geoname_id);
      }
    }
    if (e->feature_code.rfind("PCL", 0) != 0) {
      if (const auto* c = index_.country(e->country_code)) j["countryId"] = std::to_string(c->geoname_id);
    }
    return j;
  }));

  start();
}

void MockGeoNames::fail_next(int n, int status) {
  std::lock_guard lock(mu_);
  for (int i = 0; i < n; ++i) failures_.push_back(status);
}

void MockGeoNames::service_status_next(int value, const std::string& message) {
  std::lock_guard lock(mu_);
  statuses_.emplace_back(value, message);
}

std::map<std::string, std::size_t> MockGeoNames::requests_by_endpoint() const {
  std::lock_guard lock(mu_);
  return by_endpoint_;
}

std::string MockGeoNames::last_username() const {
  std::lock_guard lock(mu_);
  return last_username_;
}

MockLinkServer::MockLinkServer(std::chrono::milliseconds slow_delay) : slow_delay_(slow_delay) {
  auto fixed = [this](int status) {
    return [this, status](const httplib::Request& req, httplib::Response& res) {
      record(req.method, req.path, req.get_header_value("User-Agent"));
      res.status = status;
      res.set_content("body", "text/plain");
    };
  };
  server().Get("/ok", fixed(200));
  server().Get("/missing", fixed(404));
  server().Get("/gone", fixed(410));
  server().Get("/forbidden", fixed(403));
  server().Get("/unauthorized", fixed(401));
  server().Get("/error", fixed(500));
  server().Get("/head-405", [this](const httplib::Request& req, httplib::Response& res) {
    record(req.method, req.path, req.get_header_value("User-Agent"));
    res.status = req.method == "HEAD" ? 405 : 200;
  });
  server().Get(R"(/redirect/(\d+))", [this](const httplib::Request& req, httplib::Response& res) {
    record(req.method, req.path, req.get_header_value("User-Agent"));
    const int n = std::stoi(req.matches[1]);
    res.set_redirect(n <= 1 ? "/ok" : "/redirect/" + std::to_string(n - 1), 302);
  });
  server().Get("/loop", [this](const httplib::Request& req, httplib::Response& res) {
    record(req.method, req.path, req.get_header_value("User-Agent"));
    res.set_redirect("/loop", 301);
  });
  server().Get("/slow", [this](const httplib::Request& req, httplib::Response& res) {
    record(req.method, req.path, req.get_header_value("User-Agent"));
    std::this_thread::sleep_for(slow_delay_);
    res.status = 200;
  });
  start();
}

void MockLinkServer::record(const std::string& method, const std::string& path, const std::string& ua) {
  ++requests_;
  std::lock_guard lock(mu_);
  ++hits_[method + " " + path];
  last_user_agent_ = ua;
}

std::map<std::string, std::size_t> MockLinkServer::hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

std::string MockLinkServer::last_user_agent() const {
  std::lock_guard lock(mu_);
  return last_user_agent_;
}

}  // namespace l4r::test
