#pragma once

#include <atomic>
#include <chrono>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "l4r/gazetteer.hpp"

namespace httplib {
class Server;
}

namespace l4r::test {

/// An HTTP server on 127.0.0.1 with a random port, serving on a background
/// thread until destroyed.
class MockServer {
 public:
  MockServer();
  virtual ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  std::string base_url() const;
  int port() const noexcept { return port_; }

 protected:
  httplib::Server& server() { return *server_; }
  void start();

 private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

/// Answers the three GeoNames endpoints from an offline index.
class MockGeoNames : public MockServer {
 public:
  explicit MockGeoNames(gazetteer::GazetteerIndex index);

  /// The next `n` requests get HTTP `status` with an empty body.
  void fail_next(int n, int status);
  /// The next request gets HTTP 200 with a GeoNames status object.
  void service_status_next(int value, const std::string& message);

  std::size_t requests() const noexcept { return requests_; }
  std::map<std::string, std::size_t> requests_by_endpoint() const;
  std::string last_username() const;

 private:
  gazetteer::GazetteerIndex index_;
  mutable std::mutex mu_;
  std::deque<int> failures_;
  std::deque<std::pair<int, std::string>> statuses_;
  std::map<std::string, std::size_t> by_endpoint_;
  std::string last_username_;
  std::atomic<std::size_t> requests_{0};
};

/// Scripted link targets:
///   /ok /missing(404) /gone(410) /forbidden(403) /unauthorized(401)
///   /error(500) /head-405 (405 on HEAD, 200 on GET)
///   /redirect/{n} (n hops, then /ok) /loop (redirects to itself)
///   /slow (sleeps `slow_delay` before answering 200)
class MockLinkServer : public MockServer {
 public:
  explicit MockLinkServer(std::chrono::milliseconds slow_delay = std::chrono::milliseconds(1500));

  std::size_t requests() const noexcept { return requests_; }
  /// Requests per path, HEAD and GET counted separately as "HEAD /path".
  std::map<std::string, std::size_t> hits() const;
  std::string last_user_agent() const;

 private:
  void record(const std::string& method, const std::string& path, const std::string& ua);

  std::chrono::milliseconds slow_delay_;
  mutable std::mutex mu_;
  std::map<std::string, std::size_t> hits_;
  std::string last_user_agent_;
  std::atomic<std::size_t> requests_{0};
};

}  // namespace l4r::test
