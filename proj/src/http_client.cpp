#include "tabprompt/http_client.hpp"

#include <chrono>
#include <thread>

#include <httplib.h>

#include "tabprompt/errors.hpp"

namespace tabprompt {

ParsedUrl parse_url(const std::string& url) {
  const std::string scheme = "http://";
  if (url.rfind(scheme, 0) != 0) {
    throw ConfigError("endpoint", "only http:// endpoints are supported, got '" + url + "'");
  }
  std::string rest = url.substr(scheme.size());
  ParsedUrl out;
  const auto slash = rest.find('/');
  std::string authority = rest.substr(0, slash);
  if (slash != std::string::npos) out.path = rest.substr(slash);
  const auto colon = authority.rfind(':');
  if (colon != std::string::npos) {
    try {
      out.port = std::stoi(authority.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("endpoint", "bad port in '" + url + "'");
    }
    authority.resize(colon);
  }
  if (authority.empty()) throw ConfigError("endpoint", "missing host in '" + url + "'");
  out.host = authority;
  return out;
}

JsonHttpClient::JsonHttpClient(RemoteSettings settings)
    : settings_(std::move(settings)), url_(parse_url(settings_.endpoint)) {
  if (settings_.max_in_flight < 1) throw ConfigError("max_in_flight", "must be at least 1");
  if (settings_.retries < 0) throw ConfigError("retries", "must be non-negative");
}

std::string JsonHttpClient::post(const std::string& body) {
  {
    std::unique_lock lock(mutex_);
    slot_free_.wait(lock, [this] { return in_flight_ < settings_.max_in_flight; });
    ++in_flight_;
  }
  struct Release {
    JsonHttpClient* self;
    ~Release() {
      {
        std::lock_guard lock(self->mutex_);
        --self->in_flight_;
      }
      self->slot_free_.notify_one();
    }
  } release{this};

  const std::string request_id = std::to_string(next_id_.fetch_add(1));
  const auto timeout = std::chrono::duration<double>(settings_.timeout_seconds);
  const auto timeout_us = std::chrono::duration_cast<std::chrono::microseconds>(timeout).count();

  std::string last_error;
  for (int attempt = 0; attempt <= settings_.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(20 * attempt));
    ++attempts_;
    httplib::Client client(url_.host, url_.port);
    client.set_connection_timeout(timeout_us / 1000000, timeout_us % 1000000);
    client.set_read_timeout(timeout_us / 1000000, timeout_us % 1000000);
    client.set_write_timeout(timeout_us / 1000000, timeout_us % 1000000);
    httplib::Headers headers{{"X-Request-Id", request_id}};
    auto res = client.Post(url_.path, headers, body, "application/json");
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "server error " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw TransportError(settings_.endpoint + " answered " + std::to_string(res->status));
    }
    if (res->has_header("X-Request-Id") && res->get_header_value("X-Request-Id") != request_id) {
      throw TransportError(settings_.endpoint + " answered request " + request_id + " with id " +
                           res->get_header_value("X-Request-Id"));
    }
    return res->body;
  }
  throw TransportError(settings_.endpoint + ": " + last_error + " after " +
                       std::to_string(settings_.retries + 1) + " attempts");
}

}  // namespace tabprompt
