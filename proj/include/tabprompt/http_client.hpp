#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <string>

namespace tabprompt {

/// Connection settings shared by the remote embedder, the remote Task-LM and
/// the remote encoder.
struct RemoteSettings {
  std::string endpoint;  ///< e.g. "http://127.0.0.1:8080/v1/complete"
  double timeout_seconds = 30.0;
  int retries = 2;  ///< extra attempts after the first
  int max_in_flight = 4;
};

struct ParsedUrl {
  std::string host;
  int port = 80;
  std::string path = "/";
};

/// Only plain http:// URLs are supported.
ParsedUrl parse_url(const std::string& url);

/// POSTs JSON bodies with bounded retries and a cap on concurrent requests.
/// Each request carries an X-Request-Id header; a response that echoes a
/// different id is rejected.
class JsonHttpClient {
 public:
  explicit JsonHttpClient(RemoteSettings settings);

  /// Returns the response body. Throws TransportError once retries are
  /// exhausted or on a non-retryable (4xx) status.
  std::string post(const std::string& body);

  /// Number of HTTP attempts made so far, including retries.
  std::uint64_t attempts() const noexcept { return attempts_.load(); }
  const RemoteSettings& settings() const noexcept { return settings_; }

 private:
  RemoteSettings settings_;
  ParsedUrl url_;
  std::mutex mutex_;
  std::condition_variable slot_free_;
  int in_flight_ = 0;
  std::atomic<std::uint64_t> attempts_{0};
  std::atomic<std::uint64_t> next_id_{1};
};

}  // namespace tabprompt
