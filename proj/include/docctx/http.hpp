// Copyright 2026 The docctx Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace httplib {
class Client;
}

namespace docctx::http {

struct Endpoint {
  std::string host;
  int port = 80;
  // Path prefix without trailing slash; may be empty.
  std::string path;

  // Canonical "http://host:port/path" form, used in diagnostics.
  std::string url() const;
};

// Accepts "http://host[:port][/path]". Throws ConfigError otherwise.
Endpoint parse_endpoint(std::string_view url);

struct RetryPolicy {
  // Total attempts, first try included.
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{100};
  double backoff_multiplier = 2.0;
  std::chrono::milliseconds connect_timeout{2000};
  std::chrono::milliseconds read_timeout{30000};
};

// JSON-over-HTTP client shared by the scorer, LLM and NER adapters.
//
// Holds a bounded pool of keep-alive connections; callers beyond the pool
// size block until one is free, so a single instance can be shared by all
// worker threads. Connection failures, timeouts and 5xx answers are retried
// with exponential backoff; after the last attempt a TransportError naming
// the URL is thrown. 4xx answers and non-JSON bodies raise ProtocolError
// immediately.
class JsonClient {
 public:
  JsonClient(Endpoint endpoint, RetryPolicy retry = {}, std::size_t pool_size = 4);
  ~JsonClient();
  JsonClient(const JsonClient&) = delete;
  JsonClient& operator=(const JsonClient&) = delete;

  const Endpoint& endpoint() const { return endpoint_; }

  // `path` is appended to the endpoint's path prefix.
  nlohmann::json post(std::string_view path, const nlohmann::json& body);
  nlohmann::json get(std::string_view path);

 private:
  struct Lease;
  nlohmann::json request(bool is_post, std::string_view path, const nlohmann::json* body);
  std::unique_ptr<httplib::Client> acquire();
  void release(std::unique_ptr<httplib::Client> c);

  Endpoint endpoint_;
  RetryPolicy retry_;
  std::size_t pool_size_;
  std::size_t created_ = 0;
  std::vector<std::unique_ptr<httplib::Client>> idle_;
  std::mutex mu_;
  std::condition_variable cv_;
};

}  // namespace docctx::http
