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

#include "docctx/http.hpp"

#include <charconv>
#include <thread>

#include <httplib.h>

#include "docctx/error.hpp"

namespace docctx::http {

std::string Endpoint::url() const {
  return "http://" + host + ":" + std::to_string(port) + path;
}

Endpoint parse_endpoint(std::string_view url) {
  constexpr std::string_view kScheme = "http://";
  if (url.substr(0, kScheme.size()) != kScheme) {
    throw ConfigError("endpoint '" + std::string(url) + "' must start with http://");
  }
  std::string_view rest = url.substr(kScheme.size());
  Endpoint ep;
  const auto slash = rest.find('/');
  std::string_view authority = rest.substr(0, slash);
  if (slash != std::string_view::npos) ep.path = std::string(rest.substr(slash));
  while (!ep.path.empty() && ep.path.back() == '/') ep.path.pop_back();
  const auto colon = authority.rfind(':');
  if (colon != std::string_view::npos) {
    std::string_view port = authority.substr(colon + 1);
    auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), ep.port);
    if (ec != std::errc{} || ptr != port.data() + port.size() || ep.port <= 0 ||
        ep.port > 65535) {
      throw ConfigError("endpoint '" + std::string(url) + "' has an invalid port");
    }
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) throw ConfigError("endpoint '" + std::string(url) + "' has no host");
  ep.host = std::string(authority);
  return ep;
}

JsonClient::JsonClient(Endpoint endpoint, RetryPolicy retry, std::size_t pool_size)
    : endpoint_(std::move(endpoint)), retry_(retry), pool_size_(pool_size ? pool_size : 1) {}

JsonClient::~JsonClient() = default;

std::unique_ptr<httplib::Client> JsonClient::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return !idle_.empty() || created_ < pool_size_; });
  if (!idle_.empty()) {
    auto c = std::move(idle_.back());
    idle_.pop_back();
    return c;
  }
  ++created_;
  lock.unlock();
  auto c = std::make_unique<httplib::Client>(endpoint_.host, endpoint_.port);
  const auto ct = retry_.connect_timeout.count();
  const auto rt = retry_.read_timeout.count();
  c->set_connection_timeout(ct / 1000, (ct % 1000) * 1000);
  c->set_read_timeout(rt / 1000, (rt % 1000) * 1000);
  c->set_write_timeout(rt / 1000, (rt % 1000) * 1000);
  c->set_keep_alive(true);
  return c;
}

void JsonClient::release(std::unique_ptr<httplib::Client> c) {
  {
    std::lock_guard lock(mu_);
    idle_.push_back(std::move(c));
  }
  cv_.notify_one();
}

struct JsonClient::Lease {
  JsonClient& owner;
  std::unique_ptr<httplib::Client> client;
  explicit Lease(JsonClient& o) : owner(o), client(o.acquire()) {}
  ~Lease() { owner.release(std::move(client)); }
};

nlohmann::json JsonClient::post(std::string_view path, const nlohmann::json& body) {
  return request(true, path, &body);
}

nlohmann::json JsonClient::get(std::string_view path) { return request(false, path, nullptr); }

nlohmann::json JsonClient::request(bool is_post, std::string_view path,
                                   const nlohmann::json* body) {
  std::string full_path = endpoint_.path + std::string(path);
  if (full_path.empty()) full_path = "/";
  const std::string where = std::string(is_post ? "POST " : "GET ") + endpoint_.url() +
                            std::string(path);
  const std::string payload = body ? body->dump() : std::string();
  auto backoff = retry_.initial_backoff;
  std::string last_error;
  const int attempts = retry_.max_attempts > 0 ? retry_.max_attempts : 1;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    {
      Lease lease(*this);
      httplib::Result res = is_post
                                ? lease.client->Post(full_path, payload, "application/json")
                                : lease.client->Get(full_path);
      if (!res) {
        last_error = httplib::to_string(res.error());
      } else if (res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status) + " " + res->body;
      } else if (res->status >= 400 || res->status < 200 || res->status >= 300) {
        std::string msg = res->body;
        try {
          auto j = nlohmann::json::parse(res->body);
          if (j.contains("error") && j["error"].is_string()) msg = j["error"].get<std::string>();
        } catch (const nlohmann::json::exception&) {
        }
        throw ProtocolError(where + ": HTTP " + std::to_string(res->status) + ": " + msg);
      } else {
        try {
          return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
          throw ProtocolError(where + ": response is not JSON: " + e.what());
        }
      }
    }
    if (attempt < attempts) {
      std::this_thread::sleep_for(backoff);
      backoff = std::chrono::milliseconds(
          static_cast<long long>(static_cast<double>(backoff.count()) * retry_.backoff_multiplier));
    }
  }
  throw TransportError(where + ": " + last_error + " (after " + std::to_string(attempts) +
                       " attempts)");
}

}  // namespace docctx::http
