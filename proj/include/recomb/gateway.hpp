// Copyright 2026 The Recomb Authors.
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

// Uniform access to text-generation and embedding backends.
//
// A Gateway wraps a Backend with a content-addressed response cache and
// retry/backoff. Cache keys digest the model id, the full payload and the
// sampling parameters, so a warm cache replays byte-identical responses
// without touching the backend. Two backends ship here: an OpenAI-compatible
// HTTP client and a scriptable mock used by tests and offline fixtures.

#ifndef RECOMB_GATEWAY_HPP_
#define RECOMB_GATEWAY_HPP_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <unordered_map>
#include <vector>

#include "httplib.h"
#include "recomb/core.hpp"
#include "recomb/io.hpp"

namespace recomb {

using Vector = std::vector<double>;

// ---------------------------------------------------------------------------
// Errors

// Connection-level failure; always retryable.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The backend answered with a non-success status.
class BackendError : public std::runtime_error {
 public:
  BackendError(int status, const std::string& what)
      : std::runtime_error("backend error " + std::to_string(status) + ": " + what), status_(status) {}
  int status() const { return status_; }
  bool retryable() const { return status_ == 429 || status_ >= 500; }

 private:
  int status_;
};

class RetryExhausted : public std::runtime_error {
 public:
  RetryExhausted(int attempts, const std::string& last)
      : std::runtime_error("retries exhausted after " + std::to_string(attempts) + " attempts: " + last),
        attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

// ---------------------------------------------------------------------------
// Requests

struct GenRequest {
  std::string model_id;
  std::string prompt;
  int max_tokens = 1024;
  double temperature = 0.0;

  void check() const {
    if (max_tokens <= 0) throw std::invalid_argument("GenRequest: max_tokens must be positive");
    if (!(temperature >= 0.0)) throw std::invalid_argument("GenRequest: temperature must be >= 0");
  }
};

struct EmbedRequest {
  std::string model_id;
  std::vector<std::string> texts;
  bool normalize = true;
};

struct GenResponse {
  std::string text;
  std::string created;  // cache entry creation time (UTC, ISO-8601)
  bool from_cache = false;
};

inline std::string utc_now_iso() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void normalize_in_place(Vector& v) {
  double n = 0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (!(n > 0)) throw std::runtime_error("cannot normalize a zero-norm embedding");
  for (double& x : v) x /= n;
}

// ---------------------------------------------------------------------------
// Backends

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string generate(const GenRequest& req) = 0;
  // Raw (unnormalized) vectors, one per text.
  virtual std::vector<Vector> embed(const std::string& model_id, const std::vector<std::string>& texts) = 0;
};

// Scriptable in-process backend. Generation replies are resolved in order:
// exact prompt entries, then substring rules (all substrings must occur),
// then an optional handler. Anything else is a BackendError(404), which the
// gateway does not retry. Embeddings come from a fixed table, optionally
// falling back to a deterministic hash embedding.
class MockBackend : public Backend {
 public:
  struct Rule {
    std::vector<std::string> contains;
    std::string reply;
    int error_status = 0;  // nonzero: answer with BackendError(status)
  };
  using Handler = std::function<std::optional<std::string>(const GenRequest&)>;

  void script(std::string prompt, std::string reply) {
    std::lock_guard lock(mu_);
    exact_[std::move(prompt)] = std::move(reply);
  }
  void add_rule(Rule rule) {
    std::lock_guard lock(mu_);
    rules_.push_back(std::move(rule));
  }
  void set_handler(Handler h) {
    std::lock_guard lock(mu_);
    handler_ = std::move(h);
  }
  void set_embedding(const std::string& text, Vector v) {
    std::lock_guard lock(mu_);
    table_[text] = std::move(v);
  }
  // Dimension of the hash fallback embedding; 0 disables the fallback.
  void set_hash_dim(size_t dim) {
    std::lock_guard lock(mu_);
    hash_dim_ = dim;
  }

  size_t generate_calls() const { return generate_calls_.load(); }
  size_t embed_calls() const { return embed_calls_.load(); }

  std::string generate(const GenRequest& req) override {
    ++generate_calls_;
    Handler handler;
    {
      std::lock_guard lock(mu_);
      if (auto it = exact_.find(req.prompt); it != exact_.end()) return it->second;
      for (const auto& r : rules_) {
        bool all = std::all_of(r.contains.begin(), r.contains.end(), [&](const std::string& s) {
          return req.prompt.find(s) != std::string::npos;
        });
        if (!all) continue;
        if (r.error_status != 0) throw BackendError(r.error_status, "scripted failure");
        return r.reply;
      }
      handler = handler_;
    }
    if (handler)
      if (auto reply = handler(req)) return *reply;
    throw BackendError(404, "unscripted prompt on mock backend");
  }

  std::vector<Vector> embed(const std::string&, const std::vector<std::string>& texts) override {
    ++embed_calls_;
    std::lock_guard lock(mu_);
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
      if (auto it = table_.find(t); it != table_.end()) {
        out.push_back(it->second);
      } else if (hash_dim_ > 0) {
        out.push_back(hash_embedding(t, hash_dim_));
      } else {
        throw BackendError(404, "no mock embedding for text: " + t);
      }
    }
    return out;
  }

  // Deterministic pseudo-random vector in [-1, 1]^dim derived from SHA-256.
  static Vector hash_embedding(const std::string& text, size_t dim) {
    Vector v;
    v.reserve(dim);
    for (size_t block = 0; v.size() < dim; ++block) {
      std::string h = sha256_hex(text + "#" + std::to_string(block));
      for (size_t i = 0; i + 8 <= h.size() && v.size() < dim; i += 8) {
        uint32_t x = static_cast<uint32_t>(std::stoul(h.substr(i, 8), nullptr, 16));
        v.push_back(static_cast<double>(x) / 4294967295.0 * 2.0 - 1.0);
      }
    }
    return v;
  }

  // Loads a script file (JSON lines: {"prompt": ..., "reply": ...} or
  // {"contains": [...], "reply": ..., "error": status}) and an optional
  // embedding table (JSON lines: {"text": ..., "vector": [...]}).
  static std::shared_ptr<MockBackend> from_files(const std::optional<fs::path>& script,
                                                 const std::optional<fs::path>& embeddings,
                                                 size_t hash_dim) {
    auto m = std::make_shared<MockBackend>();
    if (script) {
      for_each_jsonl(*script, [&](const Json& j, size_t) {
        if (j.contains("prompt")) {
          m->script(j["prompt"].get<std::string>(), j.value("reply", ""));
        } else {
          m->add_rule(Rule{j.at("contains").get<std::vector<std::string>>(), j.value("reply", ""),
                           j.value("error", 0)});
        }
        return true;
      });
    }
    if (embeddings) {
      for_each_jsonl(*embeddings, [&](const Json& j, size_t) {
        m->set_embedding(j.at("text").get<std::string>(), j.at("vector").get<Vector>());
        return true;
      });
    }
    m->set_hash_dim(hash_dim);
    return m;
  }

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::string> exact_;
  std::vector<Rule> rules_;
  Handler handler_;
  std::unordered_map<std::string, Vector> table_;
  size_t hash_dim_ = 0;
  std::atomic<size_t> generate_calls_{0};
  std::atomic<size_t> embed_calls_{0};
};

struct HttpBackendConfig {
  std::string base_url;                      // e.g. https://api.openai.com/v1
  std::string api_key_env = "RECOMB_API_KEY";
  int timeout_seconds = 120;
};

// OpenAI-compatible client: POST {base}/chat/completions and {base}/embeddings.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {
    auto scheme_end = cfg_.base_url.find("://");
    if (scheme_end == std::string::npos) throw std::invalid_argument("base_url needs a scheme: " + cfg_.base_url);
    auto path_start = cfg_.base_url.find('/', scheme_end + 3);
    origin_ = cfg_.base_url.substr(0, path_start);
    prefix_ = path_start == std::string::npos ? "" : cfg_.base_url.substr(path_start);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    if (const char* key = std::getenv(cfg_.api_key_env.c_str())) api_key_ = key;
  }

  std::string generate(const GenRequest& req) override {
    Json body{{"model", req.model_id},
              {"messages", Json::array({{{"role", "user"}, {"content", req.prompt}}})},
              {"max_tokens", req.max_tokens},
              {"temperature", req.temperature}};
    Json res = post("/chat/completions", body);
    try {
      return res.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const std::exception& e) {
      throw BackendError(502, std::string("malformed completion payload: ") + e.what());
    }
  }

  std::vector<Vector> embed(const std::string& model_id, const std::vector<std::string>& texts) override {
    Json res = post("/embeddings", Json{{"model", model_id}, {"input", texts}});
    std::vector<Vector> out(texts.size());
    try {
      for (const auto& item : res.at("data")) {
        size_t idx = item.value("index", size_t{0});
        if (idx >= out.size()) throw std::out_of_range("embedding index");
        out[idx] = item.at("embedding").get<Vector>();
      }
    } catch (const std::exception& e) {
      throw BackendError(502, std::string("malformed embedding payload: ") + e.what());
    }
    for (const auto& v : out)
      if (v.empty() || v.size() != out.front().size()) throw BackendError(502, "inconsistent embedding dimension");
    return out;
  }

 private:
  Json post(const std::string& path, const Json& body) {
    httplib::Client cli(origin_);
    cli.set_connection_timeout(cfg_.timeout_seconds);
    cli.set_read_timeout(cfg_.timeout_seconds);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    auto res = cli.Post(prefix_ + path, headers, body.dump(), "application/json");
    if (!res) throw TransportError("transport failure: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300) throw BackendError(res->status, res->body.substr(0, 500));
    Json j = Json::parse(res->body, nullptr, false);
    if (j.is_discarded()) throw BackendError(502, "response is not JSON");
    return j;
  }

  HttpBackendConfig cfg_;
  std::string origin_;
  std::string prefix_;
  std::string api_key_;
};

// ---------------------------------------------------------------------------
// Cache

struct CacheEntry {
  std::string key;
  std::string value;  // raw response; embeddings are stored as a JSON array
  std::string created;
};

// In-memory map, mirrored to `<dir>/<key[0:2]>/<key>.json` when a directory
// is configured. Disk writes are write-temp-then-rename.
class ResponseCache {
 public:
  explicit ResponseCache(std::optional<fs::path> dir = std::nullopt) : dir_(std::move(dir)) {}

  std::optional<CacheEntry> get(const std::string& key) {
    {
      std::lock_guard lock(mu_);
      if (auto it = mem_.find(key); it != mem_.end()) return it->second;
    }
    if (!dir_) return std::nullopt;
    fs::path p = path_for(key);
    if (!fs::exists(p)) return std::nullopt;
    Json j = Json::parse(read_file(p), nullptr, false);
    if (j.is_discarded() || j.value("key", "") != key) return std::nullopt;
    CacheEntry e{key, j.value("value", ""), j.value("created", "")};
    std::lock_guard lock(mu_);
    mem_.emplace(key, e);
    return e;
  }

  void put(const CacheEntry& e) {
    if (dir_)
      write_file_atomic(path_for(e.key),
                        canonical_dump(Json{{"key", e.key}, {"value", e.value}, {"created", e.created}}));
    std::lock_guard lock(mu_);
    mem_[e.key] = e;
  }

 private:
  fs::path path_for(const std::string& key) const { return *dir_ / key.substr(0, 2) / (key + ".json"); }

  std::optional<fs::path> dir_;
  std::mutex mu_;
  std::unordered_map<std::string, CacheEntry> mem_;
};

// ---------------------------------------------------------------------------
// Gateway

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_delay{30000};
};

struct GatewayOptions {
  std::optional<fs::path> cache_dir;
  RetryPolicy retry;
  std::function<std::string()> clock = utc_now_iso;
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };
};

class Gateway {
 public:
  explicit Gateway(std::shared_ptr<Backend> backend, GatewayOptions opts = {})
      : backend_(std::move(backend)), opts_(std::move(opts)), cache_(opts_.cache_dir) {
    if (!backend_) throw std::invalid_argument("Gateway: null backend");
  }

  static std::string generation_key(const GenRequest& req) {
    return sha256_hex(canonical_dump(Json{{"kind", "generate"},
                                          {"model", req.model_id},
                                          {"prompt", req.prompt},
                                          {"max_tokens", req.max_tokens},
                                          {"temperature", req.temperature}}));
  }

  static std::string embedding_key(const std::string& model_id, const std::string& text) {
    return sha256_hex(canonical_dump(Json{{"kind", "embed"}, {"model", model_id}, {"text", text}}));
  }

  GenResponse generate(const GenRequest& req) {
    req.check();
    std::string key = generation_key(req);
    if (auto hit = cache_.get(key)) return GenResponse{hit->value, hit->created, true};
    std::string text = with_retries([&] { return backend_->generate(req); });
    CacheEntry e{key, text, opts_.clock()};
    cache_.put(e);
    return GenResponse{text, e.created, false};
  }

  std::string generate_text(const std::string& model_id, const std::string& prompt, int max_tokens = 1024) {
    return generate(GenRequest{model_id, prompt, max_tokens, 0.0}).text;
  }

  // One vector per input text; texts missing from the cache are fetched in a
  // single backend call.
  std::vector<Vector> embed(const EmbedRequest& req) {
    if (req.texts.empty()) throw std::invalid_argument("EmbedRequest: texts must be nonempty");
    std::vector<Vector> out(req.texts.size());
    std::vector<std::string> missing;
    std::unordered_map<std::string, std::vector<size_t>> slots;
    for (size_t i = 0; i < req.texts.size(); ++i) {
      const auto& t = req.texts[i];
      if (auto hit = cache_.get(embedding_key(req.model_id, t))) {
        out[i] = Json::parse(hit->value).get<Vector>();
      } else {
        if (slots[t].empty()) missing.push_back(t);
        slots[t].push_back(i);
      }
    }
    if (!missing.empty()) {
      auto vecs = with_retries([&] { return backend_->embed(req.model_id, missing); });
      if (vecs.size() != missing.size()) throw BackendError(502, "embedding count mismatch");
      std::string created = opts_.clock();
      for (size_t k = 0; k < missing.size(); ++k) {
        cache_.put(CacheEntry{embedding_key(req.model_id, missing[k]), Json(vecs[k]).dump(), created});
        for (size_t i : slots[missing[k]]) out[i] = vecs[k];
      }
    }
    size_t dim = out.front().size();
    for (auto& v : out) {
      if (v.size() != dim) throw BackendError(502, "embedding dimension differs within a request");
      if (req.normalize) normalize_in_place(v);
    }
    return out;
  }

  Vector embed_one(const std::string& model_id, const std::string& text) {
    return embed(EmbedRequest{model_id, {text}, true}).front();
  }

  // Backend invocations, including retries.
  size_t network_calls() const { return network_calls_.load(); }

 private:
  template <class F>
  auto with_retries(F&& f) -> decltype(f()) {
    std::string last;
    auto delay = opts_.retry.base_delay;
    for (int attempt = 1; attempt <= opts_.retry.max_attempts; ++attempt) {
      ++network_calls_;
      try {
        return f();
      } catch (const TransportError& e) {
        last = e.what();
      } catch (const BackendError& e) {
        if (!e.retryable()) throw;
        last = e.what();
      }
      if (attempt < opts_.retry.max_attempts) {
        opts_.sleep(delay);
        delay = std::min(opts_.retry.max_delay,
                         std::chrono::milliseconds(static_cast<long long>(delay.count() * opts_.retry.multiplier)));
      }
    }
    throw RetryExhausted(opts_.retry.max_attempts, last);
  }

  std::shared_ptr<Backend> backend_;
  GatewayOptions opts_;
  ResponseCache cache_;
  std::atomic<size_t> network_calls_{0};
};

// ---------------------------------------------------------------------------
// Batching

template <class T>
struct BatchResult {
  std::optional<T> value;
  std::string error;
  bool ok() const { return value.has_value(); }
};

// Runs `fn` over `requests` with at most `max_in_flight` calls outstanding.
// Results are positionally aligned with the input; a throwing request yields
// an error entry without aborting the batch.
template <class Req, class Fn>
auto batch_execute(const std::vector<Req>& requests, size_t max_in_flight, Fn&& fn)
    -> std::vector<BatchResult<std::decay_t<std::invoke_result_t<Fn&, const Req&>>>> {
  using T = std::decay_t<std::invoke_result_t<Fn&, const Req&>>;
  if (max_in_flight < 1) throw std::invalid_argument("batch_execute: max_in_flight must be >= 1");
  std::vector<BatchResult<T>> results(requests.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < requests.size(); i = next.fetch_add(1)) {
      try {
        results[i].value.emplace(fn(requests[i]));
      } catch (const std::exception& e) {
        results[i].error = e.what();
      } catch (...) {
        results[i].error = "unknown error";
      }
    }
  };
  size_t n_workers = std::min(max_in_flight, requests.size());
  if (n_workers <= 1) {
    worker();
    return results;
  }
  std::vector<std::thread> threads;
  threads.reserve(n_workers);
  for (size_t w = 0; w < n_workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  return results;
}

}  // namespace recomb

#endif  // RECOMB_GATEWAY_HPP_
