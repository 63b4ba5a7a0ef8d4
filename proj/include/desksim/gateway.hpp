#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "desksim/errors.hpp"
#include "desksim/sha256.hpp"

namespace desksim {

struct SamplingParams {
  double temperature = 0.0;
  int max_output = 512;  // output token budget

  bool operator==(const SamplingParams&) const = default;
};

struct CompletionRequest {
  std::string backend;
  std::string prompt;
  SamplingParams sampling;
};

struct CompletionResponse {
  std::string text;  // raw model output, byte-exact
  std::chrono::milliseconds latency{0};
  bool cache_hit = false;
};

// Content address of a completion request. Any byte change in the backend
// name, prompt, or sampling parameters yields a different key.
class CacheKey {
 public:
  static CacheKey of(const CompletionRequest& req) {
    Sha256 h;
    auto field = [&](std::string_view name, std::string_view value) {
      std::uint64_t n = value.size();
      std::uint8_t len[8];
      for (int i = 0; i < 8; ++i) len[i] = static_cast<std::uint8_t>(n >> (8 * i));
      h.update(name);
      h.update(len, sizeof(len));
      h.update(value);
    };
    char temp[64];
    std::snprintf(temp, sizeof(temp), "%.17g", req.sampling.temperature);
    field("backend", req.backend);
    field("temperature", temp);
    field("max_output", std::to_string(req.sampling.max_output));
    field("prompt", req.prompt);
    CacheKey key;
    key.digest_ = h.finish();
    return key;
  }

  std::string hex() const { return Sha256::hex(digest_); }

  auto operator<=>(const CacheKey&) const = default;

 private:
  Sha256::Digest digest_{};
};

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

class Backend {
 public:
  virtual ~Backend() = default;

  // One prompt in, one raw completion out. Implementations signal failures
  // with the gateway error taxonomy; TransientBackendError and RateLimited
  // are retried by the gateway, everything else is final.
  virtual std::string complete(const std::string& prompt, const SamplingParams& sampling) = 0;

  virtual std::string kind() const = 0;

  // Whatever the provider reports about the serving model; recorded in the
  // run manifest.
  virtual std::string model_id() const { return {}; }
};

// Deterministic canned backend. Rules are checked in insertion order and the
// first rule whose `match` substring occurs in the prompt wins; an empty
// `match` is a catch-all. No rule matching (or an empty script) behaves like
// a provider that returned no text.
class ScriptedBackend : public Backend {
 public:
  struct Rule {
    std::string match;
    std::string response;
  };

  ScriptedBackend() = default;
  explicit ScriptedBackend(std::vector<Rule> rules) : rules_(std::move(rules)) {}

  void add_rule(std::string match, std::string response) {
    rules_.push_back({std::move(match), std::move(response)});
  }

  std::string complete(const std::string& prompt, const SamplingParams&) override {
    calls_.fetch_add(1, std::memory_order_relaxed);
    for (const auto& rule : rules_) {
      if (rule.match.empty() || prompt.find(rule.match) != std::string::npos) {
        if (rule.response.empty()) throw EmptyResponse("scripted backend produced no text");
        return rule.response;
      }
    }
    throw EmptyResponse("no scripted response matches the prompt");
  }

  std::string kind() const override { return "scripted"; }
  std::string model_id() const override { return "scripted"; }

  long long calls() const { return calls_.load(std::memory_order_relaxed); }

 private:
  std::vector<Rule> rules_;
  std::atomic<long long> calls_{0};
};

// ---------------------------------------------------------------------------
// Response cache: append-only, content addressed, one blob per key plus a
// human-readable JSONL index. An empty directory path keeps the cache purely
// in memory (used by short-lived tests).
// ---------------------------------------------------------------------------

class ResponseCache {
 public:
  ResponseCache() = default;

  explicit ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!dir_.empty()) {
      std::filesystem::create_directories(dir_ / "blobs");
    }
  }

  bool persistent() const { return !dir_.empty(); }

  std::optional<std::string> lookup(const CacheKey& key) const {
    {
      std::lock_guard lock(mutex_);
      auto it = memory_.find(key);
      if (it != memory_.end()) return it->second;
    }
    if (dir_.empty()) return std::nullopt;
    std::ifstream in(blob_path(key), std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    {
      std::lock_guard lock(mutex_);
      memory_.emplace(key, text);
    }
    return text;
  }

  // First writer wins; later inserts for the same key are no-ops. Returns the
  // stored text so concurrent callers all observe one canonical response.
  std::string insert(const CacheKey& key, const CompletionRequest& req, const std::string& text) {
    std::string stored;
    bool won;
    {
      std::lock_guard lock(mutex_);
      auto [it, inserted] = memory_.emplace(key, text);
      stored = it->second;
      won = inserted;
    }
    if (!won || dir_.empty()) return stored;
    auto final_path = blob_path(key);
    if (std::filesystem::exists(final_path)) return stored;
    auto tmp_path = final_path;
    tmp_path += ".tmp";
    {
      std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
      out.write(text.data(), static_cast<std::streamsize>(text.size()));
    }
    std::error_code ec;
    std::filesystem::rename(tmp_path, final_path, ec);
    if (ec) {
      std::filesystem::remove(tmp_path, ec);
      return stored;
    }
    append_index(key, req);
    return stored;
  }

  const std::filesystem::path& directory() const { return dir_; }

  size_t memory_entries() const {
    std::lock_guard lock(mutex_);
    return memory_.size();
  }

 private:
  std::filesystem::path blob_path(const CacheKey& key) const { return dir_ / "blobs" / key.hex(); }

  static std::string escape_json(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
      if (c == '"' || c == '\\') out.push_back('\\');
      if (static_cast<unsigned char>(c) < 0x20) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "\\u%04x", c);
        out += buf;
      } else {
        out.push_back(c);
      }
    }
    return out;
  }

  void append_index(const CacheKey& key, const CompletionRequest& req) {
    char temp[64];
    std::snprintf(temp, sizeof(temp), "%.17g", req.sampling.temperature);
    std::ostringstream line;
    line << "{\"key\":\"" << key.hex() << "\",\"backend\":\"" << escape_json(req.backend)
         << "\",\"temperature\":" << temp << ",\"max_output\":" << req.sampling.max_output
         << ",\"prompt_bytes\":" << req.prompt.size() << ",\"prompt_sha256\":\""
         << Sha256::hex_digest(req.prompt) << "\"}\n";
    std::lock_guard lock(index_mutex_);
    std::ofstream out(dir_ / "index.jsonl", std::ios::app);
    out << line.str();
  }

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  std::mutex index_mutex_;
  mutable std::map<CacheKey, std::string> memory_;
};

// ---------------------------------------------------------------------------
// Gateway
// ---------------------------------------------------------------------------

struct RetryPolicy {
  int attempts = 5;
  int base_delay_ms = 500;
  int max_delay_ms = 30000;

  int delay_for_attempt(int attempt) const {  // attempt is 1-based
    long long delay = base_delay_ms;
    for (int i = 1; i < attempt && delay < max_delay_ms; ++i) delay *= 2;
    return static_cast<int>(std::min<long long>(delay, max_delay_ms));
  }
};

// Uniform entry point for every agent call: cache-first, then a retried
// backend call with per-backend admission spacing.
class Gateway {
 public:
  explicit Gateway(std::filesystem::path cache_dir = {}, RetryPolicy retry = {})
      : cache_(std::move(cache_dir)), retry_(retry) {}

  std::string register_backend(const std::string& name, std::unique_ptr<Backend> backend,
                               int min_interval_ms = 0) {
    if (name.empty()) throw ConfigError("backend name must not be empty");
    std::lock_guard lock(mutex_);
    if (backends_.count(name)) throw ConfigError("duplicate backend name: " + name);
    backends_[name] = Entry{std::move(backend), std::chrono::milliseconds(min_interval_ms),
                            std::chrono::steady_clock::now()};
    return name;
  }

  std::string register_scripted(const std::string& name, std::vector<ScriptedBackend::Rule> rules) {
    return register_backend(name, std::make_unique<ScriptedBackend>(std::move(rules)));
  }

  bool has_backend(const std::string& name) const {
    std::lock_guard lock(mutex_);
    return backends_.count(name) > 0;
  }

  std::vector<std::pair<std::string, std::string>> backend_kinds() const {
    std::lock_guard lock(mutex_);
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [name, entry] : backends_) out.emplace_back(name, entry.backend->kind());
    return out;
  }

  std::string backend_model(const std::string& name) const {
    std::lock_guard lock(mutex_);
    auto it = backends_.find(name);
    return it == backends_.end() ? std::string{} : it->second.backend->model_id();
  }

  CompletionResponse complete(const CompletionRequest& req) {
    if (req.prompt.empty()) throw ConfigError("completion request with empty prompt");
    const auto key = CacheKey::of(req);
    if (auto hit = cache_.lookup(key)) {
      return CompletionResponse{std::move(*hit), std::chrono::milliseconds(0), true};
    }

    Backend* backend = nullptr;
    {
      std::lock_guard lock(mutex_);
      auto it = backends_.find(req.backend);
      if (it == backends_.end())
        throw BackendUnavailable("backend not registered: " + req.backend);
      backend = it->second.backend.get();
    }

    const auto started = std::chrono::steady_clock::now();
    std::string text;
    bool rate_limited = false;
    std::string last_error;
    int attempt = 0;
    for (;;) {
      ++attempt;
      admit(req.backend);
      try {
        text = backend->complete(req.prompt, req.sampling);
        break;
      } catch (const RateLimited& e) {
        rate_limited = true;
        last_error = e.what();
      } catch (const TransientBackendError& e) {
        rate_limited = false;
        last_error = e.what();
      }
      if (attempt >= retry_.attempts) {
        if (rate_limited) throw RateLimited(req.backend + ": " + last_error);
        throw BackendUnavailable(req.backend + ": " + last_error);
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(retry_.delay_for_attempt(attempt)));
    }
    if (text.empty()) throw EmptyResponse(req.backend + " returned no text");

    text = cache_.insert(key, req, text);
    const auto latency =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
    return CompletionResponse{std::move(text), latency, false};
  }

  const ResponseCache& cache() const { return cache_; }
  ResponseCache& cache() { return cache_; }
  const RetryPolicy& retry() const { return retry_; }

 private:
  struct Entry {
    std::unique_ptr<Backend> backend;
    std::chrono::milliseconds min_interval{0};
    std::chrono::steady_clock::time_point next_allowed;
  };

  // Per-backend admission spacing; callers block until their slot.
  void admit(const std::string& name) {
    std::chrono::steady_clock::time_point wait_until;
    {
      std::lock_guard lock(mutex_);
      auto& entry = backends_.at(name);
      if (entry.min_interval.count() == 0) return;
      const auto now = std::chrono::steady_clock::now();
      wait_until = std::max(entry.next_allowed, now);
      entry.next_allowed = wait_until + entry.min_interval;
    }
    std::this_thread::sleep_until(wait_until);
  }

  mutable std::mutex mutex_;
  std::map<std::string, Entry> backends_;
  ResponseCache cache_;
  RetryPolicy retry_;
};

}  // namespace desksim
