#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rar/common.hpp"

namespace rar::gen {

enum class Role { System, User, Assistant };

std::string to_string(Role r);

struct Message {
    Role role;
    std::string content;
};

// One chat-completion call. At most one system message, and it comes first.
struct BackendRequest {
    std::vector<Message> messages;
    double temperature = 0.7;
    int max_tokens = 1024;
    std::optional<int64_t> seed;

    void validate() const;
    // Stable content hash of the fully rendered request; cache and replay key.
    std::string digest() const;
    // Wire shape: the OpenAI-compatible /v1/chat/completions body.
    std::string to_json(const std::string& model) const;
};

class ChatBackend {
  public:
    virtual ~ChatBackend() = default;
    virtual std::string complete(const BackendRequest& request) = 0;
    virtual std::string id() const = 0;
    // Monotonic per-backend timestamp for provenance. Wall clock for real
    // backends; a virtual counter for the mock so artifacts stay byte-stable.
    virtual std::string timestamp() = 0;
};

// Scripted/deterministic local backend. Resolution order per request:
//   1. exact `key` match on the request digest,
//   2. first `match` entry whose substring occurs in the rendered request,
//   3. deterministic synthesizer (if enabled),
//   4. BackendError.
// Entries with "fail": true raise BackendError when matched, which is how
// tests script per-record failures.
class MockBackend : public ChatBackend {
  public:
    struct Entry {
        std::string key;       // request digest, empty = unused
        std::string match;     // substring of the rendered request, empty = unused
        std::string response;
        bool fail = false;
    };

    MockBackend() = default;
    explicit MockBackend(std::vector<Entry> table, bool synthesize = true)
        : table_(std::move(table)), synthesize_(synthesize) {}
    MockBackend(MockBackend&& other) noexcept
        : table_(std::move(other.table_)),
          synthesize_(other.synthesize_),
          calls_(other.calls_.load()) {}

    // Loads a JSONL fixture of Entry objects.
    static MockBackend from_fixture(const std::string& path, bool synthesize = true);

    std::string complete(const BackendRequest& request) override;
    std::string id() const override { return "mock"; }
    std::string timestamp() override;

    int calls() const { return calls_.load(); }

  private:
    std::string synthesize(const BackendRequest& request) const;

    std::vector<Entry> table_;
    bool synthesize_ = true;
    std::atomic<int> calls_{0};
};

struct HttpOptions {
    std::string base_url;   // e.g. http://127.0.0.1:8089 ; env RAR_BASE_URL overrides
    std::string api_key;    // env RAR_API_KEY overrides
    std::string model = "default";
    int timeout_sec = 60;
    int max_attempts = 3;
    int backoff_ms = 250;   // doubled per retry
};

// Minimal client for the de-facto chat-completions wire shape:
// POST {base}/v1/chat/completions, answer at choices[0].message.content.
class HttpBackend : public ChatBackend {
  public:
    explicit HttpBackend(HttpOptions options);

    std::string complete(const BackendRequest& request) override;
    std::string id() const override { return "http:" + options_.model; }
    std::string timestamp() override;

  private:
    HttpOptions options_;
};

// Digest-keyed response cache wrapper. A repeated request never reaches the
// inner backend twice; safe for concurrent readers/writers.
class CachingBackend : public ChatBackend {
  public:
    explicit CachingBackend(std::shared_ptr<ChatBackend> inner) : inner_(std::move(inner)) {}

    std::string complete(const BackendRequest& request) override;
    std::string id() const override { return inner_->id(); }
    std::string timestamp() override { return inner_->timestamp(); }

    int hits() const { return hits_; }
    int misses() const { return misses_; }

  private:
    std::shared_ptr<ChatBackend> inner_;
    std::unordered_map<std::string, std::string> cache_;
    std::mutex mutex_;
    int hits_ = 0;
    int misses_ = 0;
};

// Retries BackendError with exponential backoff; other exceptions pass through.
class RetryingBackend : public ChatBackend {
  public:
    RetryingBackend(std::shared_ptr<ChatBackend> inner, int max_attempts = 3, int backoff_ms = 250)
        : inner_(std::move(inner)), max_attempts_(max_attempts), backoff_ms_(backoff_ms) {}

    std::string complete(const BackendRequest& request) override;
    std::string id() const override { return inner_->id(); }
    std::string timestamp() override { return inner_->timestamp(); }

  private:
    std::shared_ptr<ChatBackend> inner_;
    int max_attempts_;
    int backoff_ms_;
};

}  // namespace rar::gen
