#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace solidsql {

struct ChatMessage {
    std::string role;
    std::string text;
};

struct ChatRequest {
    std::string model_id;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_tokens = 512;

    /// Throws std::invalid_argument when messages are empty or temperature < 0.
    void validate() const;
};

/// Canonical JSON text of a request: sorted keys, compact, message text with
/// whitespace runs collapsed to one space and trimmed.
std::string canonical_request(const ChatRequest& request);

/// Lowercase hex SHA-256 of canonical_request().
std::string request_hash(const ChatRequest& request);

nlohmann::json request_to_json(const ChatRequest& request);

struct Transcript {
    std::string hash;
    nlohmann::json request;
    std::string response;
    std::string provider;
    std::string recorded_at;
};

/// Append-only JSONL store of transcripts keyed by request hash.
/// Safe to share between threads; writes are serialized.
class TranscriptStore {
public:
    /// Loads any existing records from `path`. A missing file is an empty store.
    explicit TranscriptStore(std::filesystem::path path);

    std::optional<Transcript> find(const std::string& hash) const;
    /// Appends unless a record with the same hash already exists. Returns true when written.
    bool append(const Transcript& t);
    std::size_t size() const;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    mutable std::mutex mu_;
    std::unordered_map<std::string, Transcript> by_hash_;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual std::string name() const = 0;
    /// Throws ProviderError / RateLimited.
    virtual std::string complete(const ChatRequest& request) = 0;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

struct HttpEndpoint {
    std::string base_url;  // e.g. http://host:port/v1
    std::string api_key;
    std::chrono::seconds timeout{60};
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{500};

    /// Reads SOLIDQL_API_BASE and SOLIDQL_API_KEY. Throws ConfigError when the base is unset.
    static HttpEndpoint from_environment();
};

/// POSTs JSON to base_url + path. Retries HTTP 429 up to max_retries times
/// with exponential backoff, then throws RateLimited; other failures throw ProviderError.
nlohmann::json post_json(const HttpEndpoint& endpoint, const std::string& path, const nlohmann::json& body,
                         const Sleeper& sleep);

/// OpenAI-compatible chat-completions provider.
class OpenAiChatProvider : public ChatProvider {
public:
    explicit OpenAiChatProvider(HttpEndpoint endpoint, Sleeper sleep = {});
    std::string name() const override;
    std::string complete(const ChatRequest& request) override;

private:
    HttpEndpoint endpoint_;
    Sleeper sleep_;
};

enum class GatewayMode { Live, Record, Replay };

GatewayMode parse_gateway_mode(const std::string& text);
std::string to_string(GatewayMode mode);

using WallClock = std::function<std::chrono::system_clock::time_point()>;

class Gateway {
public:
    /// `provider` may be null in replay mode; `store` may be null in live mode.
    Gateway(GatewayMode mode, std::shared_ptr<ChatProvider> provider, std::shared_ptr<TranscriptStore> store,
            std::size_t max_concurrent = 4, WallClock clock = {});

    /// Replay: stored response or ReplayMiss. Record: stored response if present,
    /// otherwise calls the provider and appends. Live: always calls the provider.
    std::string complete(const ChatRequest& request);

    GatewayMode mode() const { return mode_; }

private:
    GatewayMode mode_;
    std::shared_ptr<ChatProvider> provider_;
    std::shared_ptr<TranscriptStore> store_;
    std::counting_semaphore<1024> slots_;
    WallClock clock_;
};

}  // namespace solidsql
