#include "solidsql/llm_gateway.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include "solidsql/errors.hpp"

namespace solidsql {

namespace {

std::string collapse_whitespace(const std::string& text) {
    std::string out;
    bool pending_space = false;
    for (const unsigned char ch : text) {
        if (std::isspace(ch)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out += ' ';
        pending_space = false;
        out += static_cast<char>(ch);
    }
    return out;
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 0xF];
    }
    return out;
}

std::string iso8601(std::chrono::system_clock::time_point tp) {
    const auto t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

nlohmann::json transcript_to_json(const Transcript& t) {
    return {{"hash", t.hash},
            {"request", t.request},
            {"response", t.response},
            {"provider", t.provider},
            {"recorded_at", t.recorded_at}};
}

}  // namespace

void ChatRequest::validate() const {
    if (messages.empty()) throw std::invalid_argument("chat request has no messages");
    if (temperature < 0.0) throw std::invalid_argument("chat request temperature must be >= 0");
}

nlohmann::json request_to_json(const ChatRequest& request) {
    auto messages = nlohmann::json::array();
    for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"text", m.text}});
    return {{"model_id", request.model_id},
            {"messages", messages},
            {"temperature", request.temperature},
            {"max_tokens", request.max_tokens}};
}

std::string canonical_request(const ChatRequest& request) {
    auto j = request_to_json(request);
    for (auto& m : j["messages"]) {
        m["role"] = collapse_whitespace(m["role"].get<std::string>());
        m["text"] = collapse_whitespace(m["text"].get<std::string>());
    }
    j["model_id"] = collapse_whitespace(request.model_id);
    // nlohmann::json objects are key-sorted, so field order never matters.
    return j.dump();
}

std::string request_hash(const ChatRequest& request) { return sha256_hex(canonical_request(request)); }

TranscriptStore::TranscriptStore(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            Transcript t{j.at("hash").get<std::string>(), j.value("request", nlohmann::json::object()),
                         j.at("response").get<std::string>(), j.value("provider", ""), j.value("recorded_at", "")};
            by_hash_.try_emplace(t.hash, std::move(t));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(path_.string() + ":" + std::to_string(lineno) + ": bad transcript record: " + e.what());
        }
    }
}

std::optional<Transcript> TranscriptStore::find(const std::string& hash) const {
    std::lock_guard lock(mu_);
    const auto it = by_hash_.find(hash);
    if (it == by_hash_.end()) return std::nullopt;
    return it->second;
}

bool TranscriptStore::append(const Transcript& t) {
    std::lock_guard lock(mu_);
    if (by_hash_.count(t.hash)) return false;
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::app);
    if (!out) throw ConfigError("cannot append to transcript store " + path_.string());
    out << transcript_to_json(t).dump() << '\n';
    out.flush();
    by_hash_.emplace(t.hash, t);
    return true;
}

std::size_t TranscriptStore::size() const {
    std::lock_guard lock(mu_);
    return by_hash_.size();
}

GatewayMode parse_gateway_mode(const std::string& text) {
    if (text == "live") return GatewayMode::Live;
    if (text == "record") return GatewayMode::Record;
    if (text == "replay") return GatewayMode::Replay;
    throw ConfigError("unknown gateway mode '" + text + "' (expected live, record or replay)");
}

std::string to_string(GatewayMode mode) {
    switch (mode) {
        case GatewayMode::Live: return "live";
        case GatewayMode::Record: return "record";
        case GatewayMode::Replay: return "replay";
    }
    return "?";
}

Gateway::Gateway(GatewayMode mode, std::shared_ptr<ChatProvider> provider, std::shared_ptr<TranscriptStore> store,
                 std::size_t max_concurrent, WallClock clock)
    : mode_(mode),
      provider_(std::move(provider)),
      store_(std::move(store)),
      slots_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(max_concurrent, 1, 1024))),
      clock_(clock ? std::move(clock) : WallClock([] { return std::chrono::system_clock::now(); })) {
    if (mode_ != GatewayMode::Replay && !provider_) throw ConfigError("gateway needs a provider outside replay mode");
    if (mode_ != GatewayMode::Live && !store_) throw ConfigError("gateway needs a transcript store in " + to_string(mode_) + " mode");
}

std::string Gateway::complete(const ChatRequest& request) {
    request.validate();
    const auto hash = request_hash(request);
    if (mode_ != GatewayMode::Live) {
        if (auto hit = store_->find(hash)) return hit->response;
        if (mode_ == GatewayMode::Replay) throw ReplayMiss(hash);
    }

    std::string response;
    {
        slots_.acquire();
        struct Release {
            std::counting_semaphore<1024>& s;
            ~Release() { s.release(); }
        } release{slots_};
        response = provider_->complete(request);
    }
    if (mode_ == GatewayMode::Record) {
        store_->append({hash, request_to_json(request), response, provider_->name(), iso8601(clock_())});
    }
    return response;
}

}  // namespace solidsql
