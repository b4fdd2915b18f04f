#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "solidsql/errors.hpp"
#include "solidsql/llm_gateway.hpp"

namespace solidsql {

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // path prefix without trailing slash
};

SplitUrl split_url(const std::string& base) {
    const auto scheme_end = base.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("API base URL needs a scheme: " + base);
    const auto path_start = base.find('/', scheme_end + 3);
    SplitUrl out;
    out.origin = base.substr(0, path_start);
    if (path_start != std::string::npos) out.prefix = base.substr(path_start);
    while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
    return out;
}

}  // namespace

HttpEndpoint HttpEndpoint::from_environment() {
    HttpEndpoint e;
    const char* base = std::getenv("SOLIDQL_API_BASE");
    if (!base || !*base) throw ConfigError("SOLIDQL_API_BASE is not set");
    e.base_url = base;
    if (const char* key = std::getenv("SOLIDQL_API_KEY")) e.api_key = key;
    return e;
}

nlohmann::json post_json(const HttpEndpoint& endpoint, const std::string& path, const nlohmann::json& body,
                         const Sleeper& sleep) {
    const auto url = split_url(endpoint.base_url);
    httplib::Client client(url.origin);
    client.set_connection_timeout(endpoint.timeout);
    client.set_read_timeout(endpoint.timeout);
    client.set_write_timeout(endpoint.timeout);
    httplib::Headers headers;
    if (!endpoint.api_key.empty()) headers.emplace("Authorization", "Bearer " + endpoint.api_key);

    const auto payload = body.dump();
    auto backoff = endpoint.initial_backoff;
    for (int attempt = 0;; ++attempt) {
        auto res = client.Post(url.prefix + path, headers, payload, "application/json");
        if (!res) throw ProviderError("request to " + endpoint.base_url + path + " failed: " + httplib::to_string(res.error()));
        if (res->status == 429) {
            if (attempt >= endpoint.max_retries) {
                throw RateLimited("rate limited by " + endpoint.base_url + " after " + std::to_string(attempt) + " retries");
            }
            spdlog::warn("rate limited (429), retry {} of {} in {} ms", attempt + 1, endpoint.max_retries, backoff.count());
            if (sleep) sleep(backoff);
            else std::this_thread::sleep_for(backoff);
            backoff *= 2;
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            throw ProviderError("HTTP " + std::to_string(res->status) + " from " + endpoint.base_url + path + ": " +
                                res->body.substr(0, 200));
        }
        try {
            return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw ProviderError(std::string("malformed JSON response: ") + e.what());
        }
    }
}

OpenAiChatProvider::OpenAiChatProvider(HttpEndpoint endpoint, Sleeper sleep)
    : endpoint_(std::move(endpoint)), sleep_(std::move(sleep)) {}

std::string OpenAiChatProvider::name() const { return "openai-compatible:" + endpoint_.base_url; }

std::string OpenAiChatProvider::complete(const ChatRequest& request) {
    request.validate();
    auto messages = nlohmann::json::array();
    for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.text}});
    const nlohmann::json body{{"model", request.model_id},
                              {"messages", messages},
                              {"temperature", request.temperature},
                              {"max_tokens", request.max_tokens}};
    const auto response = post_json(endpoint_, "/chat/completions", body, sleep_);
    try {
        return response.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("unexpected chat-completions response shape: ") + e.what());
    }
}

}  // namespace solidsql
