#include "solidsql/embedding.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "solidsql/errors.hpp"

namespace solidsql {

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

HashedBagOfTokens::HashedBagOfTokens(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ == 0) throw std::invalid_argument("embedding dimension must be positive");
}

std::string HashedBagOfTokens::provider_id() const { return "hashed-bow-fnv1a-" + std::to_string(dimension_); }

std::vector<std::string> HashedBagOfTokens::tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string word;
    auto flush = [&] {
        if (!word.empty()) tokens.push_back(std::move(word));
        word.clear();
    };
    for (const unsigned char c : text) {
        if (std::isalnum(c) || c >= 0x80) {
            word += static_cast<char>(std::tolower(c));
        } else {
            flush();
            if (!std::isspace(c)) tokens.emplace_back(1, static_cast<char>(c));
        }
    }
    flush();
    return tokens;
}

Embedding HashedBagOfTokens::embed(const std::string& text) {
    Embedding v(dimension_, 0.0);
    for (const auto& t : tokenize(text)) v[fnv1a(t) % dimension_] += 1.0;
    return v;
}

RemoteEmbedder::RemoteEmbedder(HttpEndpoint endpoint, std::string model, std::size_t dimension, Sleeper sleep)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), dimension_(dimension), sleep_(std::move(sleep)) {}

std::string RemoteEmbedder::provider_id() const { return "remote:" + model_ + ":" + std::to_string(dimension_); }

Embedding RemoteEmbedder::embed(const std::string& text) {
    const auto response = post_json(endpoint_, "/embeddings", {{"model", model_}, {"input", text}}, sleep_);
    Embedding v;
    try {
        v = response.at("data").at(0).at("embedding").get<Embedding>();
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("unexpected embeddings response shape: ") + e.what());
    }
    if (v.size() != dimension_) {
        throw ProviderError("embedding has dimension " + std::to_string(v.size()) + ", expected " +
                            std::to_string(dimension_));
    }
    return v;
}

double cosine_similarity(const Embedding& u, const Embedding& v) {
    if (u.size() != v.size() || u.empty()) throw std::invalid_argument("cosine similarity needs equal nonzero dimensions");
    double dot = 0, nu = 0, nv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) throw ZeroVectorError();
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

}  // namespace solidsql
