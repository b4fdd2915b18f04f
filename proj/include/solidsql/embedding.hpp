#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "solidsql/llm_gateway.hpp"

namespace solidsql {

using Embedding = std::vector<double>;

class Embedder {
public:
    virtual ~Embedder() = default;
    /// Identifies the model and settings; indexes record it to detect mixing.
    virtual std::string provider_id() const = 0;
    virtual std::size_t dimension() const = 0;
    virtual Embedding embed(const std::string& text) = 0;
};

/// Deterministic offline embedder: lowercase word and punctuation tokens
/// hashed (FNV-1a) into a fixed number of count buckets.
class HashedBagOfTokens : public Embedder {
public:
    explicit HashedBagOfTokens(std::size_t dimension = 256);
    std::string provider_id() const override;
    std::size_t dimension() const override { return dimension_; }
    Embedding embed(const std::string& text) override;

    static std::vector<std::string> tokenize(const std::string& text);

private:
    std::size_t dimension_;
};

/// OpenAI-compatible `/embeddings` endpoint.
class RemoteEmbedder : public Embedder {
public:
    RemoteEmbedder(HttpEndpoint endpoint, std::string model, std::size_t dimension, Sleeper sleep = {});
    std::string provider_id() const override;
    std::size_t dimension() const override { return dimension_; }
    /// Throws ProviderError, including on a dimension mismatch.
    Embedding embed(const std::string& text) override;

private:
    HttpEndpoint endpoint_;
    std::string model_;
    std::size_t dimension_;
    Sleeper sleep_;
};

/// u.v / (|u| |v|). Throws std::invalid_argument on dimension mismatch and
/// ZeroVectorError when either norm is zero.
double cosine_similarity(const Embedding& u, const Embedding& v);

}  // namespace solidsql
