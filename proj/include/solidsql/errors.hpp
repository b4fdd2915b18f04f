#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace solidsql {

/// Malformed SQL text. `offset` is the byte position of the offending token.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t offset, const std::string& message)
        : std::runtime_error("parse error at offset " + std::to_string(offset) + ": " + message),
          offset_(offset),
          detail_(message) {}

    std::size_t offset() const noexcept { return offset_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t offset_;
    std::string detail_;
};

/// An identifier in a statement names no schema element and is not an alias.
class ResolutionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent schema (duplicate names, dangling key references).
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ZeroVectorError : public std::runtime_error {
public:
    ZeroVectorError() : std::runtime_error("cosine similarity of a zero vector is undefined") {}
};

/// No SQL statement could be located in an LLM completion.
class ExtractError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RewriteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PredictorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Gateway failures.
class ProviderError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RateLimited : public ProviderError {
public:
    using ProviderError::ProviderError;
};

class ReplayMiss : public std::runtime_error {
public:
    explicit ReplayMiss(const std::string& hash)
        : std::runtime_error("no recorded transcript for request " + hash), hash_(hash) {}
    const std::string& hash() const noexcept { return hash_; }

private:
    std::string hash_;
};

// Evaluation failures.
class ExecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ExecTimeout : public ExecError {
public:
    using ExecError::ExecError;
};

/// Bad configuration, flags, or missing input files.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Missing credentials, unreachable services, unwritable outputs.
class EnvironmentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace solidsql
