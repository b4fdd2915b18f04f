#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace solidsql {

/// One benchmark item: question, gold SQL, database id.
struct Example {
    std::string db_id;
    std::string question;
    std::string query;
};

/// Reads a benchmark file: a JSON array of objects or one object per line.
/// Gold SQL is taken from "query" (Spider) or "SQL" (Bird). Throws ConfigError.
std::vector<Example> load_examples(const std::filesystem::path& path);

/// Reads a JSONL file into objects. Blank lines are skipped. Throws ConfigError.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

/// Writes objects one per line, replacing the file. Throws ConfigError.
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& rows);

}  // namespace solidsql
