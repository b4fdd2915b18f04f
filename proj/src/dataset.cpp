#include "solidsql/dataset.hpp"

#include <fstream>
#include <sstream>

#include "solidsql/errors.hpp"

namespace solidsql {

namespace {

Example example_from_json(const nlohmann::json& j, const std::string& where) {
    Example e;
    try {
        e.db_id = j.at("db_id").get<std::string>();
        e.question = j.at("question").get<std::string>();
        if (j.contains("query")) e.query = j["query"].get<std::string>();
        else e.query = j.at("SQL").get<std::string>();
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(where + ": " + ex.what());
    }
    return e;
}

}  // namespace

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::vector<nlohmann::json> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            rows.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return rows;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& rows) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    for (const auto& row : rows) out << row.dump() << '\n';
}

std::vector<Example> load_examples(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const auto text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    std::vector<Example> out;
    if (first != std::string::npos && text[first] == '[') {
        nlohmann::json arr;
        try {
            arr = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(path.string() + ": " + e.what());
        }
        for (std::size_t i = 0; i < arr.size(); ++i) {
            out.push_back(example_from_json(arr[i], path.string() + "[" + std::to_string(i) + "]"));
        }
        return out;
    }
    const auto rows = read_jsonl(path);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.push_back(example_from_json(rows[i], path.string() + " record " + std::to_string(i)));
    }
    return out;
}

}  // namespace solidsql
