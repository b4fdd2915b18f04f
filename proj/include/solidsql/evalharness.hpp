#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "solidsql/dataset.hpp"
#include "solidsql/pipeline.hpp"

namespace solidsql {

using Value = std::variant<std::monostate, std::int64_t, double, std::string>;
using Row = std::vector<Value>;

struct ResultTable {
    std::vector<Row> rows;
    bool ordered = false;  // the statement has a top-level ORDER BY
};

inline constexpr std::chrono::milliseconds kDefaultQueryTimeout{30000};

/// Runs `sql` on a read-only connection. Throws ExecError on any SQLite error
/// and ExecTimeout when the query runs past `timeout`.
ResultTable execute_sql(const std::filesystem::path& db_path, const std::string& sql,
                        std::chrono::milliseconds timeout = kDefaultQueryTimeout);

/// Floats compare with tolerance 1e-6 (relative above magnitude 1), NULL only
/// equals NULL, and each row's values are sorted so column order is ignored.
/// Order matters only when `gold` is ordered.
bool tables_match(const ResultTable& pred, const ResultTable& gold);

/// Execution verdict for one pair. `gold_ok` is false when gold itself failed;
/// such items are excluded from EX.
struct ExecVerdict {
    bool match = false;
    bool gold_ok = true;
    std::string error;
};

ExecVerdict execution_verdict(const std::string& pred_sql, const std::string& gold_sql,
                              const std::filesystem::path& db_path,
                              std::chrono::milliseconds timeout = kDefaultQueryTimeout);

/// False when pred fails or gold fails (the latter is logged).
bool execution_match(const std::string& pred_sql, const std::string& gold_sql, const std::filesystem::path& db_path,
                     std::chrono::milliseconds timeout = kDefaultQueryTimeout);

/// Canonical form used by exact_match: the normalized render when the SQL
/// parses, otherwise lowercased text with collapsed whitespace and no trailing
/// semicolon.
std::string canonical_sql(const std::string& sql);
bool exact_match(const std::string& pred_sql, const std::string& gold_sql);

struct RobustnessVerdict {
    bool robust = false;
    std::string reason;
};

RobustnessVerdict robustness_check(const PipelineResult& clean, const PipelineResult& perturbed,
                                   const std::filesystem::path& db_path,
                                   std::chrono::milliseconds timeout = kDefaultQueryTimeout);

/// `<root>/<db_id>/<db_id>.sqlite`
std::filesystem::path database_path(const std::filesystem::path& root, const std::string& db_id);

struct EvalRecord {
    std::string question;
    std::string db_id;
    std::string gold_sql;
    std::string pred_sql;
    bool ex = false;
    bool em = false;
    bool excluded = false;  // gold did not execute
    std::optional<std::string> error;
    std::vector<std::string> flags;

    nlohmann::ordered_json to_json() const;
};

struct FlagBreakdown {
    std::size_t items = 0;
    std::size_t ex = 0;
};

struct EvalReport {
    std::vector<EvalRecord> records;
    std::size_t total = 0;
    std::size_t scored = 0;    // total minus exclusions
    std::size_t excluded = 0;
    std::size_t ex_correct = 0;
    std::size_t em_correct = 0;
    double ex = 0;  // percent of scored
    double em = 0;
    std::map<std::string, FlagBreakdown> by_flag;

    nlohmann::ordered_json summary_json() const;
    std::string text_table() const;
};

/// Predictions align with `dataset` by index; a length mismatch throws
/// ConfigError. Databases live under `db_root`.
EvalReport evaluate(const std::vector<Example>& dataset, const std::vector<PipelineResult>& predictions,
                    const std::filesystem::path& db_root, std::size_t workers = 4,
                    std::chrono::milliseconds timeout = kDefaultQueryTimeout);

struct RobustnessReport {
    std::size_t pairs = 0;
    std::size_t robust = 0;
    double rate = 0;  // percent
    std::vector<RobustnessVerdict> verdicts;

    nlohmann::ordered_json summary_json() const;
};

/// Clean and perturbed results align by index and must share db_id.
RobustnessReport evaluate_robustness(const std::vector<PipelineResult>& clean,
                                     const std::vector<PipelineResult>& perturbed,
                                     const std::filesystem::path& db_root, std::size_t workers = 4,
                                     std::chrono::milliseconds timeout = kDefaultQueryTimeout);

/// Creates (or replaces) a database file from a SQL script.
void build_database(const std::filesystem::path& db_path, const std::string& script);

}  // namespace solidsql
