#include "solidsql/evalharness.hpp"

#include <spdlog/spdlog.h>
#include <sqlite3.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "solidsql/errors.hpp"
#include "solidsql/parallel.hpp"
#include "solidsql/sql_ast.hpp"
#include "solidsql/sql_parser.hpp"

namespace solidsql {

namespace {

constexpr double kFloatTolerance = 1e-6;

struct Connection {
    sqlite3* db = nullptr;
    ~Connection() {
        if (db) sqlite3_close(db);
    }
};

struct Statement {
    sqlite3_stmt* stmt = nullptr;
    ~Statement() {
        if (stmt) sqlite3_finalize(stmt);
    }
};

struct Deadline {
    std::chrono::steady_clock::time_point at;
    bool expired = false;
};

int check_deadline(void* arg) {
    auto* d = static_cast<Deadline*>(arg);
    if (std::chrono::steady_clock::now() >= d->at) {
        d->expired = true;
        return 1;
    }
    return 0;
}

bool blank(const char* s) {
    for (; s && *s; ++s) {
        if (!std::isspace(static_cast<unsigned char>(*s)) && *s != ';') return false;
    }
    return true;
}

// Used only when our parser rejects the statement but SQLite accepts it.
bool scan_top_level_order_by(const std::string& sql) {
    int depth = 0;
    bool found = false;
    std::string upper;
    upper.reserve(sql.size());
    for (char c : sql) upper += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (std::size_t i = 0; i < upper.size(); ++i) {
        const char c = upper[i];
        if (c == '\'' || c == '"' || c == '`') {
            const auto end = upper.find(c, i + 1);
            if (end == std::string::npos) break;
            i = end;
        } else if (c == '(') {
            ++depth;
        } else if (c == ')') {
            --depth;
        } else if (depth == 0 && upper.compare(i, 5, "ORDER") == 0) {
            auto j = i + 5;
            while (j < upper.size() && std::isspace(static_cast<unsigned char>(upper[j]))) ++j;
            if (upper.compare(j, 2, "BY") == 0) found = true;
        }
    }
    return found;
}

bool statement_is_ordered(const std::string& sql) {
    try {
        return has_top_level_order_by(parse_sql(sql));
    } catch (const ParseError&) {
        return scan_top_level_order_by(sql);
    }
}

// NULL < numbers < text.
int kind_rank(const Value& v) {
    if (std::holds_alternative<std::monostate>(v)) return 0;
    if (std::holds_alternative<std::string>(v)) return 2;
    return 1;
}

double as_number(const Value& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    return std::get<double>(v);
}

bool value_less(const Value& a, const Value& b) {
    const int ra = kind_rank(a), rb = kind_rank(b);
    if (ra != rb) return ra < rb;
    if (ra == 1) return as_number(a) < as_number(b);
    if (ra == 2) return std::get<std::string>(a) < std::get<std::string>(b);
    return false;
}

bool value_equal(const Value& a, const Value& b) {
    const int ra = kind_rank(a), rb = kind_rank(b);
    if (ra != rb) return false;
    if (ra == 0) return true;
    if (ra == 2) return std::get<std::string>(a) == std::get<std::string>(b);
    const double x = as_number(a), y = as_number(b);
    return std::fabs(x - y) <= kFloatTolerance * std::max({1.0, std::fabs(x), std::fabs(y)});
}

bool row_less(const Row& a, const Row& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), value_less);
}

bool row_equal(const Row& a, const Row& b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), value_equal);
}

std::vector<Row> canonical_rows(const ResultTable& t, bool sort_rows) {
    auto rows = t.rows;
    for (auto& r : rows) std::sort(r.begin(), r.end(), value_less);
    if (sort_rows) std::sort(rows.begin(), rows.end(), row_less);
    return rows;
}

std::string collapse_lower(const std::string& sql) {
    std::string out;
    bool space = false;
    for (char c : sql) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = !out.empty();
            continue;
        }
        if (space) out += ' ';
        space = false;
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    while (!out.empty() && (out.back() == ';' || out.back() == ' ')) out.pop_back();
    return out;
}

std::string percent(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

double rate(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ResultTable execute_sql(const std::filesystem::path& db_path, const std::string& sql,
                        std::chrono::milliseconds timeout) {
    if (!std::filesystem::exists(db_path)) throw ExecError("database not found: " + db_path.string());
    Connection conn;
    if (sqlite3_open_v2(db_path.c_str(), &conn.db, SQLITE_OPEN_READONLY | SQLITE_OPEN_NOMUTEX, nullptr) != SQLITE_OK) {
        throw ExecError("cannot open " + db_path.string() + ": " + sqlite3_errmsg(conn.db));
    }
    Deadline deadline{std::chrono::steady_clock::now() + timeout};
    sqlite3_progress_handler(conn.db, 1000, check_deadline, &deadline);

    Statement st;
    const char* tail = nullptr;
    if (sqlite3_prepare_v2(conn.db, sql.c_str(), static_cast<int>(sql.size()), &st.stmt, &tail) != SQLITE_OK) {
        throw ExecError(sqlite3_errmsg(conn.db));
    }
    if (!st.stmt) throw ExecError("empty statement");
    if (!blank(tail)) throw ExecError("more than one statement");

    ResultTable table;
    table.ordered = statement_is_ordered(sql);
    const int ncol = sqlite3_column_count(st.stmt);
    for (;;) {
        const int rc = sqlite3_step(st.stmt);
        if (rc == SQLITE_DONE) break;
        if (rc != SQLITE_ROW) {
            if (deadline.expired) throw ExecTimeout("query exceeded " + std::to_string(timeout.count()) + " ms");
            throw ExecError(sqlite3_errmsg(conn.db));
        }
        Row row;
        row.reserve(ncol);
        for (int c = 0; c < ncol; ++c) {
            switch (sqlite3_column_type(st.stmt, c)) {
                case SQLITE_NULL: row.emplace_back(std::monostate{}); break;
                case SQLITE_INTEGER: row.emplace_back(static_cast<std::int64_t>(sqlite3_column_int64(st.stmt, c))); break;
                case SQLITE_FLOAT: row.emplace_back(sqlite3_column_double(st.stmt, c)); break;
                default: {
                    const auto* text = reinterpret_cast<const char*>(sqlite3_column_text(st.stmt, c));
                    row.emplace_back(std::string(text ? text : "", sqlite3_column_bytes(st.stmt, c)));
                }
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

bool tables_match(const ResultTable& pred, const ResultTable& gold) {
    if (pred.rows.size() != gold.rows.size()) return false;
    const auto a = canonical_rows(pred, !gold.ordered);
    const auto b = canonical_rows(gold, !gold.ordered);
    return std::equal(a.begin(), a.end(), b.begin(), row_equal);
}

ExecVerdict execution_verdict(const std::string& pred_sql, const std::string& gold_sql,
                              const std::filesystem::path& db_path, std::chrono::milliseconds timeout) {
    ExecVerdict v;
    ResultTable gold;
    try {
        gold = execute_sql(db_path, gold_sql, timeout);
    } catch (const ExecError& e) {
        v.gold_ok = false;
        v.error = std::string("gold: ") + e.what();
        return v;
    }
    try {
        v.match = tables_match(execute_sql(db_path, pred_sql, timeout), gold);
    } catch (const ExecError& e) {
        v.error = std::string("pred: ") + e.what();
    }
    return v;
}

bool execution_match(const std::string& pred_sql, const std::string& gold_sql, const std::filesystem::path& db_path,
                     std::chrono::milliseconds timeout) {
    const auto v = execution_verdict(pred_sql, gold_sql, db_path, timeout);
    if (!v.gold_ok) spdlog::warn("gold SQL does not execute, excluded: {}", v.error);
    return v.match;
}

std::string canonical_sql(const std::string& sql) {
    try {
        return render_sql(parse_sql(sql), RenderOptions{.normalize_identifiers = true});
    } catch (const ParseError&) {
        return collapse_lower(sql);
    }
}

bool exact_match(const std::string& pred_sql, const std::string& gold_sql) {
    try {
        const RenderOptions opts{.normalize_identifiers = true};
        return render_sql(parse_sql(pred_sql), opts) == render_sql(parse_sql(gold_sql), opts);
    } catch (const ParseError&) {
        return collapse_lower(pred_sql) == collapse_lower(gold_sql);
    }
}

RobustnessVerdict robustness_check(const PipelineResult& clean, const PipelineResult& perturbed,
                                   const std::filesystem::path& db_path, std::chrono::milliseconds timeout) {
    if (clean.db_id != perturbed.db_id) {
        throw ConfigError("robustness pair targets different databases: " + clean.db_id + " vs " + perturbed.db_id);
    }
    RobustnessVerdict v;
    if (clean.final_sql.empty() || perturbed.final_sql.empty()) {
        v.reason = "no SQL produced";
        return v;
    }
    ResultTable a;
    try {
        a = execute_sql(db_path, clean.final_sql, timeout);
    } catch (const ExecError& e) {
        v.reason = std::string("clean: ") + e.what();
        return v;
    }
    try {
        v.robust = tables_match(execute_sql(db_path, perturbed.final_sql, timeout), a);
        if (!v.robust) v.reason = "results differ";
    } catch (const ExecError& e) {
        v.reason = std::string("perturbed: ") + e.what();
    }
    return v;
}

std::filesystem::path database_path(const std::filesystem::path& root, const std::string& db_id) {
    return root / db_id / (db_id + ".sqlite");
}

nlohmann::ordered_json EvalRecord::to_json() const {
    nlohmann::ordered_json j;
    j["question"] = question;
    j["db_id"] = db_id;
    j["gold_sql"] = gold_sql;
    j["pred_sql"] = pred_sql;
    j["ex"] = ex;
    j["em"] = em;
    j["excluded"] = excluded;
    j["error"] = error ? nlohmann::ordered_json(*error) : nlohmann::ordered_json(nullptr);
    j["flags"] = flags;
    return j;
}

nlohmann::ordered_json EvalReport::summary_json() const {
    nlohmann::ordered_json j;
    j["total"] = total;
    j["scored"] = scored;
    j["excluded"] = excluded;
    j["ex_correct"] = ex_correct;
    j["em_correct"] = em_correct;
    j["ex"] = std::round(ex * 100.0) / 100.0;
    j["em"] = std::round(em * 100.0) / 100.0;
    nlohmann::ordered_json flags = nlohmann::ordered_json::object();
    for (const auto& [name, b] : by_flag) flags[name] = {{"items", b.items}, {"ex_correct", b.ex}};
    j["by_flag"] = flags;
    return j;
}

std::string EvalReport::text_table() const {
    std::ostringstream out;
    char line[128];
    std::snprintf(line, sizeof line, "%-34s %8s %8s\n", "", "EX", "EM");
    out << line;
    std::snprintf(line, sizeof line, "%-34s %8s %8s\n", ("all (" + std::to_string(scored) + " scored)").c_str(),
                  percent(ex).c_str(), percent(em).c_str());
    out << line;
    for (const auto& [name, b] : by_flag) {
        std::snprintf(line, sizeof line, "%-34s %8s %8s\n", ("  " + name + " (" + std::to_string(b.items) + ")").c_str(),
                      percent(rate(b.ex, b.items)).c_str(), "-");
        out << line;
    }
    out << "excluded (gold failed): " << excluded << '\n';
    return out.str();
}

EvalReport evaluate(const std::vector<Example>& dataset, const std::vector<PipelineResult>& predictions,
                    const std::filesystem::path& db_root, std::size_t workers, std::chrono::milliseconds timeout) {
    if (dataset.size() != predictions.size()) {
        throw ConfigError("dataset has " + std::to_string(dataset.size()) + " items but predictions have " +
                          std::to_string(predictions.size()));
    }
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (dataset[i].db_id != predictions[i].db_id) {
            throw ConfigError("prediction " + std::to_string(i) + " is for database " + predictions[i].db_id +
                              ", dataset expects " + dataset[i].db_id);
        }
    }

    EvalReport report;
    report.records.resize(dataset.size());
    parallel_for(dataset.size(), workers, [&](std::size_t i) {
        const auto& item = dataset[i];
        const auto& pred = predictions[i];
        EvalRecord& r = report.records[i];
        r.question = item.question;
        r.db_id = item.db_id;
        r.gold_sql = item.query;
        r.pred_sql = pred.final_sql;
        r.flags.assign(pred.flags.begin(), pred.flags.end());
        r.em = !pred.final_sql.empty() && exact_match(pred.final_sql, item.query);
        const auto v = execution_verdict(pred.final_sql, item.query, database_path(db_root, item.db_id), timeout);
        r.ex = v.match;
        r.excluded = !v.gold_ok;
        if (!v.error.empty()) r.error = v.error;
    });

    report.total = report.records.size();
    for (const auto& r : report.records) {
        if (r.excluded) {
            ++report.excluded;
            spdlog::warn("excluded: gold SQL for '{}' ({}) failed: {}", r.question, r.db_id, r.error.value_or(""));
            continue;
        }
        ++report.scored;
        report.ex_correct += r.ex;
        report.em_correct += r.em;
        for (const auto& f : r.flags) {
            auto& b = report.by_flag[f];
            ++b.items;
            b.ex += r.ex;
        }
    }
    report.ex = rate(report.ex_correct, report.scored);
    report.em = rate(report.em_correct, report.scored);
    return report;
}

nlohmann::ordered_json RobustnessReport::summary_json() const {
    nlohmann::ordered_json j;
    j["pairs"] = pairs;
    j["robust"] = robust;
    j["rate"] = std::round(rate * 100.0) / 100.0;
    return j;
}

RobustnessReport evaluate_robustness(const std::vector<PipelineResult>& clean,
                                     const std::vector<PipelineResult>& perturbed,
                                     const std::filesystem::path& db_root, std::size_t workers,
                                     std::chrono::milliseconds timeout) {
    if (clean.size() != perturbed.size()) {
        throw ConfigError("clean run has " + std::to_string(clean.size()) + " results but perturbed run has " +
                          std::to_string(perturbed.size()));
    }
    RobustnessReport report;
    report.pairs = clean.size();
    report.verdicts.resize(clean.size());
    for (std::size_t i = 0; i < clean.size(); ++i) {
        if (clean[i].db_id != perturbed[i].db_id) {
            throw ConfigError("robustness pair " + std::to_string(i) + " targets different databases");
        }
    }
    parallel_for(clean.size(), workers, [&](std::size_t i) {
        report.verdicts[i] = robustness_check(clean[i], perturbed[i], database_path(db_root, clean[i].db_id), timeout);
    });
    for (const auto& v : report.verdicts) report.robust += v.robust;
    report.rate = rate(report.robust, report.pairs);
    return report;
}

void build_database(const std::filesystem::path& db_path, const std::string& script) {
    if (db_path.has_parent_path()) std::filesystem::create_directories(db_path.parent_path());
    std::filesystem::remove(db_path);
    Connection conn;
    if (sqlite3_open_v2(db_path.c_str(), &conn.db, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE, nullptr) != SQLITE_OK) {
        throw ConfigError("cannot create " + db_path.string() + ": " + sqlite3_errmsg(conn.db));
    }
    char* err = nullptr;
    if (sqlite3_exec(conn.db, script.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
        std::string msg = err ? err : "unknown error";
        sqlite3_free(err);
        throw ConfigError("database script failed for " + db_path.string() + ": " + msg);
    }
}

}  // namespace solidsql
