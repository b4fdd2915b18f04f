#include "solidsql/schema_link.hpp"

#include <spdlog/spdlog.h>

#include <cctype>
#include <optional>
#include <sstream>

#include "solidsql/errors.hpp"
#include "solidsql/parallel.hpp"
#include "solidsql/schema_refs.hpp"
#include "solidsql/sql_parser.hpp"
#include "solidsql/templates.hpp"

namespace solidsql {

namespace {

std::string part(std::string_view family, std::string_view suffix) {
    return std::string(template_text(std::string(family) + "." + std::string(suffix)));
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

// "1. text", "2) text", "- text", "* text" -> "text"
std::string strip_list_marker(std::string line) {
    std::size_t i = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')' || line[i] == ':')) {
        return trim(std::string_view(line).substr(i + 1));
    }
    if (!line.empty() && (line[0] == '-' || line[0] == '*')) return trim(std::string_view(line).substr(1));
    return line;
}

double recall(const std::set<std::string>& pred, const std::set<std::string>& gold) {
    if (gold.empty()) return pred.empty() ? 1.0 : 0.0;
    std::size_t hit = 0;
    for (const auto& g : gold) hit += pred.count(g);
    return static_cast<double>(hit) / static_cast<double>(gold.size());
}

}  // namespace

std::string to_string(TripletOrigin origin) {
    switch (origin) {
        case TripletOrigin::Original: return "original";
        case TripletOrigin::Rewrite1: return "rewrite1";
        case TripletOrigin::Rewrite2: return "rewrite2";
    }
    return "?";
}

nlohmann::json triplet_to_json(const Triplet& t) {
    return {{"db_id", t.schema ? t.schema->db_id() : std::string()},
            {"question", t.question},
            {"query", t.gold_sql},
            {"origin", to_string(t.origin)}};
}

std::array<std::string, 2> parse_rewrites(const std::string& completion) {
    std::vector<std::string> lines;
    std::istringstream in(completion);
    std::string line;
    while (std::getline(in, line) && lines.size() < 2) {
        auto cleaned = strip_list_marker(trim(line));
        if (!cleaned.empty()) lines.push_back(std::move(cleaned));
    }
    if (lines.size() < 2) throw RewriteError("expected two rewrites, got " + std::to_string(lines.size()));
    return {lines[0], lines[1]};
}

ChatRequest GatewayRewriter::make_request(const std::string& question) const {
    ChatRequest r;
    r.model_id = model_id_;
    r.messages = {{"system", part(kRewriteTemplate, "system")},
                  {"user", fill_template(part(kRewriteTemplate, "user"), {{"question", question}})}};
    // Paraphrasing needs some variety; SQL generation elsewhere stays at 0.
    r.temperature = 0.7;
    return r;
}

std::array<std::string, 2> GatewayRewriter::rewrite(const std::string& question) {
    std::string completion;
    try {
        completion = gateway_.complete(make_request(question));
    } catch (const ReplayMiss&) {
        throw;
    } catch (const std::exception& e) {
        throw RewriteError(std::string("rewriter gateway failed: ") + e.what());
    }
    return parse_rewrites(completion);
}

std::vector<Triplet> augment_dataset(const std::vector<Triplet>& triplets, QuestionRewriter& rewriter,
                                     std::size_t workers, AugmentStats* stats) {
    std::vector<std::optional<std::array<std::string, 2>>> rewrites(triplets.size());
    parallel_for(triplets.size(), workers, [&](std::size_t i) {
        try {
            rewrites[i] = rewriter.rewrite(triplets[i].question);
        } catch (const RewriteError& e) {
            spdlog::warn("augment: item {} kept un-augmented: {}", i, e.what());
        }
    });

    std::vector<Triplet> out;
    out.reserve(triplets.size() * 3);
    std::size_t failed = 0;
    for (std::size_t i = 0; i < triplets.size(); ++i) {
        out.push_back(triplets[i]);
        if (!rewrites[i]) {
            ++failed;
            continue;
        }
        Triplet r1 = triplets[i];
        r1.question = (*rewrites[i])[0];
        r1.origin = TripletOrigin::Rewrite1;
        Triplet r2 = triplets[i];
        r2.question = (*rewrites[i])[1];
        r2.origin = TripletOrigin::Rewrite2;
        out.push_back(std::move(r1));
        out.push_back(std::move(r2));
    }
    if (stats) stats->failed = failed;
    return out;
}

nlohmann::ordered_json SftRecord::to_json() const {
    nlohmann::ordered_json j;
    j["instruction"] = instruction;
    j["input"] = input;
    j["output"] = output;
    return j;
}

std::string sft_instruction() { return part(kSftTemplate, "instruction"); }

std::string render_sft_input(const DatabaseSchema& schema, const std::string& question) {
    return fill_template(part(kSftTemplate, "input"), {{"ddl", render_ddl(schema)}, {"question", question}});
}

SftBuildResult build_sft_dataset(const std::vector<Triplet>& triplets) {
    SftBuildResult result;
    const auto instruction = sft_instruction();
    for (std::size_t i = 0; i < triplets.size(); ++i) {
        const auto& t = triplets[i];
        if (!t.schema) throw std::invalid_argument("triplet without schema");
        try {
            const auto gold = extract_schema_refs(parse_sql(t.gold_sql), *t.schema);
            result.records.push_back({instruction, render_sft_input(*t.schema, t.question), serialize_subset(gold)});
        } catch (const ResolutionError& e) {
            ++result.skipped;
            spdlog::warn("sft: skipping item {} ({}): {}", i, t.schema->db_id(), e.what());
        } catch (const ParseError& e) {
            ++result.skipped;
            spdlog::warn("sft: skipping item {} ({}): {}", i, t.schema->db_id(), e.what());
        }
    }
    return result;
}

void OracleLinkingPredictor::add(const std::string& db_id, const std::string& question, const std::string& gold_sql) {
    gold_[{db_id, question}] = gold_sql;
}

std::string OracleLinkingPredictor::predict(const std::string& question, const DatabaseSchema& schema) {
    const auto it = gold_.find({schema.db_id(), question});
    if (it == gold_.end()) throw PredictorError("oracle has no gold SQL for question: " + question);
    try {
        return serialize_subset(extract_schema_refs(parse_sql(it->second), schema));
    } catch (const std::exception& e) {
        throw PredictorError(std::string("oracle gold SQL does not resolve: ") + e.what());
    }
}

std::string GatewayLinkingPredictor::predict(const std::string& question, const DatabaseSchema& schema) {
    ChatRequest r;
    r.model_id = model_id_;
    r.messages = {{"system", sft_instruction()}, {"user", render_sft_input(schema, question)}};
    try {
        return gateway_.complete(r);
    } catch (const ReplayMiss&) {
        throw;
    } catch (const std::exception& e) {
        throw PredictorError(std::string("linking model call failed: ") + e.what());
    }
}

SchemaSubset repair_subset(const SchemaSubset& subset, const DatabaseSchema& schema) {
    SchemaSubset out;
    for (const auto& t : subset.tables) {
        if (schema.find_table(t)) out.tables.insert(t);
    }
    for (const auto& c : subset.columns) {
        const auto table = column_table(c);
        const auto column = column_name(c);
        if (table.empty() || !schema.find_table(table)) continue;
        if (column != "*" && !schema.has_column(table, column)) continue;
        out.columns.insert(c);
        out.tables.insert(table);
    }
    return out;
}

SchemaSubset predict_linking(const std::string& question, const DatabaseSchema& schema, LinkingPredictor& predictor) {
    std::string raw;
    try {
        raw = predictor.predict(question, schema);
    } catch (const PredictorError& e) {
        spdlog::warn("linking: predictor failed, using empty subset: {}", e.what());
        return {};
    }
    try {
        return repair_subset(parse_subset(raw), schema);
    } catch (const std::invalid_argument&) {
        spdlog::warn("linking: unparseable predictor output, using empty subset: {}", raw.substr(0, 120));
        return {};
    }
}

LinkingReport linking_accuracy(const std::vector<SchemaSubset>& predictions, const std::vector<SchemaSubset>& golds) {
    if (predictions.size() != golds.size()) throw std::invalid_argument("predictions and golds differ in length");
    LinkingReport r;
    r.items = golds.size();
    if (golds.empty()) return r;
    double col = 0, tab = 0, exact = 0;
    for (std::size_t i = 0; i < golds.size(); ++i) {
        col += recall(predictions[i].columns, golds[i].columns);
        tab += recall(predictions[i].tables, golds[i].tables);
        exact += predictions[i] == golds[i] ? 1.0 : 0.0;
    }
    const auto n = static_cast<double>(golds.size());
    r.column_recall = 100.0 * col / n;
    r.table_recall = 100.0 * tab / n;
    r.exact_match = 100.0 * exact / n;
    return r;
}

}  // namespace solidsql
