#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "solidsql/llm_gateway.hpp"
#include "solidsql/schema.hpp"

namespace solidsql {

enum class TripletOrigin { Original, Rewrite1, Rewrite2 };

std::string to_string(TripletOrigin origin);

/// A question with its schema and gold SQL. `schema` is borrowed (usually
/// from a SchemaStore) and must outlive the triplet.
struct Triplet {
    std::string question;
    const DatabaseSchema* schema = nullptr;
    std::string gold_sql;
    TripletOrigin origin = TripletOrigin::Original;
};

/// Benchmark-format record (db_id, question, query) plus `origin`.
nlohmann::json triplet_to_json(const Triplet& t);

class QuestionRewriter {
public:
    virtual ~QuestionRewriter() = default;
    /// Two paraphrases of `question`. Throws RewriteError.
    virtual std::array<std::string, 2> rewrite(const std::string& question) = 0;
};

/// Rewriter backed by the chat gateway using the rewrite template.
class GatewayRewriter : public QuestionRewriter {
public:
    GatewayRewriter(Gateway& gateway, std::string model_id) : gateway_(gateway), model_id_(std::move(model_id)) {}
    std::array<std::string, 2> rewrite(const std::string& question) override;

    ChatRequest make_request(const std::string& question) const;

private:
    Gateway& gateway_;
    std::string model_id_;
};

/// First two non-empty lines with list numbering ("1.", "2)", "-") stripped.
/// Throws RewriteError when fewer than two lines remain.
std::array<std::string, 2> parse_rewrites(const std::string& completion);

struct AugmentStats {
    std::size_t failed = 0;
};

/// Emits each triplet followed by its two rewrites (same schema and SQL).
/// Items whose rewrite fails are emitted alone and counted. Output order
/// follows input order regardless of `workers`.
std::vector<Triplet> augment_dataset(const std::vector<Triplet>& triplets, QuestionRewriter& rewriter,
                                     std::size_t workers = 1, AugmentStats* stats = nullptr);

struct SftRecord {
    std::string instruction;
    std::string input;
    std::string output;

    nlohmann::ordered_json to_json() const;
};

/// Input text of the SFT template (DDL and question).
std::string render_sft_input(const DatabaseSchema& schema, const std::string& question);
std::string sft_instruction();

struct SftBuildResult {
    std::vector<SftRecord> records;
    std::size_t skipped = 0;
};

/// One record per resolvable triplet, in input order. Triplets whose SQL
/// fails to parse or resolve are skipped and counted.
SftBuildResult build_sft_dataset(const std::vector<Triplet>& triplets);

class LinkingPredictor {
public:
    virtual ~LinkingPredictor() = default;
    /// Raw predictor output, expected in the canonical subset serialization.
    /// Throws PredictorError (ReplayMiss passes through).
    virtual std::string predict(const std::string& question, const DatabaseSchema& schema) = 0;
};

/// Answers from gold SQL: extract_schema_refs of the registered statement.
class OracleLinkingPredictor : public LinkingPredictor {
public:
    void add(const std::string& db_id, const std::string& question, const std::string& gold_sql);
    std::string predict(const std::string& question, const DatabaseSchema& schema) override;

private:
    std::map<std::pair<std::string, std::string>, std::string> gold_;
};

/// Sends the SFT prompt to a (fine-tuned) model through the gateway.
class GatewayLinkingPredictor : public LinkingPredictor {
public:
    GatewayLinkingPredictor(Gateway& gateway, std::string model_id) : gateway_(gateway), model_id_(std::move(model_id)) {}
    std::string predict(const std::string& question, const DatabaseSchema& schema) override;

private:
    Gateway& gateway_;
    std::string model_id_;
};

/// Drops members missing from `schema` and adds tables implied by columns.
SchemaSubset repair_subset(const SchemaSubset& subset, const DatabaseSchema& schema);

/// Parsed and repaired prediction. Unparseable output or PredictorError gives
/// an empty subset and a warning.
SchemaSubset predict_linking(const std::string& question, const DatabaseSchema& schema, LinkingPredictor& predictor);

struct LinkingReport {
    std::size_t items = 0;
    double column_recall = 0;  // percent
    double table_recall = 0;   // percent
    double exact_match = 0;    // percent, both sets equal
};

/// Throws std::invalid_argument on length mismatch.
LinkingReport linking_accuracy(const std::vector<SchemaSubset>& predictions, const std::vector<SchemaSubset>& golds);

}  // namespace solidsql
