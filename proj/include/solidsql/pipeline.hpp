#pragma once

#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "solidsql/dataset.hpp"
#include "solidsql/embedding.hpp"
#include "solidsql/llm_gateway.hpp"
#include "solidsql/prompting.hpp"
#include "solidsql/retrieval.hpp"
#include "solidsql/schema.hpp"
#include "solidsql/schema_link.hpp"

namespace solidsql {

struct PipelineConfig {
    std::string model_id = "gpt-4o-mini";
    std::string skeleton_model = "gpt-4o-mini";
    std::size_t n_examples = 7;
    int rounds = 2;
    bool focus_enabled = true;
    std::size_t workers = 4;
    int max_tokens = 512;
    /// Skip pool entries whose question equals the target question.
    bool exclude_self = true;

    /// Throws ConfigError unless n_examples >= 1 and rounds is 1 or 2.
    void validate() const;
};

// Flag names recorded on results.
namespace flags {
inline constexpr const char* kUnknownDb = "unknown_db";
inline constexpr const char* kEmptyLinking = "linking_empty";
inline constexpr const char* kSkeletonFallback = "question_skeleton_fallback";
inline constexpr const char* kRound1GatewayError = "round1_gateway_error";
inline constexpr const char* kRound1ExtractError = "round1_extract_error";
inline constexpr const char* kRound2RetrievalFallback = "round2_retrieval_fallback";
inline constexpr const char* kRound2GatewayError = "round2_gateway_error";
inline constexpr const char* kRound2ExtractError = "round2_extract_error";
inline constexpr const char* kNoSql = "no_sql";
}  // namespace flags

struct PipelineResult {
    std::string question;
    std::string db_id;
    SchemaSubset linked;
    std::string q_skeleton;
    std::string round1_sql;
    std::string round2_sql;
    std::string final_sql;
    std::set<std::string> flags;
    std::vector<std::string> prompts;  // user prompt of each round that ran
};

nlohmann::ordered_json result_to_json(const PipelineResult& r);
PipelineResult result_from_json(const nlohmann::json& j);

/// State carried from round 1 into round 2.
struct RoundContext {
    std::string question;
    const DatabaseSchema* schema = nullptr;
    SchemaSubset linked;
    std::string q_skeleton;
};

/// Everything the pipeline reads; none of it is modified.
struct PipelineDeps {
    LinkingPredictor& predictor;
    const RetrievalIndex& index;
    Gateway& gateway;
    Embedder& embedder;
};

struct Round1Output {
    std::string sql;
    RoundContext context;
};

/// Linking, question skeleton, question-skeleton retrieval, prompt, completion,
/// extraction. Gateway and extraction failures leave `sql` empty and set a flag.
Round1Output run_round1(const std::string& question, const DatabaseSchema& schema, PipelineDeps deps,
                        const PipelineConfig& config, PipelineResult& result);

/// SQL-skeleton retrieval with the round-1 output, same linked subset and
/// focus setting. Returns the extracted SQL or empty on failure (flag set).
std::string run_round2(const std::string& round1_sql, const RoundContext& context, PipelineDeps deps,
                       const PipelineConfig& config, PipelineResult& result);

/// Both rounds (or one, per config) for one question.
PipelineResult run_question(const Example& item, const SchemaStore& schemas, PipelineDeps deps,
                            const PipelineConfig& config);

/// Processes items on `config.workers` threads; results keep input order.
/// With a ledger path, completed items are appended there as they finish and
/// items already in the ledger are not re-run. ReplayMiss aborts the batch
/// when `abort_on_replay_miss` is set; every other per-item error becomes a flag.
std::vector<PipelineResult> run_batch(const std::vector<Example>& items, const SchemaStore& schemas, PipelineDeps deps,
                                      const PipelineConfig& config, const std::filesystem::path& ledger = {},
                                      bool abort_on_replay_miss = false);

}  // namespace solidsql
