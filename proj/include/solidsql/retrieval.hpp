#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "solidsql/dataset.hpp"
#include "solidsql/embedding.hpp"
#include "solidsql/llm_gateway.hpp"
#include "solidsql/schema.hpp"
#include "solidsql/skeleton.hpp"

namespace solidsql {

struct QuestionSkeleton {
    std::string text;
    bool fallback = false;  // rule-based masker was used
};

/// Masks, case-insensitively, words matching a linked table or column name
/// (also naive plurals/singulars and underscore-split multiword names), numbers,
/// and quoted spans with `_`. Adjacent masks collapse into one.
std::string mask_question_rule_based(const std::string& question, const SchemaSubset& linked);

ChatRequest question_skeleton_request(const std::string& question, const SchemaSubset& linked,
                                      const std::string& model_id);

/// Asks the gateway for the masked question; a gateway failure or empty
/// reply falls back to the rule-based masker. ReplayMiss is rethrown so replay
/// runs stay hermetic. `gateway` may be null.
QuestionSkeleton extract_question_skeleton(const std::string& question, const SchemaSubset& linked, Gateway* gateway,
                                           const std::string& model_id);

struct ExamplePair {
    std::string question;
    std::string sql;
    std::string q_skeleton;
    Embedding q_embedding;
    SqlSkeleton s_skeleton;
    std::size_t pool_index = 0;
};

struct RetrievalIndex {
    std::vector<ExamplePair> pool;
    std::string provider_id;
    std::size_t dimension = 0;
    std::string built_at;  // empty unless supplied by the caller
};

struct IndexBuildOptions {
    Gateway* gateway = nullptr;  // question-skeleton extraction; null means rule-based only
    std::string skeleton_model;
    std::size_t workers = 1;
    std::string built_at;
};

struct IndexBuildResult {
    RetrievalIndex index;
    std::size_t skipped = 0;
    std::size_t skeleton_fallbacks = 0;
};

/// Precomputes skeletons and embeddings. Linked subsets for pool items come
/// from their gold SQL. Items whose SQL fails to parse are skipped and logged;
/// pool_index stays dense.
IndexBuildResult build_index(const std::vector<Example>& examples, const SchemaStore& schemas, Embedder& embedder,
                             const IndexBuildOptions& options = {});

/// JSONL: a header line then one record per pool item. Throws ConfigError.
void save_index(const RetrievalIndex& index, const std::filesystem::path& path);
RetrievalIndex load_index(const std::filesystem::path& path);

struct Retrieved {
    std::size_t pool_index = 0;
    double score = 0;  // cosine similarity, or tree edit distance for SQL retrieval
};

struct RetrievalResult {
    std::vector<Retrieved> items;
    bool fallback = false;  // SQL retrieval fell back to question skeletons

    std::string tag() const { return fallback ? "fallback=question" : ""; }
};

/// Top min(n, eligible) by descending cosine, ties by ascending pool_index.
/// Pool entries whose question equals `exclude_question` are skipped, as are
/// zero-vector candidates. Throws ConfigError when the embedder's provider_id
/// differs from the index's, std::invalid_argument when n == 0.
RetrievalResult retrieve_by_question_skeleton(const std::string& target_skeleton, const RetrievalIndex& index,
                                              std::size_t n, Embedder& embedder,
                                              std::string_view exclude_question = {});

/// Top min(n, eligible) by ascending tree edit distance to the skeleton of
/// `round1_sql`, ties by ascending pool_index. Unparseable SQL falls back to
/// question-skeleton retrieval with `fallback` set.
RetrievalResult retrieve_by_sql_skeleton(const std::string& round1_sql, const RetrievalIndex& index, std::size_t n,
                                         const std::string& fallback_q_skeleton, Embedder& embedder,
                                         std::string_view exclude_question = {});

}  // namespace solidsql
