#include "solidsql/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>

#include "solidsql/dataset.hpp"
#include "solidsql/errors.hpp"
#include "solidsql/parallel.hpp"

namespace solidsql {

namespace {

std::vector<PromptExample> to_prompt_examples(const RetrievalResult& r, const RetrievalIndex& index) {
    std::vector<PromptExample> out;
    out.reserve(r.items.size());
    for (const auto& it : r.items) out.push_back({index.pool[it.pool_index].question, index.pool[it.pool_index].sql});
    return out;
}

ChatRequest sql_request(const PromptBundle& prompt, const PipelineConfig& config) {
    ChatRequest r;
    r.model_id = config.model_id;
    r.messages = {{"system", prompt.system}, {"user", prompt.user}};
    r.temperature = 0.0;
    r.max_tokens = config.max_tokens;
    return r;
}

// Completion plus extraction. Empty on failure, with the matching flag set.
std::string generate(const PromptBundle& prompt, Gateway& gateway, const PipelineConfig& config,
                     const char* gateway_flag, const char* extract_flag, PipelineResult& result) {
    std::string completion;
    try {
        completion = gateway.complete(sql_request(prompt, config));
    } catch (const ReplayMiss&) {
        throw;
    } catch (const std::exception& e) {
        spdlog::warn("generation failed for '{}': {}", result.question, e.what());
        result.flags.insert(gateway_flag);
        return {};
    }
    try {
        return parse_sql_from_completion(completion);
    } catch (const ExtractError&) {
        result.flags.insert(extract_flag);
        return {};
    }
}

std::string ledger_key(const Example& e) { return e.db_id + '\x1f' + e.question; }

}  // namespace

void PipelineConfig::validate() const {
    if (n_examples < 1) throw ConfigError("n_examples must be at least 1");
    if (rounds != 1 && rounds != 2) throw ConfigError("rounds must be 1 or 2");
    if (model_id.empty()) throw ConfigError("model_id is empty");
}

nlohmann::ordered_json result_to_json(const PipelineResult& r) {
    nlohmann::ordered_json j;
    j["question"] = r.question;
    j["db_id"] = r.db_id;
    j["linked"] = serialize_subset(r.linked);
    j["q_skeleton"] = r.q_skeleton;
    j["round1_sql"] = r.round1_sql;
    j["round2_sql"] = r.round2_sql;
    j["final_sql"] = r.final_sql;
    j["flags"] = r.flags;
    j["prompts"] = r.prompts;
    return j;
}

PipelineResult result_from_json(const nlohmann::json& j) {
    PipelineResult r;
    r.question = j.at("question").get<std::string>();
    r.db_id = j.at("db_id").get<std::string>();
    r.linked = parse_subset(j.at("linked").get<std::string>());
    r.q_skeleton = j.value("q_skeleton", "");
    r.round1_sql = j.value("round1_sql", "");
    r.round2_sql = j.value("round2_sql", "");
    r.final_sql = j.at("final_sql").get<std::string>();
    r.flags = j.value("flags", std::set<std::string>{});
    r.prompts = j.value("prompts", std::vector<std::string>{});
    return r;
}

Round1Output run_round1(const std::string& question, const DatabaseSchema& schema, PipelineDeps deps,
                        const PipelineConfig& config, PipelineResult& result) {
    Round1Output out;
    out.context.question = question;
    out.context.schema = &schema;
    out.context.linked = predict_linking(question, schema, deps.predictor);
    if (out.context.linked.empty()) result.flags.insert(flags::kEmptyLinking);

    const auto qs = extract_question_skeleton(question, out.context.linked, &deps.gateway, config.skeleton_model);
    if (qs.fallback) result.flags.insert(flags::kSkeletonFallback);
    out.context.q_skeleton = qs.text;

    const std::string_view exclude = config.exclude_self ? std::string_view(question) : std::string_view();
    const auto examples = retrieve_by_question_skeleton(qs.text, deps.index, config.n_examples, deps.embedder, exclude);
    PromptOptions options;
    options.round = 1;
    options.focus_enabled = config.focus_enabled;
    const auto prompt = build_prompt(question, schema, out.context.linked, to_prompt_examples(examples, deps.index), options);
    result.prompts.push_back(prompt.user);
    out.sql = generate(prompt, deps.gateway, config, flags::kRound1GatewayError, flags::kRound1ExtractError, result);
    return out;
}

std::string run_round2(const std::string& round1_sql, const RoundContext& context, PipelineDeps deps,
                       const PipelineConfig& config, PipelineResult& result) {
    const std::string_view exclude =
        config.exclude_self ? std::string_view(context.question) : std::string_view();
    // An empty round-1 SQL does not parse, so this takes the question-skeleton path.
    const auto examples = retrieve_by_sql_skeleton(round1_sql, deps.index, config.n_examples, context.q_skeleton,
                                                   deps.embedder, exclude);
    if (examples.fallback) result.flags.insert(flags::kRound2RetrievalFallback);
    PromptOptions options;
    options.round = 2;
    options.focus_enabled = config.focus_enabled;
    const auto prompt =
        build_prompt(context.question, *context.schema, context.linked, to_prompt_examples(examples, deps.index), options);
    result.prompts.push_back(prompt.user);
    return generate(prompt, deps.gateway, config, flags::kRound2GatewayError, flags::kRound2ExtractError, result);
}

PipelineResult run_question(const Example& item, const SchemaStore& schemas, PipelineDeps deps,
                            const PipelineConfig& config) {
    PipelineResult result;
    result.question = item.question;
    result.db_id = item.db_id;
    const auto* schema = schemas.find(item.db_id);
    if (!schema) {
        result.flags.insert(flags::kUnknownDb);
        result.flags.insert(flags::kNoSql);
        return result;
    }
    auto r1 = run_round1(item.question, *schema, deps, config, result);
    result.linked = r1.context.linked;
    result.q_skeleton = r1.context.q_skeleton;
    result.round1_sql = r1.sql;
    result.final_sql = r1.sql;
    if (config.rounds >= 2) {
        result.round2_sql = run_round2(r1.sql, r1.context, deps, config, result);
        if (!result.round2_sql.empty()) result.final_sql = result.round2_sql;
    }
    if (result.final_sql.empty()) result.flags.insert(flags::kNoSql);
    return result;
}

std::vector<PipelineResult> run_batch(const std::vector<Example>& items, const SchemaStore& schemas, PipelineDeps deps,
                                      const PipelineConfig& config, const std::filesystem::path& ledger,
                                      bool abort_on_replay_miss) {
    config.validate();
    std::vector<std::optional<PipelineResult>> results(items.size());

    if (!ledger.empty() && std::filesystem::exists(ledger)) {
        for (const auto& row : read_jsonl(ledger)) {
            const auto i = row.at("item").get<std::size_t>();
            if (i >= items.size() || row.at("key").get<std::string>() != ledger_key(items[i])) {
                throw ConfigError("ledger " + ledger.string() + " does not belong to this dataset (item " +
                                  std::to_string(i) + ")");
            }
            results[i] = result_from_json(row.at("result"));
        }
        spdlog::info("resuming: {} of {} items already done", std::count_if(results.begin(), results.end(),
                                                                           [](const auto& r) { return r.has_value(); }),
                     items.size());
    }

    std::ofstream ledger_out;
    if (!ledger.empty()) {
        if (ledger.has_parent_path()) std::filesystem::create_directories(ledger.parent_path());
        ledger_out.open(ledger, std::ios::app);
        if (!ledger_out) throw ConfigError("cannot write ledger " + ledger.string());
    }
    std::mutex ledger_mu;
    std::atomic<std::size_t> done{0};
    std::map<std::string, std::size_t> flag_counts;

    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!results[i]) todo.push_back(i);
    }
    parallel_for(todo.size(), config.workers, [&](std::size_t k) {
        const auto i = todo[k];
        PipelineResult r;
        try {
            r = run_question(items[i], schemas, deps, config);
        } catch (const ReplayMiss&) {
            if (abort_on_replay_miss) throw;
            r = PipelineResult{};
            r.question = items[i].question;
            r.db_id = items[i].db_id;
            r.flags = {"replay_miss", flags::kNoSql};
        } catch (const std::exception& e) {
            spdlog::error("item {} failed: {}", i, e.what());
            r = PipelineResult{};
            r.question = items[i].question;
            r.db_id = items[i].db_id;
            r.flags = {"item_error", flags::kNoSql};
        }
        {
            std::lock_guard lock(ledger_mu);
            if (ledger_out.is_open()) {
                nlohmann::ordered_json row;
                row["item"] = i;
                row["key"] = ledger_key(items[i]);
                row["result"] = result_to_json(r);
                ledger_out << row.dump() << '\n';
                ledger_out.flush();
            }
            for (const auto& f : r.flags) ++flag_counts[f];
        }
        results[i] = std::move(r);
        const auto n = ++done;
        if (n % 50 == 0 || n == todo.size()) spdlog::info("pipeline: {}/{} items", n, todo.size());
    });
    for (const auto& [flag, count] : flag_counts) spdlog::info("flag {}: {}", flag, count);

    std::vector<PipelineResult> out;
    out.reserve(items.size());
    for (auto& r : results) out.push_back(std::move(*r));
    return out;
}

}  // namespace solidsql
