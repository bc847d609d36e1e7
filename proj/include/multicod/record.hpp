#pragma once
// Durable run artifacts: append-only JSONL rows (one per task) with a sidecar
// manifest, plus the generate/select pipeline glue that fills them.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "multicod/cod.hpp"
#include "multicod/core.hpp"
#include "multicod/gateway.hpp"
#include "multicod/metrics.hpp"
#include "multicod/vadn.hpp"

namespace multicod {

struct DataMissing : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunRow {
    std::string task_id;
    std::vector<StrategyPrompt> strategies;
    std::vector<Candidate> candidates;
    std::vector<FeatureVector> features;         // log-scaled, unnormalized
    std::vector<FeatureVector> features_scaled;  // filled at selection time
    double diversity_mean = 0.0;
    bool diversity_passed = false;
    std::vector<double> q_values;
    int selected_index = -1;
    std::optional<double> reward;
    LedgerRow ledger;
    std::string timestamp;
};

inline void to_json(json& j, const RunRow& r) {
    j = json{{"task_id", r.task_id},
             {"strategies", r.strategies},
             {"candidates", r.candidates},
             {"features", r.features},
             {"features_scaled", r.features_scaled},
             {"diversity_mean", r.diversity_mean},
             {"diversity_passed", r.diversity_passed},
             {"q_values", r.q_values},
             {"selected_index", r.selected_index},
             {"ledger", r.ledger},
             {"timestamp", r.timestamp}};
    if (r.reward) j["reward"] = *r.reward;
}
inline void from_json(const json& j, RunRow& r) {
    j.at("task_id").get_to(r.task_id);
    j.at("strategies").get_to(r.strategies);
    j.at("candidates").get_to(r.candidates);
    j.at("features").get_to(r.features);
    r.features_scaled = j.value("features_scaled", std::vector<FeatureVector>{});
    r.diversity_mean = j.value("diversity_mean", 0.0);
    r.diversity_passed = j.value("diversity_passed", false);
    r.q_values = j.value("q_values", std::vector<double>{});
    r.selected_index = j.value("selected_index", -1);
    if (j.contains("reward")) r.reward = j.at("reward").get<double>();
    j.at("ledger").get_to(r.ledger);
    r.timestamp = j.value("timestamp", "");
}

inline std::string iso8601_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
    return buf;
}

// ---------------------------------------------------------------------------
// JSONL store

class RunRecord {
public:
    RunRecord(std::filesystem::path path, std::string run_id)
        : path_(std::move(path)), run_id_(std::move(run_id)) {}

    const std::string& run_id() const { return run_id_; }
    const std::filesystem::path& rows_path() const { return path_; }
    std::filesystem::path manifest_path() const {
        auto p = path_;
        p.replace_extension(".manifest.json");
        return p;
    }

    void write_manifest(const json& config_snapshot) const {
        json manifest = {{"run_id", run_id_},
                         {"created", iso8601_now()},
                         {"config", config_snapshot},
                         {"feature_names", feature_names()}};
        std::ofstream out(manifest_path());
        out << manifest.dump(2) << "\n";
    }

    void append(const RunRow& row) const {
        std::ofstream out(path_, std::ios::app);
        if (!out) throw DataMissing("cannot open record file: " + path_.string());
        out << json(row).dump() << "\n";
    }

    std::vector<RunRow> load() const {
        std::vector<RunRow> rows;
        std::ifstream in(path_);
        if (!in) throw DataMissing("record file not found: " + path_.string());
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            rows.push_back(json::parse(line).get<RunRow>());
        }
        return rows;
    }

    std::unordered_set<std::string> existing_task_ids() const {
        std::unordered_set<std::string> ids;
        if (!std::filesystem::exists(path_)) return ids;
        for (const auto& row : load()) ids.insert(row.task_id);
        return ids;
    }

private:
    std::filesystem::path path_;
    std::string run_id_;
};

// ---------------------------------------------------------------------------
// Pipeline glue

struct GenerateOptions {
    int k = 5;
    double diversity_threshold = kDefaultDiversityThreshold;
    int max_strategy_retries = 2;
    int max_step_regen = 2;
};

// Full per-task generation: strategies, candidates, features, metered costs.
inline RunRow generate_for_task(const Task& task, LlmGateway& gateway, const Embedder& embedder,
                                CostLedger& ledger, const GenerateOptions& opt = {}) {
    RunRow row;
    row.task_id = task.id;
    row.timestamp = iso8601_now();
    LedgerRow& cost = ledger.open_row(task.id, opt.k);

    // Route meter events by tag; candidate attribution follows the currently
    // synthesized index (generation here is sequential per task).
    int current_candidate = -1;
    gateway.set_meter_hook([&](const CompletionRequest& req, const CompletionResponse& resp) {
        if (req.tag == RequestTag::strategy_gen) {
            ledger.meter_strategy(cost, resp.output_tokens, resp.wall_seconds);
        } else if (current_candidate >= 0) {
            ledger.meter_solution(cost, current_candidate, resp.output_tokens,
                                  resp.wall_seconds);
        }
    });

    auto batch = generate_strategy_prompts(task, opt.k, gateway, embedder,
                                           opt.diversity_threshold, opt.max_strategy_retries);
    row.strategies = batch.prompts;
    row.diversity_mean = batch.report.mean_diversity;
    row.diversity_passed = batch.report.passed;

    for (int i = 0; i < opt.k; ++i) {
        current_candidate = i;
        row.candidates.push_back(synthesize_candidate(
            task, row.strategies[static_cast<std::size_t>(i)], gateway, opt.max_step_regen));
    }
    gateway.set_meter_hook(nullptr);

    row.features = extract_batch_features(row.candidates);
    row.ledger = cost;
    return row;
}

// Applies a trained checkpoint to a stored row: normalization, Q-values,
// selection, and ledger bookkeeping. Pure — does not execute anything.
inline void select_for_row(RunRow& row, const Checkpoint& ckpt) {
    const int k = static_cast<int>(row.features.size());
    if (k == 0) throw DataMissing("row has no features: " + row.task_id);
    if (ckpt.params.config.input_dim != kFeatureCount) {
        throw CheckpointMismatch("checkpoint input dimension is not the feature width");
    }
    if (k == 1) {
        row.selected_index = 0;
        row.q_values = {0.0};
    } else {
        BanditState state;
        state.candidates = normalize_batch(row.features, ckpt.feature_stats, ckpt.normalize);
        row.features_scaled = state.candidates;
        const QOutput out = forward(ckpt.params, state);
        row.q_values = out.q;
        row.selected_index = select_action(ckpt.params, state);
    }
    row.ledger.selected_index = row.selected_index;
}

// ---------------------------------------------------------------------------
// Aggregate reporting

struct AggregateReport {
    int n_tasks = 0;
    int n_selected = 0;
    int n_executed = 0;
    double selection_accuracy = 0.0;  // over rows whose selection was executed
    double mean_reward = 0.0;         // over rows that carry a reward
    std::int64_t tokens_best = 0;
    std::int64_t tokens_all = 0;
    double seconds_best = 0.0;
    double seconds_parallel_wall = 0.0;
    double mean_adherence_selected = 0.0;
};

inline void to_json(json& j, const AggregateReport& r) {
    j = json{{"n_tasks", r.n_tasks},
             {"n_selected", r.n_selected},
             {"n_executed", r.n_executed},
             {"selection_accuracy", r.selection_accuracy},
             {"mean_reward", r.mean_reward},
             {"tokens_best", r.tokens_best},
             {"tokens_all", r.tokens_all},
             {"seconds_best", r.seconds_best},
             {"seconds_parallel_wall", r.seconds_parallel_wall},
             {"mean_adherence_selected", r.mean_adherence_selected}};
}

inline AggregateReport aggregate_rows(const std::vector<RunRow>& rows) {
    AggregateReport rep;
    rep.n_tasks = static_cast<int>(rows.size());
    int rewarded = 0, passed = 0;
    double reward_sum = 0.0, adherence_sum = 0.0;
    for (const auto& row : rows) {
        rep.tokens_all += cost_all(row.ledger);
        if (row.selected_index >= 0) {
            ++rep.n_selected;
            rep.tokens_best += cost_best(row.ledger);
            rep.seconds_best += time_best(row.ledger);
            rep.seconds_parallel_wall += time_parallel_wall(row.ledger);
            const auto& selected = row.candidates[static_cast<std::size_t>(row.selected_index)];
            adherence_sum += cod_stats(selected.draft).adherence_rate;
            if (selected.execution) {
                ++rep.n_executed;
                if (selected.execution->passed) ++passed;
            }
        }
        if (row.reward) {
            ++rewarded;
            reward_sum += *row.reward;
        }
    }
    if (rep.n_executed > 0) {
        rep.selection_accuracy = static_cast<double>(passed) / static_cast<double>(rep.n_executed);
    }
    if (rewarded > 0) rep.mean_reward = reward_sum / static_cast<double>(rewarded);
    if (rep.n_selected > 0) {
        rep.mean_adherence_selected = adherence_sum / static_cast<double>(rep.n_selected);
    }
    return rep;
}

}  // namespace multicod
