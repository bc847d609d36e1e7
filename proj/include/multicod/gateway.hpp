#pragma once
// Provider abstraction for all model calls. Ships a deterministic scripted
// mock provider plus a generic HTTP chat-completion shell. Every call is
// metered (tokens + wall time) into the active CostLedger.

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "multicod/core.hpp"

namespace multicod {

struct GatewayError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RateLimited : std::runtime_error {
    RateLimited() : std::runtime_error("provider rate limit exceeded after backoff") {}
};
struct SelectionMissing : std::runtime_error {
    SelectionMissing() : std::runtime_error("ledger row has no selected_index") {}
};

enum class RequestTag { strategy_gen, draft_step, code_gen };

inline const char* tag_name(RequestTag t) {
    switch (t) {
        case RequestTag::strategy_gen: return "strategy_gen";
        case RequestTag::draft_step: return "draft_step";
        case RequestTag::code_gen: return "code_gen";
    }
    return "unknown";
}

inline RequestTag tag_from_name(const std::string& s) {
    if (s == "strategy_gen") return RequestTag::strategy_gen;
    if (s == "draft_step") return RequestTag::draft_step;
    if (s == "code_gen") return RequestTag::code_gen;
    throw std::invalid_argument("unknown request tag: " + s);
}

struct CompletionRequest {
    std::string system_prompt;
    std::string user_prompt;
    double temperature = 0.5;
    int max_tokens = 2048;
    RequestTag tag = RequestTag::code_gen;
};

struct CompletionResponse {
    std::string text;
    std::int64_t output_tokens = 0;
    double wall_seconds = 0.0;
    std::string provider_id;
};

// ---------------------------------------------------------------------------
// Cost ledger: token and time accounting

struct LedgerRow {
    std::string task_id;
    std::int64_t strategy_tokens = 0;
    std::vector<std::int64_t> solution_tokens;  // one slot per candidate
    double strategy_seconds = 0.0;
    std::vector<double> solution_seconds;
    int selected_index = -1;  // -1 until selection happens
};

inline void to_json(json& j, const LedgerRow& r) {
    j = json{{"task_id", r.task_id},
             {"strategy_tokens", r.strategy_tokens},
             {"solution_tokens", r.solution_tokens},
             {"strategy_seconds", r.strategy_seconds},
             {"solution_seconds", r.solution_seconds},
             {"selected_index", r.selected_index}};
}
inline void from_json(const json& j, LedgerRow& r) {
    j.at("task_id").get_to(r.task_id);
    j.at("strategy_tokens").get_to(r.strategy_tokens);
    j.at("solution_tokens").get_to(r.solution_tokens);
    j.at("strategy_seconds").get_to(r.strategy_seconds);
    j.at("solution_seconds").get_to(r.solution_seconds);
    j.at("selected_index").get_to(r.selected_index);
}

// Tokens billed when only the selected solution is charged.
inline std::int64_t cost_best(const LedgerRow& row) {
    if (row.selected_index < 0 ||
        row.selected_index >= static_cast<int>(row.solution_tokens.size())) {
        throw SelectionMissing{};
    }
    return row.strategy_tokens +
           row.solution_tokens[static_cast<std::size_t>(row.selected_index)];
}

// Tokens consumed when all k solutions are charged.
inline std::int64_t cost_all(const LedgerRow& row) {
    std::int64_t total = row.strategy_tokens;
    for (auto t : row.solution_tokens) total += t;
    return total;
}

// Sequential stages, only the selected candidate's generation time counted.
inline double time_best(const LedgerRow& row) {
    if (row.selected_index < 0 ||
        row.selected_index >= static_cast<int>(row.solution_seconds.size())) {
        throw SelectionMissing{};
    }
    return row.strategy_seconds +
           row.solution_seconds[static_cast<std::size_t>(row.selected_index)];
}

// Wall clock when all candidates run in parallel: strategy stage plus the
// slowest candidate.
inline double time_parallel_wall(const LedgerRow& row) {
    double slowest = 0.0;
    for (double s : row.solution_seconds) slowest = std::max(slowest, s);
    return row.strategy_seconds + slowest;
}

class CostLedger {
public:
    LedgerRow& open_row(const std::string& task_id, int k) {
        std::lock_guard lock(mu_);
        rows_.emplace_back();
        auto& row = rows_.back();
        row.task_id = task_id;
        row.solution_tokens.assign(static_cast<std::size_t>(k), 0);
        row.solution_seconds.assign(static_cast<std::size_t>(k), 0.0);
        return row;
    }

    void meter_strategy(LedgerRow& row, std::int64_t tokens, double seconds) {
        std::lock_guard lock(mu_);
        row.strategy_tokens += tokens;
        row.strategy_seconds += seconds;
    }

    void meter_solution(LedgerRow& row, int candidate, std::int64_t tokens, double seconds) {
        std::lock_guard lock(mu_);
        row.solution_tokens[static_cast<std::size_t>(candidate)] += tokens;
        row.solution_seconds[static_cast<std::size_t>(candidate)] += seconds;
    }

    void set_selected(LedgerRow& row, int index) {
        std::lock_guard lock(mu_);
        row.selected_index = index;
    }

    const std::deque<LedgerRow>& rows() const { return rows_; }

private:
    mutable std::mutex mu_;
    std::deque<LedgerRow> rows_;  // deque keeps row references stable
};

// ---------------------------------------------------------------------------
// Providers

class Provider {
public:
    virtual ~Provider() = default;
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;
    virtual std::string id() const = 0;
};

// Scripted deterministic provider for offline runs and tests. The script is
// a per-tag FIFO of entries; an entry may direct a number of failures before
// its text is served.
class MockProvider : public Provider {
public:
    struct Entry {
        RequestTag tag = RequestTag::code_gen;
        std::string text;
        int fail_times = 0;
    };

    MockProvider() = default;
    explicit MockProvider(std::vector<Entry> script) : script_(std::move(script)) {}

    static std::vector<Entry> script_from_json(const json& j) {
        std::vector<Entry> entries;
        for (const auto& e : j.at("script")) {
            Entry entry;
            entry.tag = tag_from_name(e.at("tag").get<std::string>());
            entry.text = e.at("text").get<std::string>();
            entry.fail_times = e.value("fail_times", 0);
            entries.push_back(std::move(entry));
        }
        return entries;
    }

    void push(RequestTag tag, std::string text, int fail_times = 0) {
        std::lock_guard lock(mu_);
        script_.push_back(Entry{tag, std::move(text), fail_times});
    }

    CompletionResponse complete(const CompletionRequest& request) override {
        std::lock_guard lock(mu_);
        for (auto& entry : script_) {
            if (entry.tag != request.tag || entry.text == kConsumed) continue;
            if (entry.fail_times > 0) {
                --entry.fail_times;
                throw GatewayError("scripted failure for tag " +
                                   std::string(tag_name(request.tag)));
            }
            CompletionResponse resp;
            resp.text = entry.text;
            resp.output_tokens = count_words(entry.text);
            resp.wall_seconds = 0.001;  // nominal deterministic latency
            resp.provider_id = id();
            entry.text = kConsumed;
            return resp;
        }
        throw GatewayError("mock script exhausted for tag " +
                           std::string(tag_name(request.tag)));
    }

    std::string id() const override { return "mock"; }

private:
    static constexpr const char* kConsumed = "\x01consumed";
    std::mutex mu_;
    std::vector<Entry> script_;
};

// ---------------------------------------------------------------------------
// Gateway: retries, rate limiting, metering

struct GatewayConfig {
    int max_attempts = 3;
    double backoff_base_seconds = 0.5;
    int max_in_flight = 16;
    unsigned jitter_seed = 0;
};

class LlmGateway {
public:
    using MeterHook = std::function<void(const CompletionRequest&, const CompletionResponse&)>;

    LlmGateway(std::shared_ptr<Provider> provider, GatewayConfig config = {})
        : provider_(std::move(provider)), config_(config), jitter_(config.jitter_seed) {}

    CompletionResponse complete(const CompletionRequest& request) {
        acquire_slot();
        struct SlotGuard {
            LlmGateway* g;
            ~SlotGuard() { g->release_slot(); }
        } guard{this};

        const auto start = std::chrono::steady_clock::now();
        GatewayError last("no attempt made");
        for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
            if (attempt > 0) {
                backoff(attempt);
                {
                    std::lock_guard lock(mu_);
                    ++retries_;
                }
            }
            try {
                CompletionResponse resp = provider_->complete(request);
                if (resp.output_tokens == 0 && !resp.text.empty()) {
                    resp.output_tokens = count_words(resp.text);
                }
                if (resp.wall_seconds == 0.0) {
                    resp.wall_seconds =
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                            .count();
                }
                if (meter_) meter_(request, resp);
                return resp;
            } catch (const GatewayError& e) {
                last = e;
            }
        }
        throw last;
    }

    void set_meter_hook(MeterHook hook) { meter_ = std::move(hook); }
    int retries() const { return retries_; }

private:
    void acquire_slot() {
        std::unique_lock lock(mu_);
        slot_cv_.wait(lock, [&] { return in_flight_ < config_.max_in_flight; });
        ++in_flight_;
    }
    void release_slot() {
        {
            std::lock_guard lock(mu_);
            --in_flight_;
        }
        slot_cv_.notify_one();
    }
    void backoff(int attempt) {
        if (config_.backoff_base_seconds <= 0.0) return;
        std::uniform_real_distribution<double> jitter(0.0, 0.1);
        const double delay =
            config_.backoff_base_seconds * static_cast<double>(1 << (attempt - 1)) +
            jitter(jitter_);
        std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }

    std::shared_ptr<Provider> provider_;
    GatewayConfig config_;
    MeterHook meter_;
    std::mutex mu_;
    std::condition_variable slot_cv_;
    int in_flight_ = 0;
    int retries_ = 0;
    std::mt19937 jitter_;
};

}  // namespace multicod
