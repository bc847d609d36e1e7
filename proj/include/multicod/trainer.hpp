#pragma once
// Training loop: hierarchical reward, prioritized
// experience replay, adaptive epsilon-greedy exploration, and target-network
// scheduling. One experience per task per epoch; transitions are terminal
// (contextual bandit).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "multicod/core.hpp"
#include "multicod/metrics.hpp"
#include "multicod/vadn.hpp"

namespace multicod {

struct ConfigInvalid : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InsufficientBuffer : std::runtime_error {
    InsufficientBuffer() : std::runtime_error("replay buffer smaller than batch size") {}
};

// ---------------------------------------------------------------------------
// Reward

// Hierarchical reward: +1.0 for a passing selection, +0.5 if it is the
// lowest-index passing candidate, +0.2 if it has the strictly best adherence
// (ties go to the lowest index); -0.5 if it fails while another passes; -0.1
// if everything fails.
inline double compute_reward(const std::vector<ExecutionResult>& executions,
                             const std::vector<double>& adherences, int action) {
    const int k = static_cast<int>(executions.size());
    if (k == 0 || adherences.size() != executions.size() || action < 0 || action >= k) {
        throw std::invalid_argument("compute_reward: mismatched inputs");
    }
    int first_passing = -1;
    bool any_pass = false;
    for (int i = 0; i < k; ++i) {
        if (executions[static_cast<std::size_t>(i)].passed) {
            any_pass = true;
            if (first_passing < 0) first_passing = i;
        }
    }
    int best_adh = 0;
    for (int i = 1; i < k; ++i) {
        if (adherences[static_cast<std::size_t>(i)] > adherences[static_cast<std::size_t>(best_adh)]) {
            best_adh = i;
        }
    }
    if (executions[static_cast<std::size_t>(action)].passed) {
        double r = 1.0;
        if (action == first_passing) r += 0.5;
        if (action == best_adh) r += 0.2;
        return r;
    }
    return any_pass ? -0.5 : -0.1;
}

// ---------------------------------------------------------------------------
// Prioritized replay

inline constexpr double kDefaultPriorityFloor = 1e-3;

class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity = 10000, double pri_exponent = 0.6,
                          double pri_floor = kDefaultPriorityFloor)
        : capacity_(capacity), pri_exponent_(pri_exponent), pri_floor_(pri_floor) {
        if (capacity_ == 0) throw std::invalid_argument("capacity must be positive");
    }

    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    double priority(std::size_t i) const { return entries_[i].priority; }
    const Experience& at(std::size_t i) const { return entries_[i].exp; }

    // New experiences without a TD error get the buffer's max priority so they
    // are sampled at least once.
    void push(Experience exp) { push_with_priority(std::move(exp), max_priority()); }

    void push_with_td_error(Experience exp, double abs_td) {
        push_with_priority(std::move(exp), std::max(abs_td, pri_floor_));
    }

    void update_priority(std::size_t index, double abs_td) {
        entries_[index].priority = std::max(abs_td, pri_floor_);
    }

    struct Sample {
        std::size_t index = 0;
        double is_weight = 1.0;
        const Experience* exp = nullptr;
    };

    // Proportional sampling by priority^pri_exponent with importance-sampling
    // weights normalized by the batch maximum.
    std::vector<Sample> sample_batch(std::size_t n, double is_beta, std::mt19937_64& rng) const {
        if (entries_.size() < n) throw InsufficientBuffer{};
        std::vector<double> prefix(entries_.size());
        double total = 0.0;
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            total += std::pow(entries_[i].priority, pri_exponent_);
            prefix[i] = total;
        }
        std::uniform_real_distribution<double> uni(0.0, total);
        std::vector<Sample> out;
        out.reserve(n);
        const double big_n = static_cast<double>(entries_.size());
        double max_w = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            const double u = uni(rng);
            const auto it = std::lower_bound(prefix.begin(), prefix.end(), u);
            std::size_t idx = static_cast<std::size_t>(it - prefix.begin());
            if (idx >= entries_.size()) idx = entries_.size() - 1;
            const double prob = std::pow(entries_[idx].priority, pri_exponent_) / total;
            Sample sample;
            sample.index = idx;
            sample.exp = &entries_[idx].exp;
            sample.is_weight = is_beta == 0.0 ? 1.0 : std::pow(big_n * prob, -is_beta);
            max_w = std::max(max_w, sample.is_weight);
            out.push_back(sample);
        }
        if (max_w > 0.0) {
            for (auto& s : out) s.is_weight /= max_w;
        }
        return out;
    }

private:
    struct Entry {
        Experience exp;
        double priority = 1.0;
    };

    double max_priority() const {
        double m = 1.0;  // optimism default for an empty buffer
        for (const auto& e : entries_) m = std::max(m, e.priority);
        return std::max(m, pri_floor_);
    }

    void push_with_priority(Experience exp, double priority) {
        if (entries_.size() == capacity_) {
            entries_[head_] = Entry{std::move(exp), priority};
            head_ = (head_ + 1) % capacity_;
        } else {
            entries_.push_back(Entry{std::move(exp), priority});
        }
    }

    std::size_t capacity_;
    double pri_exponent_;
    double pri_floor_;
    std::size_t head_ = 0;  // next eviction slot once full
    std::vector<Entry> entries_;
};

// ---------------------------------------------------------------------------
// Exploration schedule

struct ExplorationSchedule {
    double epsilon = 0.3;
    double epsilon_start = 0.3;
    double epsilon_min = 0.05;
    double decay = 0.995;
    bool performance_gated = false;
};

inline ExplorationSchedule epsilon_step(ExplorationSchedule schedule,
                                        bool rolling_reward_improved = true) {
    if (!schedule.performance_gated || rolling_reward_improved) {
        schedule.epsilon = std::max(schedule.epsilon_min, schedule.epsilon * schedule.decay);
    }
    return schedule;
}

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
    int epochs = 200;
    int batch_size = 32;
    int target_sync_every = 10;
    double lr_network = 0.001;
    double lr_alpha = 0.01;
    double gamma = 0.0;
    double lambda_l2 = 1e-4;
    double pri_exponent = 0.6;
    double is_beta_start = 0.4;  // annealed linearly to 1.0 over the run
    double pri_floor = kDefaultPriorityFloor;
    std::size_t buffer_capacity = 10000;
    std::uint64_t seed = 0;
    ExplorationSchedule exploration;
    VadnConfig network;
    NormalizeOptions normalize;

    void validate() const {
        if (epochs < 1) throw ConfigInvalid("epochs must be >= 1");
        if (batch_size < 1) throw ConfigInvalid("batch_size must be >= 1");
        if (target_sync_every < 1) throw ConfigInvalid("target_sync_every must be >= 1");
        if (lr_network <= 0.0 || lr_alpha <= 0.0) throw ConfigInvalid("learning rates must be positive");
        if (gamma < 0.0 || gamma >= 1.0) throw ConfigInvalid("gamma must be in [0,1)");
        if (lambda_l2 < 0.0) throw ConfigInvalid("lambda_l2 must be >= 0");
        if (pri_floor <= 0.0) throw ConfigInvalid("pri_floor must be positive");
    }
};

inline void to_json(json& j, const TrainConfig& c) {
    j = json{{"epochs", c.epochs},
             {"batch_size", c.batch_size},
             {"target_sync_every", c.target_sync_every},
             {"lr_network", c.lr_network},
             {"lr_alpha", c.lr_alpha},
             {"gamma", c.gamma},
             {"lambda_l2", c.lambda_l2},
             {"pri_exponent", c.pri_exponent},
             {"is_beta_start", c.is_beta_start},
             {"pri_floor", c.pri_floor},
             {"buffer_capacity", c.buffer_capacity},
             {"seed", c.seed},
             {"epsilon_start", c.exploration.epsilon_start},
             {"epsilon_min", c.exploration.epsilon_min},
             {"epsilon_decay", c.exploration.decay},
             {"performance_gated", c.exploration.performance_gated},
             {"network", c.network},
             {"zscore_meta", c.normalize.zscore_meta}};
}
inline void from_json(const json& j, TrainConfig& c) {
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.target_sync_every = j.value("target_sync_every", c.target_sync_every);
    c.lr_network = j.value("lr_network", c.lr_network);
    c.lr_alpha = j.value("lr_alpha", c.lr_alpha);
    c.gamma = j.value("gamma", c.gamma);
    c.lambda_l2 = j.value("lambda_l2", c.lambda_l2);
    c.pri_exponent = j.value("pri_exponent", c.pri_exponent);
    c.is_beta_start = j.value("is_beta_start", c.is_beta_start);
    c.pri_floor = j.value("pri_floor", c.pri_floor);
    c.buffer_capacity = j.value("buffer_capacity", c.buffer_capacity);
    c.seed = j.value("seed", c.seed);
    c.exploration.epsilon_start = j.value("epsilon_start", c.exploration.epsilon_start);
    c.exploration.epsilon = c.exploration.epsilon_start;
    c.exploration.epsilon_min = j.value("epsilon_min", c.exploration.epsilon_min);
    c.exploration.decay = j.value("epsilon_decay", c.exploration.decay);
    c.exploration.performance_gated = j.value("performance_gated", false);
    if (j.contains("network")) j.at("network").get_to(c.network);
    c.normalize.zscore_meta = j.value("zscore_meta", true);
}

// One fully labeled task: the candidate feature state plus ground-truth
// pass/fail and adherence for every candidate (available during training).
struct LabeledPool {
    std::string task_id;
    BanditState state;
    std::vector<ExecutionResult> executions;
    std::vector<double> adherences;
};

struct EpochRecord {
    int epoch = 0;
    double mean_reward = 0.0;
    double mean_loss = 0.0;
    double epsilon = 0.0;
    double alpha = 0.0;
};

inline void to_json(json& j, const EpochRecord& r) {
    j = json{{"epoch", r.epoch},
             {"mean_reward", r.mean_reward},
             {"mean_loss", r.mean_loss},
             {"epsilon", r.epsilon},
             {"alpha", r.alpha}};
}

struct TrainReport {
    std::vector<EpochRecord> epochs;
    double final_mean_reward = 0.0;
    double final_alpha = 1.0;
};

struct TrainResult {
    VadnParams params;
    AdamState opt;
    RunningStats feature_stats;
    TrainReport report;
};

// Deterministic given (pools, config.seed). Feature statistics are frozen
// from the training pools before the first update; states are normalized
// once and reused across epochs.
inline TrainResult train(const std::vector<LabeledPool>& pools, const TrainConfig& config) {
    config.validate();
    if (pools.empty()) throw ConfigInvalid("no training pools");

    RunningStats stats;
    for (const auto& pool : pools) {
        for (const auto& fv : pool.state.candidates) stats.observe(fv);
    }

    std::vector<BanditState> normalized;
    normalized.reserve(pools.size());
    for (const auto& pool : pools) {
        BanditState s;
        s.candidates = normalize_batch(pool.state.candidates, stats, config.normalize);
        normalized.push_back(std::move(s));
    }

    std::mt19937_64 rng(config.seed);
    VadnParams params = init_params(config.network, config.seed ^ 0x9e3779b97f4a7c15ULL);
    VadnParams target = sync_target(params);
    AdamState opt = AdamState::for_params(params);
    ReplayBuffer buffer(config.buffer_capacity, config.pri_exponent, config.pri_floor);
    ExplorationSchedule schedule = config.exploration;
    schedule.epsilon = schedule.epsilon_start;

    TrainResult result;
    result.feature_stats = stats;
    double best_rolling_reward = -1e300;

    std::uniform_real_distribution<double> uni01(0.0, 1.0);
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        double reward_sum = 0.0;
        double loss_sum = 0.0;
        int updates = 0;
        const double progress = config.epochs > 1
                                    ? static_cast<double>(epoch - 1) /
                                          static_cast<double>(config.epochs - 1)
                                    : 1.0;
        const double is_beta = config.is_beta_start + (1.0 - config.is_beta_start) * progress;

        for (std::size_t t = 0; t < pools.size(); ++t) {
            const auto& pool = pools[t];
            const auto& state = normalized[t];
            const int k = state.k();

            int action;
            if (uni01(rng) < schedule.epsilon) {
                action = std::uniform_int_distribution<int>(0, k - 1)(rng);
            } else {
                action = select_action(params, state);
            }
            const double reward = compute_reward(pool.executions, pool.adherences, action);
            reward_sum += reward;

            Experience exp;
            exp.state = state;
            exp.action = action;
            exp.reward = reward;
            exp.terminal = true;
            buffer.push(std::move(exp));

            if (buffer.size() >= static_cast<std::size_t>(config.batch_size)) {
                const auto samples =
                    buffer.sample_batch(static_cast<std::size_t>(config.batch_size), is_beta, rng);
                std::vector<WeightedExperience> batch;
                batch.reserve(samples.size());
                for (const auto& s : samples) batch.push_back({s.exp, s.is_weight});
                auto tl = td_loss(params, target, batch, config.gamma, config.lambda_l2);
                params = apply_update(params, tl.gradients, opt, config.lr_network,
                                      config.lr_alpha);
                for (std::size_t i = 0; i < samples.size(); ++i) {
                    buffer.update_priority(samples[i].index, tl.td_errors[i]);
                }
                loss_sum += tl.loss;
                ++updates;
            }
        }

        if (epoch % config.target_sync_every == 0) target = sync_target(params);

        const double mean_reward = reward_sum / static_cast<double>(pools.size());
        const bool improved = mean_reward > best_rolling_reward;
        best_rolling_reward = std::max(best_rolling_reward, mean_reward);

        EpochRecord rec;
        rec.epoch = epoch;
        rec.mean_reward = mean_reward;
        rec.mean_loss = updates > 0 ? loss_sum / static_cast<double>(updates) : 0.0;
        rec.epsilon = schedule.epsilon;
        rec.alpha = params.alpha_value();
        result.report.epochs.push_back(rec);

        schedule = epsilon_step(schedule, improved);
    }

    result.report.final_mean_reward = result.report.epochs.back().mean_reward;
    result.report.final_alpha = params.alpha_value();
    result.params = std::move(params);
    result.opt = std::move(opt);
    return result;
}

}  // namespace multicod
