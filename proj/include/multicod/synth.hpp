#pragma once
// Offline synthetic benchmark: candidate pools with controllable
// feature-outcome relationships, plus baseline policies and regret reporting.
//
// Pools are generated by sampling plausible per-candidate raw counts, pushing
// them through the real feature assembly, and labeling pass/fail with a
// hidden linear score: candidate i passes iff
//
//   score_i + noise * g_i > theta_task
//
// where theta_task sits between the pool's own score order statistics so the
// expected number of passers per task is pass_rate * k (rounded
// stochastically). The marginal pass rate therefore matches the requested
// rate while almost every task keeps at least one passer, and the pass
// probability rises smoothly with the hidden score once noise is nonzero.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "multicod/core.hpp"
#include "multicod/metrics.hpp"
#include "multicod/trainer.hpp"
#include "multicod/vadn.hpp"

namespace multicod {

enum class SignalModel { linear_separable, adherence_biased, complexity_trap, noise_floor };

inline const char* signal_model_name(SignalModel m) {
    switch (m) {
        case SignalModel::linear_separable: return "linear_separable";
        case SignalModel::adherence_biased: return "adherence_biased";
        case SignalModel::complexity_trap: return "complexity_trap";
        case SignalModel::noise_floor: return "noise_floor";
    }
    return "unknown";
}

inline SignalModel signal_model_from_name(const std::string& s) {
    if (s == "linear_separable") return SignalModel::linear_separable;
    if (s == "adherence_biased") return SignalModel::adherence_biased;
    if (s == "complexity_trap") return SignalModel::complexity_trap;
    if (s == "noise_floor") return SignalModel::noise_floor;
    throw std::invalid_argument("unknown signal model: " + s);
}

struct SynthPoolSpec {
    int k = 5;
    int n_tasks = 500;
    SignalModel signal_model = SignalModel::linear_separable;
    double pass_rate = 0.25;
    double noise = 0.0;
    std::uint64_t seed = 0;
};

inline void to_json(json& j, const SynthPoolSpec& s) {
    j = json{{"k", s.k},
             {"n_tasks", s.n_tasks},
             {"signal_model", signal_model_name(s.signal_model)},
             {"pass_rate", s.pass_rate},
             {"noise", s.noise},
             {"seed", s.seed}};
}
inline void from_json(const json& j, SynthPoolSpec& s) {
    s.k = j.value("k", 5);
    s.n_tasks = j.value("n_tasks", 500);
    s.signal_model = signal_model_from_name(j.value("signal_model", "linear_separable"));
    s.pass_rate = j.value("pass_rate", 0.25);
    s.noise = j.value("noise", 0.0);
    s.seed = j.value("seed", std::uint64_t{0});
}

struct SynthPool {
    BanditState state;
    std::vector<bool> pass_labels;
    std::vector<double> adherences;
    std::vector<double> hidden_scores;  // exposed for brute-force verification
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t x = seed ^ (salt * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
}

// Hidden weight vector per signal model, over the 26 features.
inline std::array<double, kFeatureCount> hidden_weights(SignalModel model) {
    std::array<double, kFeatureCount> w{};
    switch (model) {
        case SignalModel::linear_separable:
        case SignalModel::noise_floor:
            w[kCharRatio] = -1.2;
            w[kRankByLength] = -0.8;
            w[kRankByAdherence] = -1.0;
            w[kAdherenceRate] = 1.2;
            w[kFunctionCountLog] = 0.6;
            w[kCommentCountLog] = 0.4;
            break;
        case SignalModel::adherence_biased:
            w[kAdherenceRate] = 3.0;
            w[kRankByAdherence] = -1.0;
            w[kStdWords] = -0.2;
            break;
        case SignalModel::complexity_trap:
            w[kCharCountLog] = -1.4;
            w[kLineCountLog] = -0.8;
            w[kCharRatio] = -1.2;
            w[kFunctionCountLog] = 0.3;
            break;
    }
    return w;
}

}  // namespace detail

class SynthPoolGenerator {
public:
    explicit SynthPoolGenerator(SynthPoolSpec spec) : spec_(std::move(spec)) {
        if (spec_.k < 2) throw std::invalid_argument("k must be >= 2");
        if (spec_.pass_rate <= 0.0 || spec_.pass_rate >= 1.0) {
            throw std::invalid_argument("pass_rate must be in (0,1)");
        }
        weights_ = detail::hidden_weights(spec_.signal_model);
        calibrate();
    }

    const SynthPoolSpec& spec() const { return spec_; }

    SynthPool pool(int task_index) const {
        if (task_index < 0 || task_index >= spec_.n_tasks) {
            throw std::out_of_range("task_index out of range");
        }
        SynthPool out;
        std::mt19937_64 rng(detail::mix_seed(spec_.seed, static_cast<std::uint64_t>(task_index)));
        generate_candidates(rng, out);

        // stochastic rounding keeps the expected passer count at pass_rate * k
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        const double pk = spec_.pass_rate * static_cast<double>(spec_.k);
        int m = static_cast<int>(std::floor(pk));
        if (uni(rng) < pk - std::floor(pk)) ++m;
        m = std::clamp(m, 0, spec_.k);

        std::vector<double> sorted = out.hidden_scores;
        std::sort(sorted.begin(), sorted.end(), std::greater<>());
        double theta;
        if (m == 0) {
            theta = sorted.front() + 1.0;
        } else if (m == spec_.k) {
            theta = sorted.back() - 1.0;
        } else {
            theta = 0.5 * (sorted[static_cast<std::size_t>(m - 1)] +
                           sorted[static_cast<std::size_t>(m)]);
        }
        // noise perturbs the task threshold, so it shifts how many candidates
        // pass while labels stay monotone in the hidden score
        std::normal_distribution<double> gauss(0.0, 1.0);
        if (spec_.noise > 0.0) theta += spec_.noise * gauss(rng);
        out.pass_labels.resize(static_cast<std::size_t>(spec_.k));
        for (int i = 0; i < spec_.k; ++i) {
            out.pass_labels[static_cast<std::size_t>(i)] =
                out.hidden_scores[static_cast<std::size_t>(i)] > theta;
        }
        return out;
    }

    LabeledPool labeled_pool(int task_index) const {
        const SynthPool p = pool(task_index);
        LabeledPool out;
        out.task_id = "synth-" + std::to_string(task_index);
        out.state = p.state;
        out.adherences = p.adherences;
        out.executions.reserve(p.pass_labels.size());
        for (bool passed : p.pass_labels) {
            ExecutionResult r;
            r.passed = passed;
            r.tests_run = 1;
            out.executions.push_back(r);
        }
        return out;
    }

private:
    // Fills state, adherences, and hidden scores; labels are applied later.
    void generate_candidates(std::mt19937_64& rng, SynthPool& out) const {
        const int k = spec_.k;
        std::vector<RawCodeCounts> counts(static_cast<std::size_t>(k));
        std::vector<CodStats> stats(static_cast<std::size_t>(k));
        std::vector<StrategyMeta> meta(static_cast<std::size_t>(k));

        std::normal_distribution<double> log_chars(6.5, 0.5);
        std::uniform_int_distribution<int> small(0, 4);
        std::uniform_int_distribution<int> steps_dist(4, 9);
        std::uniform_real_distribution<double> uni01(0.0, 1.0);

        for (int i = 0; i < k; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            auto& c = counts[idx];
            c.chars = static_cast<std::int64_t>(std::lround(std::exp(log_chars(rng))));
            c.lines = std::max<std::int64_t>(1, c.chars / 35 + small(rng) - 2);
            c.functions = small(rng);
            c.loops = small(rng) / 2;
            c.conditionals = small(rng);
            c.try_catch = small(rng) / 3;
            c.imports = 1 + small(rng) / 2;
            c.classes = small(rng) / 4;
            c.comments = small(rng);
            c.avg_line_length = static_cast<double>(c.chars) /
                                static_cast<double>(std::max<std::int64_t>(c.lines, 1));

            auto& s = stats[idx];
            s.total_steps = steps_dist(rng);
            const int valid = s.total_steps -
                              std::uniform_int_distribution<int>(0, s.total_steps / 2)(rng);
            s.adherence_rate = static_cast<double>(valid) / static_cast<double>(s.total_steps);
            s.avg_words = 3.0 + 2.5 * uni01(rng);
            s.min_words = 1 + static_cast<int>(2.0 * uni01(rng));
            s.max_words = s.min_words + 2 + static_cast<int>(3.0 * uni01(rng));
            s.std_words = 0.2 + uni01(rng);

            auto& m = meta[idx];
            m.strategy_index = i;
            m.temperature = temperature_for_index(i);
            m.time_focused = uni01(rng) < 0.2;
            m.space_focused = uni01(rng) < 0.2;
        }

        const auto rel = relative_features(counts, stats);
        out.state.candidates.resize(static_cast<std::size_t>(k));
        out.adherences.resize(static_cast<std::size_t>(k));
        out.hidden_scores.resize(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            out.state.candidates[idx] =
                detail::assemble(counts[idx], stats[idx], meta[idx], rel[idx]);
            out.adherences[idx] = stats[idx].adherence_rate;
            double score = 0.0;
            for (int d = 0; d < kFeatureCount; ++d) {
                score += weights_[static_cast<std::size_t>(d)] * out.state.candidates[idx][d];
            }
            out.hidden_scores[idx] = (score - score_mean_) / score_std_;
        }
    }

    // Standardizes the hidden score over a simulated sample so noise and the
    // score live on comparable scales regardless of the signal model.
    void calibrate() {
        score_mean_ = 0.0;
        score_std_ = 1.0;
        const int sims = std::min(spec_.n_tasks, 4096);
        std::vector<double> raw;
        for (int t = 0; t < sims; ++t) {
            SynthPool p;
            std::mt19937_64 rng(detail::mix_seed(spec_.seed, static_cast<std::uint64_t>(t)));
            generate_candidates(rng, p);
            for (double s : p.hidden_scores) raw.push_back(s);
        }
        double mean = 0.0;
        for (double s : raw) mean += s;
        mean /= static_cast<double>(raw.size());
        double var = 0.0;
        for (double s : raw) var += (s - mean) * (s - mean);
        var /= static_cast<double>(raw.size());
        score_mean_ = mean;
        score_std_ = std::max(std::sqrt(var), 1e-9);
    }

    SynthPoolSpec spec_;
    std::array<double, kFeatureCount> weights_{};
    double score_mean_ = 0.0;
    double score_std_ = 1.0;
};

// ---------------------------------------------------------------------------
// Policies and reporting

enum class PolicyKind { random, oracle, shortest_code, best_adherence, vadn };

inline const char* policy_name(PolicyKind p) {
    switch (p) {
        case PolicyKind::random: return "random";
        case PolicyKind::oracle: return "oracle";
        case PolicyKind::shortest_code: return "shortest_code";
        case PolicyKind::best_adherence: return "best_adherence";
        case PolicyKind::vadn: return "vadn";
    }
    return "unknown";
}

struct PolicyReport {
    std::string policy;
    int n_tasks = 0;
    double mean_reward = 0.0;
    double selection_accuracy = 0.0;  // fraction of tasks whose pick passed
    double oracle_accuracy = 0.0;     // fraction of tasks with any passer
    double regret = 0.0;              // oracle mean reward minus policy's
    double bonus_capture_rate = 0.0;  // pick passed AND had best adherence
};

inline void to_json(json& j, const PolicyReport& r) {
    j = json{{"policy", r.policy},
             {"n_tasks", r.n_tasks},
             {"mean_reward", r.mean_reward},
             {"selection_accuracy", r.selection_accuracy},
             {"oracle_accuracy", r.oracle_accuracy},
             {"regret", r.regret},
             {"bonus_capture_rate", r.bonus_capture_rate}};
}

struct VadnPolicy {
    const VadnParams* params = nullptr;
    const RunningStats* stats = nullptr;
    NormalizeOptions normalize;
};

// Best reward attainable on one pool.
inline int oracle_action(const std::vector<ExecutionResult>& executions,
                         const std::vector<double>& adherences) {
    const int k = static_cast<int>(executions.size());
    int best = 0;
    double best_r = compute_reward(executions, adherences, 0);
    for (int a = 1; a < k; ++a) {
        const double r = compute_reward(executions, adherences, a);
        if (r > best_r) {
            best_r = r;
            best = a;
        }
    }
    return best;
}

inline PolicyReport run_policy(PolicyKind kind, const std::vector<LabeledPool>& pools,
                               std::mt19937_64& rng, const VadnPolicy* vadn = nullptr) {
    if (pools.empty()) throw std::invalid_argument("no pools to evaluate");
    if (kind == PolicyKind::vadn && (vadn == nullptr || vadn->params == nullptr)) {
        throw std::invalid_argument("vadn policy requires parameters");
    }

    PolicyReport report;
    report.policy = policy_name(kind);
    report.n_tasks = static_cast<int>(pools.size());

    double reward_sum = 0.0, oracle_sum = 0.0;
    int picks_passed = 0, any_passer = 0, bonus_captured = 0;
    for (const auto& pool : pools) {
        const int k = pool.state.k();
        int action = 0;
        switch (kind) {
            case PolicyKind::random:
                action = std::uniform_int_distribution<int>(0, k - 1)(rng);
                break;
            case PolicyKind::oracle:
                action = oracle_action(pool.executions, pool.adherences);
                break;
            case PolicyKind::shortest_code: {
                for (int i = 0; i < k; ++i) {
                    if (pool.state.candidates[static_cast<std::size_t>(i)][kIsShortest] == 1.0) {
                        action = i;
                        break;
                    }
                }
                break;
            }
            case PolicyKind::best_adherence: {
                for (int i = 1; i < k; ++i) {
                    if (pool.adherences[static_cast<std::size_t>(i)] >
                        pool.adherences[static_cast<std::size_t>(action)]) {
                        action = i;
                    }
                }
                break;
            }
            case PolicyKind::vadn: {
                BanditState state;
                state.candidates = vadn->stats != nullptr
                                       ? normalize_batch(pool.state.candidates, *vadn->stats,
                                                         vadn->normalize)
                                       : pool.state.candidates;
                action = select_action(*vadn->params, state);
                break;
            }
        }

        const double r = compute_reward(pool.executions, pool.adherences, action);
        reward_sum += r;
        oracle_sum += compute_reward(pool.executions, pool.adherences,
                                     oracle_action(pool.executions, pool.adherences));
        const bool picked_pass = pool.executions[static_cast<std::size_t>(action)].passed;
        if (picked_pass) ++picks_passed;
        bool any = false;
        for (const auto& e : pool.executions) any = any || e.passed;
        if (any) ++any_passer;

        int best_adh = 0;
        for (int i = 1; i < k; ++i) {
            if (pool.adherences[static_cast<std::size_t>(i)] >
                pool.adherences[static_cast<std::size_t>(best_adh)]) {
                best_adh = i;
            }
        }
        if (picked_pass && action == best_adh) ++bonus_captured;
    }

    const double n = static_cast<double>(pools.size());
    report.mean_reward = reward_sum / n;
    report.selection_accuracy = static_cast<double>(picks_passed) / n;
    report.oracle_accuracy = static_cast<double>(any_passer) / n;
    report.regret = oracle_sum / n - report.mean_reward;
    report.bonus_capture_rate = static_cast<double>(bonus_captured) / n;
    return report;
}

}  // namespace multicod
