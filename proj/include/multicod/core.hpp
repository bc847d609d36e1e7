#pragma once
// Shared domain types for the Multi-CoD pipeline.
// All types are immutable value objects after construction and safe to copy
// across workers. Canonical JSON field names are snake_case and match the
// struct members one-to-one.

#include <array>
#include <cctype>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace multicod {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Tasks

struct TestCase {
    std::string name;
    std::string payload;  // opaque check handed to the configured runner
};

struct Task {
    std::string id;
    std::string description;
    std::string signature;
    std::vector<TestCase> tests;
    std::string origin;  // "benchmark" or "synthetic"
};

// ---------------------------------------------------------------------------
// Prompts and candidates

// Decoding temperatures assigned to strategy indices 0..4 (wrapping for k>5).
inline constexpr std::array<double, 5> kTemperatureSchedule{0.4, 0.5, 0.6, 0.7, 0.8};

inline double temperature_for_index(int index) {
    return kTemperatureSchedule[static_cast<std::size_t>(index) % kTemperatureSchedule.size()];
}

struct StrategyPrompt {
    int index = 0;
    std::string strategy_name;
    std::string strategy_focus;
    std::string instruction;                  // optional in the wire schema
    std::vector<std::string> key_priorities;  // optional in the wire schema
    std::string full_prompt;
    double temperature = 0.4;
};

// Number of whitespace-delimited tokens in a string.
int count_words(const std::string& text);

struct DraftStep {
    std::string text;
    int word_count = 1;

    static DraftStep from_text(const std::string& t) {
        return DraftStep{t, count_words(t)};
    }
};

struct ExecutionResult {
    bool passed = false;
    int tests_run = 0;
    std::optional<std::string> failure_detail;
};

// Per-candidate bookkeeping that is not part of the feature space but is
// needed for golden tests and audits.
struct CandidateProvenance {
    int regen_count = 0;
    std::vector<int> truncated_steps;  // indices of steps cut to 5 tokens
    std::vector<double> raw_features;  // pre-log, pre-normalization values
};

struct Candidate {
    StrategyPrompt strategy;
    std::vector<DraftStep> draft;
    std::string code;
    std::optional<ExecutionResult> execution;
    std::int64_t generation_tokens = 0;
    double generation_seconds = 0.0;
    CandidateProvenance provenance;
};

// ---------------------------------------------------------------------------
// Feature space

inline constexpr int kFeatureCount = 26;

enum Feature : int {
    kCharCountLog = 0,
    kLineCountLog,
    kFunctionCountLog,
    kLoopCountLog,
    kConditionalCountLog,
    kTryCatchCountLog,
    kImportCountLog,
    kClassCountLog,
    kCommentCountLog,
    kAvgLineLength,
    kAdherenceRate,
    kTotalStepsLog,
    kAvgWords,
    kMinWords,
    kMaxWords,
    kStdWords,
    kStrategyIndex,
    kTemperature,
    kTimeFocused,
    kSpaceFocused,
    kCharRatio,
    kLineRatio,
    kStepsRatio,
    kRankByLength,
    kRankByAdherence,
    kIsShortest,
};

// Fixed index -> name map. The order is part of the on-disk contract and is
// pinned by a golden manifest test.
inline const std::array<const char*, kFeatureCount>& feature_names() {
    static const std::array<const char*, kFeatureCount> names = {
        "char_count_log",  "line_count_log",   "function_count_log",
        "loop_count_log",  "conditional_count_log", "try_catch_count_log",
        "import_count_log", "class_count_log", "comment_count_log",
        "avg_line_length", "adherence_rate",   "total_steps_log",
        "avg_words",       "min_words",        "max_words",
        "std_words",       "strategy_index",   "temperature",
        "time_focused",    "space_focused",    "char_ratio",
        "line_ratio",      "steps_ratio",      "rank_by_length",
        "rank_by_adherence", "is_shortest",
    };
    return names;
}

struct FeatureVector {
    std::array<double, kFeatureCount> values{};

    double& operator[](int i) { return values[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
};

// Returns one human-readable violation per broken invariant; empty means valid.
std::vector<std::string> validate_feature_vector(const FeatureVector& fv);

// ---------------------------------------------------------------------------
// Bandit types

struct BanditState {
    std::vector<FeatureVector> candidates;

    int k() const { return static_cast<int>(candidates.size()); }
};

struct Experience {
    BanditState state;
    int action = 0;
    double reward = 0.0;
    double priority = 1.0;
    bool terminal = true;  // single-step bandit transitions
};

// ---------------------------------------------------------------------------
// Implementation

inline int count_words(const std::string& text) {
    int n = 0;
    bool in_word = false;
    for (unsigned char c : text) {
        const bool ws = std::isspace(c) != 0;
        if (!ws && !in_word) ++n;
        in_word = !ws;
    }
    return n;
}

inline bool is_binary01(double v) { return v == 0.0 || v == 1.0; }

inline std::vector<std::string> validate_feature_vector(const FeatureVector& fv) {
    std::vector<std::string> out;
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };

    if (!in_unit(fv[kAdherenceRate])) out.push_back("adherence_rate outside [0,1]");
    if (!is_binary01(fv[kTimeFocused])) out.push_back("time_focused not in {0,1}");
    if (!is_binary01(fv[kSpaceFocused])) out.push_back("space_focused not in {0,1}");
    if (!is_binary01(fv[kIsShortest])) out.push_back("is_shortest not in {0,1}");

    for (int i = kCharRatio; i <= kRankByAdherence; ++i) {
        if (!in_unit(fv[i])) {
            out.push_back(std::string(feature_names()[static_cast<std::size_t>(i)]) +
                          " outside [0,1]");
        }
    }
    // log1p-scaled count features must be non-negative
    for (int i : {kCharCountLog, kLineCountLog, kFunctionCountLog, kLoopCountLog,
                  kConditionalCountLog, kTryCatchCountLog, kImportCountLog,
                  kClassCountLog, kCommentCountLog, kTotalStepsLog}) {
        if (fv[i] < 0.0) {
            out.push_back(std::string(feature_names()[static_cast<std::size_t>(i)]) +
                          " negative");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON encoding

inline void to_json(json& j, const TestCase& t) {
    j = json{{"name", t.name}, {"payload", t.payload}};
}
inline void from_json(const json& j, TestCase& t) {
    j.at("name").get_to(t.name);
    j.at("payload").get_to(t.payload);
}

inline void to_json(json& j, const Task& t) {
    j = json{{"id", t.id},
             {"description", t.description},
             {"signature", t.signature},
             {"tests", t.tests},
             {"origin", t.origin}};
}
inline void from_json(const json& j, Task& t) {
    j.at("id").get_to(t.id);
    j.at("description").get_to(t.description);
    t.signature = j.value("signature", "");
    t.tests = j.value("tests", std::vector<TestCase>{});
    t.origin = j.value("origin", "benchmark");
}

inline void to_json(json& j, const StrategyPrompt& p) {
    j = json{{"index", p.index},
             {"strategy_name", p.strategy_name},
             {"strategy_focus", p.strategy_focus},
             {"instruction", p.instruction},
             {"key_priorities", p.key_priorities},
             {"full_prompt", p.full_prompt},
             {"temperature", p.temperature}};
}
inline void from_json(const json& j, StrategyPrompt& p) {
    j.at("index").get_to(p.index);
    j.at("strategy_name").get_to(p.strategy_name);
    j.at("strategy_focus").get_to(p.strategy_focus);
    p.instruction = j.value("instruction", "");
    p.key_priorities = j.value("key_priorities", std::vector<std::string>{});
    j.at("full_prompt").get_to(p.full_prompt);
    j.at("temperature").get_to(p.temperature);
}

inline void to_json(json& j, const DraftStep& s) {
    j = json{{"text", s.text}, {"word_count", s.word_count}};
}
inline void from_json(const json& j, DraftStep& s) {
    j.at("text").get_to(s.text);
    j.at("word_count").get_to(s.word_count);
}

inline void to_json(json& j, const ExecutionResult& e) {
    j = json{{"passed", e.passed}, {"tests_run", e.tests_run}};
    if (e.failure_detail) j["failure_detail"] = *e.failure_detail;
}
inline void from_json(const json& j, ExecutionResult& e) {
    j.at("passed").get_to(e.passed);
    j.at("tests_run").get_to(e.tests_run);
    if (j.contains("failure_detail")) e.failure_detail = j.at("failure_detail").get<std::string>();
}

inline void to_json(json& j, const CandidateProvenance& p) {
    j = json{{"regen_count", p.regen_count},
             {"truncated_steps", p.truncated_steps},
             {"raw_features", p.raw_features}};
}
inline void from_json(const json& j, CandidateProvenance& p) {
    p.regen_count = j.value("regen_count", 0);
    p.truncated_steps = j.value("truncated_steps", std::vector<int>{});
    p.raw_features = j.value("raw_features", std::vector<double>{});
}

inline void to_json(json& j, const Candidate& c) {
    j = json{{"strategy", c.strategy},
             {"draft", c.draft},
             {"code", c.code},
             {"generation_tokens", c.generation_tokens},
             {"generation_seconds", c.generation_seconds},
             {"provenance", c.provenance}};
    if (c.execution) j["execution"] = *c.execution;
}
inline void from_json(const json& j, Candidate& c) {
    j.at("strategy").get_to(c.strategy);
    j.at("draft").get_to(c.draft);
    j.at("code").get_to(c.code);
    j.at("generation_tokens").get_to(c.generation_tokens);
    j.at("generation_seconds").get_to(c.generation_seconds);
    if (j.contains("provenance")) j.at("provenance").get_to(c.provenance);
    if (j.contains("execution")) c.execution = j.at("execution").get<ExecutionResult>();
}

inline void to_json(json& j, const FeatureVector& fv) {
    j = json::object();
    for (int i = 0; i < kFeatureCount; ++i) {
        j[feature_names()[static_cast<std::size_t>(i)]] = fv[i];
    }
}
inline void from_json(const json& j, FeatureVector& fv) {
    for (int i = 0; i < kFeatureCount; ++i) {
        j.at(feature_names()[static_cast<std::size_t>(i)]).get_to(fv.values[static_cast<std::size_t>(i)]);
    }
}

inline void to_json(json& j, const BanditState& s) {
    j = json{{"candidates", s.candidates}, {"k", s.k()}};
}
inline void from_json(const json& j, BanditState& s) {
    j.at("candidates").get_to(s.candidates);
}

inline void to_json(json& j, const Experience& e) {
    j = json{{"state", e.state},
             {"action", e.action},
             {"reward", e.reward},
             {"priority", e.priority},
             {"terminal", e.terminal}};
}
inline void from_json(const json& j, Experience& e) {
    j.at("state").get_to(e.state);
    j.at("action").get_to(e.action);
    j.at("reward").get_to(e.reward);
    j.at("priority").get_to(e.priority);
    e.terminal = j.value("terminal", true);
}

}  // namespace multicod
