#pragma once
// Static feature extraction: the 10 code-complexity counts, 6 draft
// statistics, 4 strategy-metadata flags, and 6 batch-relative features.
//
// Counting is lexical and line-based for Python-family source: a construct is
// counted when its keyword is the first token of a line. No parsing, no AST.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "multicod/core.hpp"

namespace multicod {

struct EmptyDraft : std::runtime_error {
    EmptyDraft() : std::runtime_error("draft has no steps") {}
};

struct RawCodeCounts {
    std::int64_t chars = 0;
    std::int64_t lines = 0;
    std::int64_t functions = 0;
    std::int64_t loops = 0;
    std::int64_t conditionals = 0;
    std::int64_t try_catch = 0;
    std::int64_t imports = 0;
    std::int64_t classes = 0;
    std::int64_t comments = 0;
    double avg_line_length = 0.0;
};

struct CodStats {
    double adherence_rate = 0.0;
    int total_steps = 0;
    double avg_words = 0.0;
    int min_words = 0;
    int max_words = 0;
    double std_words = 0.0;  // population standard deviation
};

struct StrategyMeta {
    int strategy_index = 0;
    double temperature = 0.0;
    bool time_focused = false;
    bool space_focused = false;
};

struct RelativeFeatures {
    double char_ratio = 0.0;
    double line_ratio = 0.0;
    double steps_ratio = 0.0;
    double rank_by_length = 0.0;
    double rank_by_adherence = 0.0;
    double is_shortest = 0.0;
};

namespace detail {

// First whitespace-delimited token of a line, empty if blank.
inline std::string head_token(const std::string& line) {
    std::size_t b = line.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    std::size_t e = b;
    while (e < line.size() && std::isspace(static_cast<unsigned char>(line[e])) == 0) ++e;
    return line.substr(b, e - b);
}

// Strip trailing ':' and '(' suffixes so "def f():" heads as "def".
inline std::string keyword_of(const std::string& tok) {
    std::size_t e = 0;
    while (e < tok.size() &&
           (std::isalnum(static_cast<unsigned char>(tok[e])) != 0 || tok[e] == '_')) {
        ++e;
    }
    return tok.substr(0, e);
}

inline std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    if (text.empty()) return lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string::npos) {
            // final segment; skip a trailing empty segment after a closing newline
            if (start < text.size()) lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

}  // namespace detail

inline RawCodeCounts count_code(const std::string& code) {
    RawCodeCounts c;
    c.chars = static_cast<std::int64_t>(code.size());
    const auto lines = detail::split_lines(code);
    c.lines = static_cast<std::int64_t>(lines.size());
    for (const auto& line : lines) {
        const std::string head = detail::head_token(line);
        if (head.empty()) continue;
        if (head[0] == '#') {
            ++c.comments;
            continue;
        }
        const std::string kw = detail::keyword_of(head);
        if (kw == "def") ++c.functions;
        else if (kw == "class") ++c.classes;
        else if (kw == "for" || kw == "while") ++c.loops;
        else if (kw == "if" || kw == "elif") ++c.conditionals;
        else if (kw == "try" || kw == "except") ++c.try_catch;
        else if (kw == "import" || kw == "from") ++c.imports;
    }
    c.avg_line_length =
        static_cast<double>(c.chars) / static_cast<double>(std::max<std::int64_t>(c.lines, 1));
    return c;
}

inline bool validate_step(const DraftStep& step) { return step.word_count <= 5; }

inline CodStats cod_stats(const std::vector<DraftStep>& draft) {
    if (draft.empty()) throw EmptyDraft{};
    CodStats s;
    s.total_steps = static_cast<int>(draft.size());
    int valid = 0;
    double sum = 0.0;
    s.min_words = draft.front().word_count;
    s.max_words = draft.front().word_count;
    for (const auto& step : draft) {
        if (validate_step(step)) ++valid;
        sum += step.word_count;
        s.min_words = std::min(s.min_words, step.word_count);
        s.max_words = std::max(s.max_words, step.word_count);
    }
    const double n = static_cast<double>(s.total_steps);
    s.adherence_rate = static_cast<double>(valid) / n;
    s.avg_words = sum / n;
    double ss = 0.0;
    for (const auto& step : draft) {
        const double d = step.word_count - s.avg_words;
        ss += d * d;
    }
    s.std_words = std::sqrt(ss / n);
    return s;
}

namespace detail {

inline bool contains_keyword_ci(const std::string& text,
                                const std::vector<std::string>& keywords) {
    std::string lower;
    lower.reserve(text.size());
    for (char ch : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    for (const auto& kw : keywords) {
        if (lower.find(kw) != std::string::npos) return true;
    }
    return false;
}

}  // namespace detail

inline StrategyMeta strategy_meta(const StrategyPrompt& prompt) {
    static const std::vector<std::string> time_kw = {"speed", "performance", "fast", "time",
                                                     "latency"};
    static const std::vector<std::string> space_kw = {"memory", "space", "storage"};
    const std::string haystack = prompt.strategy_focus + " " + prompt.strategy_name;
    StrategyMeta m;
    m.strategy_index = prompt.index;
    m.temperature = prompt.temperature;
    m.time_focused = detail::contains_keyword_ci(haystack, time_kw);
    m.space_focused = detail::contains_keyword_ci(haystack, space_kw);
    return m;
}

// Batch-relative block. Ranks are normalized to [0,1]; ties are broken by
// candidate index so the result is deterministic.
inline std::vector<RelativeFeatures> relative_features(
    const std::vector<RawCodeCounts>& code, const std::vector<CodStats>& cod) {
    const int k = static_cast<int>(code.size());
    if (k < 2 || cod.size() != code.size()) {
        throw std::invalid_argument("relative_features needs k >= 2 matched inputs");
    }
    std::int64_t max_chars = 0, max_lines = 0;
    int max_steps = 0;
    for (int i = 0; i < k; ++i) {
        max_chars = std::max(max_chars, code[static_cast<std::size_t>(i)].chars);
        max_lines = std::max(max_lines, code[static_cast<std::size_t>(i)].lines);
        max_steps = std::max(max_steps, cod[static_cast<std::size_t>(i)].total_steps);
    }

    auto rank_order = [&](auto key, bool ascending) {
        std::vector<int> order(static_cast<std::size_t>(k));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            const auto ka = key(a), kb = key(b);
            if (ka != kb) return ascending ? ka < kb : ka > kb;
            return a < b;
        });
        std::vector<int> rank(static_cast<std::size_t>(k));
        for (int r = 0; r < k; ++r) rank[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r;
        return rank;
    };

    const auto len_rank = rank_order(
        [&](int i) { return code[static_cast<std::size_t>(i)].chars; }, /*ascending=*/true);
    const auto adh_rank = rank_order(
        [&](int i) { return cod[static_cast<std::size_t>(i)].adherence_rate; }, /*ascending=*/false);

    int shortest = 0;
    for (int i = 1; i < k; ++i) {
        if (code[static_cast<std::size_t>(i)].chars < code[static_cast<std::size_t>(shortest)].chars) shortest = i;
    }

    std::vector<RelativeFeatures> out(static_cast<std::size_t>(k));
    const double denom = static_cast<double>(k - 1);
    for (int i = 0; i < k; ++i) {
        auto& r = out[static_cast<std::size_t>(i)];
        const auto& ci = code[static_cast<std::size_t>(i)];
        r.char_ratio = max_chars == 0 ? 1.0 : static_cast<double>(ci.chars) / static_cast<double>(max_chars);
        r.line_ratio = max_lines == 0 ? 1.0 : static_cast<double>(ci.lines) / static_cast<double>(max_lines);
        r.steps_ratio = max_steps == 0
                            ? 1.0
                            : static_cast<double>(cod[static_cast<std::size_t>(i)].total_steps) /
                                  static_cast<double>(max_steps);
        r.rank_by_length = static_cast<double>(len_rank[static_cast<std::size_t>(i)]) / denom;
        r.rank_by_adherence = static_cast<double>(adh_rank[static_cast<std::size_t>(i)]) / denom;
        r.is_shortest = (i == shortest) ? 1.0 : 0.0;
    }
    return out;
}

namespace detail {

inline FeatureVector assemble(const RawCodeCounts& c, const CodStats& s,
                              const StrategyMeta& m, const RelativeFeatures& r) {
    FeatureVector fv;
    fv[kCharCountLog] = std::log1p(static_cast<double>(c.chars));
    fv[kLineCountLog] = std::log1p(static_cast<double>(c.lines));
    fv[kFunctionCountLog] = std::log1p(static_cast<double>(c.functions));
    fv[kLoopCountLog] = std::log1p(static_cast<double>(c.loops));
    fv[kConditionalCountLog] = std::log1p(static_cast<double>(c.conditionals));
    fv[kTryCatchCountLog] = std::log1p(static_cast<double>(c.try_catch));
    fv[kImportCountLog] = std::log1p(static_cast<double>(c.imports));
    fv[kClassCountLog] = std::log1p(static_cast<double>(c.classes));
    fv[kCommentCountLog] = std::log1p(static_cast<double>(c.comments));
    fv[kAvgLineLength] = c.avg_line_length;
    fv[kAdherenceRate] = s.adherence_rate;
    fv[kTotalStepsLog] = std::log1p(static_cast<double>(s.total_steps));
    fv[kAvgWords] = s.avg_words;
    fv[kMinWords] = s.min_words;
    fv[kMaxWords] = s.max_words;
    fv[kStdWords] = s.std_words;
    fv[kStrategyIndex] = m.strategy_index;
    fv[kTemperature] = m.temperature;
    fv[kTimeFocused] = m.time_focused ? 1.0 : 0.0;
    fv[kSpaceFocused] = m.space_focused ? 1.0 : 0.0;
    fv[kCharRatio] = r.char_ratio;
    fv[kLineRatio] = r.line_ratio;
    fv[kStepsRatio] = r.steps_ratio;
    fv[kRankByLength] = r.rank_by_length;
    fv[kRankByAdherence] = r.rank_by_adherence;
    fv[kIsShortest] = r.is_shortest;
    return fv;
}

inline std::vector<double> raw_values(const RawCodeCounts& c, const CodStats& s) {
    return {static_cast<double>(c.chars),        static_cast<double>(c.lines),
            static_cast<double>(c.functions),    static_cast<double>(c.loops),
            static_cast<double>(c.conditionals), static_cast<double>(c.try_catch),
            static_cast<double>(c.imports),      static_cast<double>(c.classes),
            static_cast<double>(c.comments),     c.avg_line_length,
            s.adherence_rate,                    static_cast<double>(s.total_steps),
            s.avg_words,                         static_cast<double>(s.min_words),
            static_cast<double>(s.max_words),    s.std_words};
}

}  // namespace detail

// Extracts the full 26-feature vector for every candidate in a batch.
// Raw (pre-log) counts are recorded in each candidate's provenance.
inline std::vector<FeatureVector> extract_batch_features(std::vector<Candidate>& batch) {
    const int k = static_cast<int>(batch.size());
    if (k < 2) throw std::invalid_argument("feature extraction needs k >= 2 candidates");
    std::vector<RawCodeCounts> counts;
    std::vector<CodStats> stats;
    counts.reserve(batch.size());
    stats.reserve(batch.size());
    for (const auto& c : batch) {
        counts.push_back(count_code(c.code));
        stats.push_back(cod_stats(c.draft));
    }
    const auto rel = relative_features(counts, stats);
    std::vector<FeatureVector> out;
    out.reserve(batch.size());
    for (int i = 0; i < k; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        out.push_back(detail::assemble(counts[idx], stats[idx],
                                       strategy_meta(batch[idx].strategy), rel[idx]));
        batch[idx].provenance.raw_features = detail::raw_values(counts[idx], stats[idx]);
    }
    return out;
}

inline FeatureVector extract_features(const Candidate& candidate,
                                      const std::vector<Candidate>& batch_context) {
    std::vector<Candidate> batch = batch_context;
    const auto features = extract_batch_features(batch);
    for (std::size_t i = 0; i < batch_context.size(); ++i) {
        if (&batch_context[i] == &candidate ||
            batch_context[i].strategy.index == candidate.strategy.index) {
            return features[i];
        }
    }
    throw std::invalid_argument("candidate not found in batch context");
}

// ---------------------------------------------------------------------------
// Normalization

// Welford running mean/variance per feature dimension.
struct RunningStats {
    std::array<std::int64_t, kFeatureCount> n{};
    std::array<double, kFeatureCount> mean{};
    std::array<double, kFeatureCount> m2{};
    bool identity = false;  // pass-through stats (no normalization)

    static RunningStats pass_through() {
        RunningStats s;
        s.identity = true;
        return s;
    }

    void observe(const FeatureVector& fv) {
        for (int i = 0; i < kFeatureCount; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            ++n[idx];
            const double d = fv[i] - mean[idx];
            mean[idx] += d / static_cast<double>(n[idx]);
            m2[idx] += d * (fv[i] - mean[idx]);
        }
    }

    double stddev(int i) const {
        const auto idx = static_cast<std::size_t>(i);
        if (n[idx] < 2) return 0.0;
        return std::sqrt(m2[idx] / static_cast<double>(n[idx]));
    }
};

struct NormalizeOptions {
    bool zscore_meta = true;  // whether strategy_index and temperature are z-scored
};

inline bool is_zscored_dimension(int i, const NormalizeOptions& opt) {
    if (i >= kCharCountLog && i <= kAvgLineLength) return true;
    if (i >= kTotalStepsLog && i <= kStdWords) return true;  // cod block minus adherence
    if (opt.zscore_meta && (i == kStrategyIndex || i == kTemperature)) return true;
    return false;
}

inline std::vector<FeatureVector> normalize_batch(const std::vector<FeatureVector>& vectors,
                                                  const RunningStats& stats,
                                                  const NormalizeOptions& opt = {}) {
    if (stats.identity) return vectors;
    std::vector<FeatureVector> out = vectors;
    constexpr double kStdFloor = 1e-6;
    for (auto& fv : out) {
        for (int i = 0; i < kFeatureCount; ++i) {
            if (!is_zscored_dimension(i, opt)) continue;
            const double sd = std::max(stats.stddev(i), kStdFloor);
            fv[i] = (fv[i] - stats.mean[static_cast<std::size_t>(i)]) / sd;
        }
    }
    return out;
}

inline void to_json(json& j, const RunningStats& s) {
    j = json{{"n", s.n}, {"mean", s.mean}, {"m2", s.m2}, {"identity", s.identity}};
}
inline void from_json(const json& j, RunningStats& s) {
    j.at("n").get_to(s.n);
    j.at("mean").get_to(s.mean);
    j.at("m2").get_to(s.m2);
    s.identity = j.value("identity", false);
}

}  // namespace multicod
