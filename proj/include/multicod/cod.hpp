#pragma once
// Strategy-diverse prompt generation, the diversity gate, and CoD-constrained
// candidate synthesis through the gateway.

#include <cmath>
#include <cstdint>
#include <utility>
#include <stdexcept>
#include <string>
#include <vector>

#include "multicod/core.hpp"
#include "multicod/gateway.hpp"
#include "multicod/metrics.hpp"
#include "multicod/prompts.hpp"

namespace multicod {

struct MalformedStrategyJson : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ZeroEmbedding : std::runtime_error {
    ZeroEmbedding() : std::runtime_error("prompt embeds to the zero vector") {}
};

// ---------------------------------------------------------------------------
// Embedding

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<double> embed(const std::string& text) const = 0;
};

// Deterministic offline embedder: hashed term-frequency over 256 buckets.
class HashedEmbedder : public Embedder {
public:
    static constexpr int kDim = 256;

    std::vector<double> embed(const std::string& text) const override {
        std::vector<double> v(kDim, 0.0);
        std::string token;
        auto flush = [&] {
            if (!token.empty()) {
                v[bucket(token)] += 1.0;
                token.clear();
            }
        };
        for (unsigned char c : text) {
            if (std::isspace(c) != 0) {
                flush();
            } else {
                token.push_back(static_cast<char>(std::tolower(c)));
            }
        }
        flush();
        return v;
    }

    static std::size_t bucket(const std::string& token) {
        // FNV-1a, stable across platforms
        std::uint64_t h = 14695981039346656037ULL;
        for (unsigned char c : token) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        return static_cast<std::size_t>(h % kDim);
    }
};

// ---------------------------------------------------------------------------
// Diversity gate

struct DiversityReport {
    std::vector<std::vector<double>> pairwise_distances;  // k x k, zero diagonal
    double mean_diversity = 0.0;
    double threshold = 0.0;
    bool passed = false;
};

inline constexpr double kDefaultDiversityThreshold = 0.15;

// Mean pairwise cosine distance over the upper triangle.
inline DiversityReport diversity(const std::vector<std::string>& prompts,
                                 const Embedder& embedder,
                                 double threshold = kDefaultDiversityThreshold) {
    const int k = static_cast<int>(prompts.size());
    if (k < 2) throw std::invalid_argument("diversity needs k >= 2 prompts");

    std::vector<std::vector<double>> emb;
    std::vector<double> norms;
    emb.reserve(prompts.size());
    for (const auto& p : prompts) {
        emb.push_back(embedder.embed(p));
        double n2 = 0.0;
        for (double x : emb.back()) n2 += x * x;
        if (n2 == 0.0) throw ZeroEmbedding{};
        norms.push_back(std::sqrt(n2));
    }

    DiversityReport report;
    report.threshold = threshold;
    report.pairwise_distances.assign(static_cast<std::size_t>(k),
                                     std::vector<double>(static_cast<std::size_t>(k), 0.0));
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            double dot = 0.0;
            const auto& a = emb[static_cast<std::size_t>(i)];
            const auto& b = emb[static_cast<std::size_t>(j)];
            for (std::size_t d = 0; d < a.size(); ++d) dot += a[d] * b[d];
            const double dist = 1.0 - dot / (norms[static_cast<std::size_t>(i)] *
                                             norms[static_cast<std::size_t>(j)]);
            report.pairwise_distances[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = dist;
            report.pairwise_distances[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = dist;
            sum += dist;
        }
    }
    report.mean_diversity = 2.0 * sum / (static_cast<double>(k) * static_cast<double>(k - 1));
    report.passed = report.mean_diversity >= threshold;
    return report;
}

// ---------------------------------------------------------------------------
// Strategy prompt generation

namespace detail {

// Pulls the first JSON object out of a completion, tolerating ```json fences
// and trailing prose.
inline json extract_json_object(const std::string& text) {
    const std::size_t open = text.find('{');
    if (open == std::string::npos) {
        throw MalformedStrategyJson("no JSON object in response");
    }
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = open; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}') {
            --depth;
            if (depth == 0) {
                try {
                    return json::parse(text.substr(open, i - open + 1));
                } catch (const json::parse_error& e) {
                    throw MalformedStrategyJson(std::string("invalid JSON: ") + e.what());
                }
            }
        }
    }
    throw MalformedStrategyJson("unterminated JSON object in response");
}

inline std::vector<StrategyPrompt> parse_strategy_response(const std::string& text, int k) {
    const json obj = extract_json_object(text);
    if (!obj.contains("prompts") || !obj["prompts"].is_array()) {
        throw MalformedStrategyJson("response lacks a prompts array");
    }
    const auto& arr = obj["prompts"];
    if (static_cast<int>(arr.size()) < k) {
        throw MalformedStrategyJson("expected >= " + std::to_string(k) + " prompt objects, got " +
                                    std::to_string(arr.size()));
    }
    std::vector<StrategyPrompt> out;
    for (int i = 0; i < k; ++i) {
        const auto& p = arr[static_cast<std::size_t>(i)];
        StrategyPrompt sp;
        sp.index = i;
        try {
            sp.strategy_name = p.at("strategy_name").get<std::string>();
            sp.strategy_focus = p.at("strategy_focus").get<std::string>();
            sp.full_prompt = p.at("full_prompt").get<std::string>();
        } catch (const json::exception& e) {
            throw MalformedStrategyJson(std::string("prompt object missing field: ") + e.what());
        }
        // the wire schema requires three fields; these two are optional extras
        sp.instruction = p.value("instruction", "");
        sp.key_priorities = p.value("key_priorities", std::vector<std::string>{});
        if (sp.full_prompt.empty()) throw MalformedStrategyJson("empty full_prompt");
        sp.temperature = temperature_for_index(i);
        out.push_back(std::move(sp));
    }
    return out;
}

}  // namespace detail

struct StrategyBatch {
    std::vector<StrategyPrompt> prompts;
    DiversityReport report;
};

// Generates k strategy prompts, regenerating up to max_retries while the
// diversity gate fails. Failing the gate is not an error; the best batch seen
// is returned with report.passed = false.
inline StrategyBatch generate_strategy_prompts(const Task& task, int k, LlmGateway& gateway,
                                               const Embedder& embedder,
                                               double threshold = kDefaultDiversityThreshold,
                                               int max_retries = 2) {
    if (k < 2) throw std::invalid_argument("k must be >= 2");

    CompletionRequest request;
    request.tag = RequestTag::strategy_gen;
    request.system_prompt = prompts::strategy_generation_prompt(k);
    request.user_prompt = "Task: " + task.description + "\nSignature: " + task.signature;
    request.temperature = 0.7;

    StrategyBatch best;
    best.report.mean_diversity = -1.0;
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        const CompletionResponse resp = gateway.complete(request);
        auto prompts = detail::parse_strategy_response(resp.text, k);
        std::vector<std::string> texts;
        texts.reserve(prompts.size());
        for (const auto& p : prompts) texts.push_back(p.full_prompt);
        auto report = diversity(texts, embedder, threshold);
        if (report.mean_diversity > best.report.mean_diversity) {
            best.prompts = std::move(prompts);
            best.report = std::move(report);
        }
        if (best.report.passed) break;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Candidate synthesis

namespace detail {

// Splits a draft completion into steps: one step per non-empty line, leading
// enumeration markers stripped, anything after the #### separator ignored.
inline std::vector<DraftStep> parse_draft(const std::string& text) {
    std::vector<DraftStep> steps;
    for (auto& raw : split_lines(text)) {
        std::string line = raw;
        const auto sep = line.find("####");
        if (sep != std::string::npos) {
            line = line.substr(0, sep);
            if (!line.empty()) {
                // fall through to parse the remainder, then stop
            } else {
                break;
            }
        }
        std::size_t b = line.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        // strip "1." / "12)" / "-" / "*" markers
        std::size_t p = b;
        while (p < line.size() && std::isdigit(static_cast<unsigned char>(line[p])) != 0) ++p;
        if (p < line.size() && (line[p] == '.' || line[p] == ')')) {
            b = p + 1;
        } else if (line[b] == '-' || line[b] == '*') {
            b = b + 1;
        }
        b = line.find_first_not_of(" \t", b);
        if (b == std::string::npos) continue;
        std::size_t e = line.find_last_not_of(" \t\r");
        steps.push_back(DraftStep::from_text(line.substr(b, e - b + 1)));
        if (sep != std::string::npos) break;
    }
    return steps;
}

inline DraftStep truncate_step(const DraftStep& step) {
    std::vector<std::string> words;
    std::string token;
    for (char c : step.text) {
        if (std::isspace(static_cast<unsigned char>(c)) != 0) {
            if (!token.empty()) words.push_back(std::exchange(token, {}));
        } else {
            token.push_back(c);
        }
        if (words.size() == 5) break;
    }
    if (!token.empty() && words.size() < 5) words.push_back(token);
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i > 0) out.push_back(' ');
        out += words[i];
    }
    return DraftStep::from_text(out);
}

}  // namespace detail

// Two gateway calls: one for the constrained draft, one for the code. Steps
// over the 5-word limit are re-requested individually up to max_regen times,
// then truncated with a provenance mark.
inline Candidate synthesize_candidate(const Task& task, const StrategyPrompt& prompt,
                                      LlmGateway& gateway, int max_regen = 2) {
    if (prompt.full_prompt.empty()) throw std::invalid_argument("prompt.full_prompt is empty");

    Candidate candidate;
    candidate.strategy = prompt;

    CompletionRequest draft_req;
    draft_req.tag = RequestTag::draft_step;
    draft_req.system_prompt = prompts::kCodSystem;
    draft_req.user_prompt = prompt.full_prompt + "\n\nTask: " + task.description +
                            "\nSignature: " + task.signature +
                            "\nList the reasoning steps, one per line.";
    draft_req.temperature = prompt.temperature;

    const CompletionResponse draft_resp = gateway.complete(draft_req);
    candidate.generation_tokens += draft_resp.output_tokens;
    candidate.generation_seconds += draft_resp.wall_seconds;

    auto steps = detail::parse_draft(draft_resp.text);
    if (steps.empty()) throw EmptyDraft{};

    for (std::size_t i = 0; i < steps.size(); ++i) {
        int attempts = 0;
        while (!validate_step(steps[i]) && attempts < max_regen) {
            CompletionRequest regen = draft_req;
            regen.user_prompt = "Rewrite this reasoning step in 5 words or fewer:\n" +
                                steps[i].text;
            const CompletionResponse r = gateway.complete(regen);
            candidate.generation_tokens += r.output_tokens;
            candidate.generation_seconds += r.wall_seconds;
            ++candidate.provenance.regen_count;
            ++attempts;
            auto replacement = detail::parse_draft(r.text);
            if (!replacement.empty()) steps[i] = replacement.front();
        }
        if (!validate_step(steps[i])) {
            steps[i] = detail::truncate_step(steps[i]);
            candidate.provenance.truncated_steps.push_back(static_cast<int>(i));
        }
    }
    candidate.draft = std::move(steps);

    std::string draft_text;
    for (const auto& s : candidate.draft) draft_text += s.text + "\n";

    CompletionRequest code_req;
    code_req.tag = RequestTag::code_gen;
    code_req.system_prompt = prompts::kCodSystem;
    code_req.user_prompt = prompt.full_prompt + "\n\nTask: " + task.description +
                           "\nSignature: " + task.signature +
                           "\n\nReasoning steps:\n" + draft_text +
                           "\nWrite the final code only.";
    code_req.temperature = prompt.temperature;

    const CompletionResponse code_resp = gateway.complete(code_req);
    candidate.generation_tokens += code_resp.output_tokens;
    candidate.generation_seconds += code_resp.wall_seconds;
    candidate.code = code_resp.text;

    return candidate;
}

}  // namespace multicod
