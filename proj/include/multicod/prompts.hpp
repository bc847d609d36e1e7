#pragma once
// Shipped prompt templates. "{N}" in the strategy template is replaced by the
// requested candidate count; the task description and signature are appended
// by the caller.

#include <string>

namespace multicod::prompts {

inline constexpr const char* kStrategyGeneration = R"(Given the following coding task, create N DIFFERENT Chain of Draft (CoD) prompts. Each prompt should:
1. Use a unique strategy/approach angle
2. Maintain core CoD rules (<=5 words per step)
3. Be specific to this task's requirements
4. Guide toward different solution paths

Output format:
```json
{
  "prompts": [
    {
      "strategy_name": "...",
      "strategy_focus": "...",
      "full_prompt": "..."
    }
  ]
}```####.)";

inline constexpr const char* kCodSystem =
    R"(Think step by step, but only keep a minimum draft for each thinking step, with 5 words at most.
Return the answer at the end of the response after a separator ####.)";

inline std::string strategy_generation_prompt(int k) {
    std::string text = kStrategyGeneration;
    const std::string needle = "create N DIFFERENT";
    const auto pos = text.find(needle);
    if (pos != std::string::npos) {
        text.replace(pos, needle.size(), "create " + std::to_string(k) + " DIFFERENT");
    }
    return text;
}

}  // namespace multicod::prompts
