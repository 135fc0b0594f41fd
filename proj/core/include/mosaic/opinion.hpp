#pragma once

#include <optional>
#include <string>
#include <vector>

namespace mosaic {

// Ternary sentiment score: -1 negative, 0 neutral, +1 positive.
enum class SentimentScore : int { negative = -1, neutral = 0, positive = 1 };

struct ExpertOpinion {
    std::string expert_id;   // "sentiment", "technical", "human", ...
    std::string input_text;  // the rendered input the expert saw
    int prediction = 0;      // 0 = down, 1 = up
    std::optional<double> confidence;
    std::optional<std::string> rationale;
};

struct SampleRef {
    std::string ticker;
    std::string target_date;  // ISO
};

struct PoolResult {
    SampleRef sample;
    int label = 0;
    double pct_change = 0;
    std::vector<ExpertOpinion> opinions;     // at most one per expert_id
    std::vector<std::string> abstentions;    // expert_ids that abstained
};

}  // namespace mosaic
