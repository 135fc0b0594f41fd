#pragma once

#include <string>
#include <vector>

#include "mosaic/gateway.hpp"
#include "mosaic/market_data.hpp"
#include "mosaic/weighting.hpp"

namespace mosaic::config {

// Whole-pipeline configuration, loaded from a single JSON file. Unknown keys
// are rejected so typos fail loudly instead of silently using a default.
struct PipelineConfig {
    unsigned seed = 42;
    std::string out_dir = "out";

    struct Data {
        std::string prices_dir;               // {dir}/{ticker}.csv
        std::vector<std::string> tickers;
        std::string news_file;                // JSONL, may be empty
    } data;

    struct Sampling {
        std::size_t window = 5;               // trading days (T)
        double pos_threshold = 0.0055;        // >= 0.55% -> up
        double neg_threshold = 0.005;         // <= -0.5% -> down
    } sampling;

    SplitSpec split;

    struct Alphas {
        std::string catalog_file;             // empty -> built-in catalog
        double rescale_factor = 100.0;
        int k_hist = 3;
    } alphas;

    struct Experts {
        std::vector<std::string> roster = {"sentiment", "technical"};
        std::string lexicon_file;             // sentiment expert, lexicon scorer
        std::string sentiment_scorer = "lexicon";  // "lexicon" | "llm"
        std::string human_opinions_file;      // "human" expert lookup table
    } experts;

    gateway::BackendConfig backend;
    std::string audit_log;                    // empty disables auditing

    weighting::TrainConfig train;

    std::vector<double> sweep_taus = {0.1, 0.25, 0.5, 1.0, 2.0};

    std::string templates_dir;                // empty -> compiled-in templates

    void validate() const;  // throws ConfigError
};

PipelineConfig parse_config(const std::string& json_text);
PipelineConfig load_config(const std::string& path);

}  // namespace mosaic::config
