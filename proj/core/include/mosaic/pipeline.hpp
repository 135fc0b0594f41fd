#pragma once

#include <map>
#include <string>
#include <vector>

#include "mosaic/config.hpp"
#include "mosaic/gateway.hpp"
#include "mosaic/market_data.hpp"
#include "mosaic/opinion.hpp"

namespace mosaic::pipeline {

// Everything the stages read from disk, loaded once.
struct Inputs {
    std::map<std::string, std::vector<PriceBar>> bars;  // by ticker
    std::vector<NewsItem> news;
    SplitResult splits;
    std::vector<Sample> all_samples;  // train + val + test, in split order
};

Inputs load_inputs(const config::PipelineConfig& cfg);

// Stage artifacts live under cfg.out_dir:
//   samples.jsonl, prompts.jsonl, manifest.json   (build-dataset)
//   pool.jsonl                                    (run-experts)
//   instructions.jsonl, quarantine.jsonl          (scrape)
//   model.json, loss_trace.csv                    (train)
//   metrics.json, faithfulness.json               (eval)
//   sweep.csv                                     (sweep)

void cmd_ingest(const config::PipelineConfig& cfg, std::string& report);
void cmd_build_dataset(const config::PipelineConfig& cfg, std::string& report);
void cmd_run_experts(const config::PipelineConfig& cfg, std::string& report);
void cmd_scrape(const config::PipelineConfig& cfg, std::string& report);
void cmd_train(const config::PipelineConfig& cfg, std::string& report);
void cmd_eval(const config::PipelineConfig& cfg, std::string& report);
void cmd_sweep(const config::PipelineConfig& cfg, std::string& report);

// JSONL (de)serialization used by the stage boundaries; exposed for tests.
std::string pool_result_to_json(const PoolResult& pr);
PoolResult pool_result_from_json(const std::string& line);
std::string instruction_to_json(const gateway::InstructionRecord& rec);
gateway::InstructionRecord instruction_from_json(const std::string& line);

}  // namespace mosaic::pipeline
