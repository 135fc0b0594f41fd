#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mosaic/alpha.hpp"
#include "mosaic/gateway.hpp"
#include "mosaic/market_data.hpp"
#include "mosaic/opinion.hpp"
#include "mosaic/prompts.hpp"

namespace mosaic::experts {

// Mean-of-scores aggregation: mean > 0 -> up, mean < 0 -> down, mean == 0 ->
// up (tie mirrors the >= labeling rule). Empty input abstains.
std::optional<int> aggregate_sentiment(const std::vector<SentimentScore>& scores);

using SentimentScorer = std::function<SentimentScore(const NewsItem&)>;

// Baseline scorer backed by a lexicon file (one "word score" pair per line,
// score in {-1,0,1}); the item score is the sign of the summed word scores.
SentimentScorer make_lexicon_scorer(const std::string& lexicon_path);

// Scorer that asks an LLM backend with the single-item sentiment prompt.
SentimentScorer make_llm_scorer(std::shared_ptr<gateway::Gateway> gw,
                                std::shared_ptr<const prompts::TemplateLibrary> lib);

// Decode a model answer into a direction. First scans for direction words
// (up/rise/... vs down/drop/...); failing that, compares a numeric price
// completion against last_price. Throws AnswerParseError when no signal is
// found.
int answer_to_prediction(const std::string& text, std::optional<double> last_price);

class Expert {
public:
    virtual ~Expert() = default;
    virtual std::string id() const = 0;
    // nullopt = abstain; throws ExpertError on failure
    virtual std::optional<ExpertOpinion> evaluate(const Sample& sample) = 0;
};

std::unique_ptr<Expert> make_sentiment_expert(
    SentimentScorer scorer, std::shared_ptr<const prompts::TemplateLibrary> lib);

// N2I-Align expert: renders the technical prompt over alphas evaluated on
// the ticker's full price history, asks the backend, decodes the answer.
std::unique_ptr<Expert> make_technical_expert(
    std::shared_ptr<gateway::Gateway> gw,
    std::shared_ptr<const prompts::TemplateLibrary> lib,
    std::vector<alpha::AlphaDef> catalog,
    std::map<std::string, std::vector<PriceBar>> bars_by_ticker,
    int k_hist,
    double rescale_factor);

// Static lookup over a JSONL opinions file: {ticker, date, prediction,
// rationale}. Abstains when (ticker, date) is absent.
std::unique_ptr<Expert> make_human_expert(const std::string& opinions_path);

// Evaluate every expert on every sample. A sample where all experts abstain
// is kept with empty opinions and full abstention notes so downstream stages
// can skip it.
std::vector<PoolResult> run_pool(const std::vector<Sample>& samples,
                                 const std::vector<std::unique_ptr<Expert>>& experts);

}  // namespace mosaic::experts
