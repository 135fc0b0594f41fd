#include "mosaic/experts.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "mosaic/errors.hpp"

namespace mosaic::experts {
namespace {

std::vector<std::string> words_of(const std::string& text) {
    std::vector<std::string> words;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!cur.empty()) {
            words.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(cur);
    return words;
}

bool is_up_word(const std::string& w) {
    static const char* kUp[] = {"up",  "rise", "rises", "rose",  "boost",  "increase",
                               "gain", "bullish", "higher", "positive", "climb"};
    return std::any_of(std::begin(kUp), std::end(kUp),
                       [&](const char* u) { return w == u; });
}

bool is_down_word(const std::string& w) {
    static const char* kDown[] = {"down", "drop", "drops", "fall",  "falls", "reduce",
                                  "decrease", "bearish", "lower", "negative", "decline"};
    return std::any_of(std::begin(kDown), std::end(kDown),
                       [&](const char* d) { return w == d; });
}

class SentimentExpert final : public Expert {
public:
    SentimentExpert(SentimentScorer scorer,
                    std::shared_ptr<const prompts::TemplateLibrary> lib)
        : scorer_(std::move(scorer)), lib_(std::move(lib)) {}

    std::string id() const override { return "sentiment"; }

    std::optional<ExpertOpinion> evaluate(const Sample& sample) override {
        std::vector<SentimentScore> scores;
        scores.reserve(sample.news.size());
        for (const NewsItem& item : sample.news) scores.push_back(scorer_(item));
        auto prediction = aggregate_sentiment(scores);
        if (!prediction) return std::nullopt;

        ExpertOpinion op;
        op.expert_id = id();
        op.input_text = prompts::render_sup_sentiment(*lib_, sample).text;
        op.prediction = *prediction;
        return op;
    }

private:
    SentimentScorer scorer_;
    std::shared_ptr<const prompts::TemplateLibrary> lib_;
};

class TechnicalExpert final : public Expert {
public:
    TechnicalExpert(std::shared_ptr<gateway::Gateway> gw,
                    std::shared_ptr<const prompts::TemplateLibrary> lib,
                    std::vector<alpha::AlphaDef> catalog,
                    std::map<std::string, std::vector<PriceBar>> bars,
                    int k_hist, double rescale_factor)
        : gw_(std::move(gw)),
          lib_(std::move(lib)),
          catalog_(std::move(catalog)),
          bars_(std::move(bars)),
          k_hist_(k_hist),
          rescale_factor_(rescale_factor) {}

    std::string id() const override { return "technical"; }

    std::optional<ExpertOpinion> evaluate(const Sample& sample) override {
        auto it = bars_.find(sample.ticker);
        if (it == bars_.end())
            throw ExpertError("technical expert: no price history for " + sample.ticker);
        const auto& bars = it->second;

        // evaluate each alpha over all history before the target date, then
        // slice the window-aligned tail so warm-up uses the full series
        auto past_end = std::find_if(bars.begin(), bars.end(), [&](const PriceBar& b) {
            return b.date >= sample.target_date;
        });
        std::vector<PriceBar> history(bars.begin(), past_end);
        const std::size_t T = sample.window.size();
        if (history.size() < T)
            throw ExpertError("technical expert: history shorter than sample window");

        std::vector<alpha::AlphaSeries> series;
        for (const auto& def : catalog_) {
            alpha::AlphaSeries full = alpha::evaluate_alpha(def, history, rescale_factor_);
            alpha::AlphaSeries sliced;
            sliced.def = def;
            sliced.values.assign(full.values.end() - T, full.values.end());
            sliced.scaled.assign(full.scaled.end() - T, full.scaled.end());
            series.push_back(std::move(sliced));
        }

        auto prompt = prompts::render_technical(*lib_, sample, series, k_hist_);
        gateway::CompletionRequest req;
        req.messages = {{"user", prompt.text}};
        req.temperature = 0.0;

        std::string answer;
        try {
            answer = gw_->complete(req).text;
        } catch (const Error& e) {
            throw ExpertError(std::string("technical expert backend failure: ") + e.what());
        }

        ExpertOpinion op;
        op.expert_id = id();
        op.input_text = prompt.text;
        op.prediction = answer_to_prediction(answer, sample.window.back().adj_close);
        op.rationale = answer;
        return op;
    }

private:
    std::shared_ptr<gateway::Gateway> gw_;
    std::shared_ptr<const prompts::TemplateLibrary> lib_;
    std::vector<alpha::AlphaDef> catalog_;
    std::map<std::string, std::vector<PriceBar>> bars_;
    int k_hist_;
    double rescale_factor_;
};

class HumanExpert final : public Expert {
public:
    explicit HumanExpert(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw Error("human opinions file not found: " + path);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
            }
            Entry e;
            e.prediction = j.at("prediction").get<int>();
            e.rationale = j.value("rationale", "");
            if (e.prediction != 0 && e.prediction != 1)
                throw IntegrityError(path + ":" + std::to_string(lineno) +
                                     ": prediction must be 0 or 1");
            opinions_[{j.at("ticker").get<std::string>(),
                       j.at("date").get<std::string>()}] = std::move(e);
        }
    }

    std::string id() const override { return "human"; }

    std::optional<ExpertOpinion> evaluate(const Sample& sample) override {
        auto it = opinions_.find({sample.ticker, sample.target_date.to_iso()});
        if (it == opinions_.end()) return std::nullopt;
        ExpertOpinion op;
        op.expert_id = id();
        op.input_text = it->second.rationale.empty()
                            ? "Analyst call for " + sample.ticker + " on " +
                                  sample.target_date.to_iso() + "."
                            : it->second.rationale;
        op.prediction = it->second.prediction;
        if (!it->second.rationale.empty()) op.rationale = it->second.rationale;
        return op;
    }

private:
    struct Entry {
        int prediction;
        std::string rationale;
    };
    std::map<std::pair<std::string, std::string>, Entry> opinions_;
};

}  // namespace

std::optional<int> aggregate_sentiment(const std::vector<SentimentScore>& scores) {
    if (scores.empty()) return std::nullopt;
    double sum = 0;
    for (SentimentScore s : scores) sum += static_cast<int>(s);
    double mean = sum / static_cast<double>(scores.size());
    if (mean > 0) return 1;
    if (mean < 0) return 0;
    return 1;  // tie maps up, mirroring the >= labeling rule
}

SentimentScorer make_lexicon_scorer(const std::string& lexicon_path) {
    std::ifstream in(lexicon_path);
    if (!in) throw Error("lexicon file not found: " + lexicon_path);
    auto lexicon = std::make_shared<std::map<std::string, int>>();
    std::string word;
    int score;
    while (in >> word >> score) {
        if (score < -1 || score > 1)
            throw IntegrityError("lexicon score out of {-1,0,1}: " + word);
        (*lexicon)[word] = score;
    }
    return [lexicon](const NewsItem& item) {
        int sum = 0;
        for (const std::string& w : words_of(item.text)) {
            auto it = lexicon->find(w);
            if (it != lexicon->end()) sum += it->second;
        }
        return sum > 0 ? SentimentScore::positive
               : sum < 0 ? SentimentScore::negative
                         : SentimentScore::neutral;
    };
}

SentimentScorer make_llm_scorer(std::shared_ptr<gateway::Gateway> gw,
                                std::shared_ptr<const prompts::TemplateLibrary> lib) {
    return [gw, lib](const NewsItem& item) {
        Sample one;
        one.ticker = item.ticker;
        one.news = {item};
        auto rendered = prompts::render_unsup_sentiment(*lib, one);
        gateway::CompletionRequest req;
        req.messages = {{"user", rendered.front().text}};
        req.temperature = 0.0;
        std::string answer = gw->complete(req).text;
        std::string head;
        for (char c : answer) {
            if (std::isalpha(static_cast<unsigned char>(c)))
                head += static_cast<char>(std::tolower(c));
            else if (!head.empty())
                break;
        }
        if (head == "positive") return SentimentScore::positive;
        if (head == "negative") return SentimentScore::negative;
        if (head == "neutral") return SentimentScore::neutral;
        throw AnswerParseError("sentiment scorer: unrecognized answer: " + answer);
    };
}

int answer_to_prediction(const std::string& text, std::optional<double> last_price) {
    auto words = words_of(text);
    int up = 0, down = 0;
    for (const auto& w : words) {
        if (is_up_word(w)) ++up;
        if (is_down_word(w)) ++down;
    }
    if (up > 0 && down == 0) return 1;
    if (down > 0 && up == 0) return 0;

    if (last_price) {
        // numeric completion: take the last number in the answer
        static const std::regex number_re(R"(\d+(\.\d+)?)");
        std::optional<double> value;
        for (auto it = std::sregex_iterator(text.begin(), text.end(), number_re);
             it != std::sregex_iterator(); ++it)
            value = std::stod(it->str());
        if (value) return *value >= *last_price ? 1 : 0;
    }
    throw AnswerParseError("no direction signal in answer: " + text.substr(0, 60));
}

std::unique_ptr<Expert> make_sentiment_expert(
    SentimentScorer scorer, std::shared_ptr<const prompts::TemplateLibrary> lib) {
    return std::make_unique<SentimentExpert>(std::move(scorer), std::move(lib));
}

std::unique_ptr<Expert> make_technical_expert(
    std::shared_ptr<gateway::Gateway> gw,
    std::shared_ptr<const prompts::TemplateLibrary> lib,
    std::vector<alpha::AlphaDef> catalog,
    std::map<std::string, std::vector<PriceBar>> bars_by_ticker,
    int k_hist, double rescale_factor) {
    return std::make_unique<TechnicalExpert>(std::move(gw), std::move(lib),
                                             std::move(catalog), std::move(bars_by_ticker),
                                             k_hist, rescale_factor);
}

std::unique_ptr<Expert> make_human_expert(const std::string& opinions_path) {
    return std::make_unique<HumanExpert>(opinions_path);
}

std::vector<PoolResult> run_pool(const std::vector<Sample>& samples,
                                 const std::vector<std::unique_ptr<Expert>>& experts) {
    if (experts.empty()) throw ConfigError("run_pool requires at least one expert");

    std::vector<PoolResult> results;
    results.reserve(samples.size());
    for (const Sample& s : samples) {
        PoolResult pr;
        pr.sample = {s.ticker, s.target_date.to_iso()};
        pr.label = s.label;
        pr.pct_change = s.pct_change;
        for (const auto& expert : experts) {
            auto op = expert->evaluate(s);
            if (op)
                pr.opinions.push_back(std::move(*op));
            else
                pr.abstentions.push_back(expert->id());
        }
        results.push_back(std::move(pr));
    }
    return results;
}

}  // namespace mosaic::experts
