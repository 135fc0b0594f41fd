#include "mosaic/prompts.hpp"

#include <cctype>
#include <cmath>
#include <filesystem>
#include <map>

#include "mosaic/errors.hpp"
#include "mosaic/hash.hpp"

namespace mosaic::prompts {
namespace {

constexpr const char* kSlotOpen = "{{";
constexpr const char* kSlotClose = "}}";

const char* kUnsupSentiment =
    "Instruction: What is the sentiment of this news/tweet?\n"
    "Please choose an answer from {Negative/Neutral/Positive}.\n"
    "Input: {{text}}\n"
    "Answer:\n";

const char* kSupSentiment =
    "Instruction: Predict the {{ticker}}'s price movement for the {{target_date}} based "
    "on the sentiment of the following tweets.\n"
    "Please choose an answer from up or down.\n"
    "Input: From {{window_first}} to {{window_last}}, company related news during this "
    "period are listed below:\n"
    "{{news_lines}}Answer:\n";

const char* kTechnical =
    "[Instruction]:\n"
    "You are a seasoned stock market analyst expert in predicting future price trends "
    "based on historical stock factors.\n"
    "[Stock Factors]:\n"
    "From {{window_first}} to {{window_last}}, some recent basic stock factors are "
    "presented below:\n"
    "{{alpha_blocks}}[Analysis]:\n"
    "The historical price for {{ticker}} from {{hist_first}} to {{hist_last}} is "
    "{{hist_prices}}. Please predict the {{ticker}}'s price for the {{target_date}} "
    "based on all above information.\n"
    "Answer:\n";

const char* kRearview =
    "[Instruction]:\n"
    "You are a seasoned stock market analyst. Your task is to list the bullish or "
    "bearish rationales for companies based on relevant news and basic financials from "
    "the past weeks, then provide an analysis and prediction for the companies' stock "
    "price movement for the upcoming week. Your answer format should be as follow:\n"
    "Bullish Rationales:\n"
    "  - Rationale 1\n"
    "  - Rationale 2\n"
    "  - ...\n"
    "Bearish Rationales:\n"
    "  - Rationale 1\n"
    "  - Rationale 2\n"
    "  - ...\n"
    "Prediction:\n"
    "  - Your prediction here in less than 100 words.\n"
    "{{expert_blocks}}[Analysis]:\n"
    "Assume your prediction for {{ticker}} in {{target_date}} is {{outcome}}, generate "
    "the rationales based on all the information before {{target_date}} to justifies "
    "your prediction, ensuring that the prediction itself does not serve as a basis for "
    "the analysis but as a reasoned outcome of it. Please note that the generated "
    "rationale should present in or can be inferred from any one given information or "
    "combination of multiple given information. Then, conclude with a short prediction "
    "(less than 100 words) to decide the price movement prediction.\n";

const char* kFaithfulness =
    "[Instruction]: You will be given a yes/no question regarding if a rationale is "
    "either present or can be inferred from the given information. Your task is to "
    "answer yes or no and tell me why based on given information given and guidelines "
    "below.\n"
    "Answer yes if:\n"
    "The rationale is present in any one given information or combination of multiple "
    "given information.\n"
    "The rationale can be inferred from any one given information or combination of "
    "given information.\n"
    "The rationale is more general than the rationales in the given information, and it "
    "can be obtained by simplifying the rationales in the given information.\n"
    "If rationale in question is supported by at least one given information or follows "
    "any of the above or a combination of above conditions answer will be yes, even if "
    "other given information contradict it.\n"
    "Answer no if:\n"
    "The rationale is not present in any of the given information individually or "
    "combined, or it cannot be clearly inferred from any of the given information "
    "individually or combined.\n"
    "The rationale is more specific than the rationales in any of the given "
    "information.\n"
    "The rationale is contradictory to the rationales in all the given information i.e. "
    "there is no given information which supports the rationale.\n"
    "If rationale in question contains some topic which are neither present nor "
    "inferred from any of the given information, then answer no to the question.\n"
    "[Knowledge]: {{knowledge}}\n"
    "[Rationale]: {{rationale}}\n"
    "Answer:\n";

std::string substitute(const std::string& tmpl,
                       const std::map<std::string, std::string>& slots) {
    std::string out;
    std::size_t pos = 0;
    while (true) {
        std::size_t open = tmpl.find(kSlotOpen, pos);
        if (open == std::string::npos) {
            out += tmpl.substr(pos);
            break;
        }
        out += tmpl.substr(pos, open - pos);
        std::size_t close = tmpl.find(kSlotClose, open);
        if (close == std::string::npos)
            throw IntegrityError("unterminated slot in template");
        std::string name = tmpl.substr(open + 2, close - open - 2);
        auto it = slots.find(name);
        if (it == slots.end())
            throw IntegrityError("template references unknown slot '" + name + "'");
        out += it->second;
        pos = close + 2;
    }
    if (out.find(kSlotOpen) != std::string::npos)
        throw IntegrityError("rendered prompt still contains a slot marker");
    return out;
}

std::string expert_display_name(const std::string& expert_id) {
    std::string name = expert_id;
    if (!name.empty()) name[0] = static_cast<char>(std::toupper(name[0]));
    return name + " Expert";
}

std::string scaled_csv(const std::vector<std::optional<long long>>& scaled,
                       std::size_t k) {
    // last k entries, comma-separated without spaces; undefined renders "nan"
    std::string out;
    std::size_t start = scaled.size() > k ? scaled.size() - k : 0;
    for (std::size_t i = start; i < scaled.size(); ++i) {
        if (i > start) out += ",";
        out += scaled[i] ? std::to_string(*scaled[i]) : "nan";
    }
    return out;
}

}  // namespace

const char* kind_name(Kind k) {
    switch (k) {
        case Kind::unsup_sentiment: return "unsup_sentiment";
        case Kind::sup_sentiment: return "sup_sentiment";
        case Kind::technical: return "technical";
        case Kind::rearview: return "rearview";
        case Kind::faithfulness: return "faithfulness";
    }
    return "?";
}

MagnitudeBucket bucket_from_pct(double pct_change) {
    MagnitudeBucket b;
    b.up = pct_change >= 0;  // zero maps up, mirroring the >= labeling rule
    double mag = std::abs(pct_change) * 100.0;
    if (mag < 1)
        b.band = "0-1%";
    else if (mag < 2)
        b.band = "1-2%";
    else if (mag < 3)
        b.band = "2-3%";
    else if (mag < 5)
        b.band = "3-5%";
    else
        b.band = ">5%";
    return b;
}

TemplateLibrary::TemplateLibrary() {
    bodies_[static_cast<int>(Kind::unsup_sentiment)] = kUnsupSentiment;
    bodies_[static_cast<int>(Kind::sup_sentiment)] = kSupSentiment;
    bodies_[static_cast<int>(Kind::technical)] = kTechnical;
    bodies_[static_cast<int>(Kind::rearview)] = kRearview;
    bodies_[static_cast<int>(Kind::faithfulness)] = kFaithfulness;
}

void TemplateLibrary::load_dir(const std::string& dir) {
    for (int i = 0; i < 5; ++i) {
        auto path = std::filesystem::path(dir) /
                    (std::string(kind_name(static_cast<Kind>(i))) + ".tmpl");
        if (std::filesystem::exists(path)) bodies_[i] = read_file(path.string());
    }
}

const std::string& TemplateLibrary::body(Kind k) const {
    return bodies_[static_cast<int>(k)];
}

std::string verbalize_label(const std::string& ticker, int label) {
    return "The stock price of " + ticker + " will go " + (label == 1 ? "up" : "down") + ".";
}

std::vector<RenderedPrompt> render_unsup_sentiment(const TemplateLibrary& lib,
                                                   const Sample& sample) {
    std::vector<RenderedPrompt> out;
    for (const NewsItem& item : sample.news) {
        RenderedPrompt p;
        p.kind = Kind::unsup_sentiment;
        p.ticker = sample.ticker;
        p.target_date = sample.target_date.to_iso();
        p.text = substitute(lib.body(Kind::unsup_sentiment), {{"text", item.text}});
        out.push_back(std::move(p));
    }
    return out;
}

RenderedPrompt render_sup_sentiment(const TemplateLibrary& lib, const Sample& sample) {
    if (sample.window.empty()) throw IntegrityError("sample window is empty");
    std::string news_lines;
    for (const NewsItem& item : sample.news)
        news_lines += item.date.to_iso() + ": " + item.text + "\n";

    RenderedPrompt p;
    p.kind = Kind::sup_sentiment;
    p.ticker = sample.ticker;
    p.target_date = sample.target_date.to_iso();
    p.text = substitute(lib.body(Kind::sup_sentiment),
                        {{"ticker", sample.ticker},
                         {"target_date", p.target_date},
                         {"window_first", sample.window.front().date.to_iso()},
                         {"window_last", sample.window.back().date.to_iso()},
                         {"news_lines", news_lines}});
    return p;
}

RenderedPrompt render_technical(const TemplateLibrary& lib,
                                const Sample& sample,
                                const std::vector<alpha::AlphaSeries>& series,
                                int k_hist) {
    if (k_hist < 1) throw ConfigError("k_hist must be >= 1");
    if (sample.window.empty()) throw IntegrityError("sample window is empty");
    const std::size_t T = sample.window.size();
    for (const auto& s : series)
        if (s.scaled.size() != T)
            throw IntegrityError("alpha series '" + s.def.name +
                                 "' is not aligned to the sample window");

    std::string blocks;
    for (const auto& s : series) {
        blocks += "Alpha: " + s.def.title + "\n";
        blocks += "Formula: " + s.def.formula_text + "\n";
        blocks += "Explanation: " + s.def.explanation + "\n";
        blocks += "Historical Values: " + scaled_csv(s.scaled, k_hist) + "\n";
    }

    // price history shown over the same last-k_hist window days
    std::size_t k = std::min<std::size_t>(k_hist, T);
    std::size_t start = T - k;
    std::string prices;
    for (std::size_t i = start; i < T; ++i) {
        if (i > start) prices += ",";
        prices += std::to_string(
            static_cast<long long>(std::round(sample.window[i].adj_close * 100)));
    }

    RenderedPrompt p;
    p.kind = Kind::technical;
    p.ticker = sample.ticker;
    p.target_date = sample.target_date.to_iso();
    p.text = substitute(lib.body(Kind::technical),
                        {{"ticker", sample.ticker},
                         {"target_date", p.target_date},
                         {"window_first", sample.window.front().date.to_iso()},
                         {"window_last", sample.window.back().date.to_iso()},
                         {"alpha_blocks", blocks},
                         {"hist_first", sample.window[start].date.to_iso()},
                         {"hist_last", sample.window.back().date.to_iso()},
                         {"hist_prices", prices}});
    return p;
}

RenderedPrompt render_rearview(const TemplateLibrary& lib,
                               const SampleRef& sample,
                               const std::vector<ExpertOpinion>& opinions,
                               int truth_label,
                               const MagnitudeBucket& bucket) {
    if (opinions.empty()) throw IntegrityError("rearview prompt needs >= 1 expert opinion");
    if (truth_label != 0 && truth_label != 1)
        throw IntegrityError("rearview prompt needs a ground-truth label");
    if (bucket.up != (truth_label == 1))
        throw IntegrityError("magnitude bucket direction disagrees with label");

    std::string blocks;
    for (const ExpertOpinion& op : opinions) {
        std::string name = expert_display_name(op.expert_id);
        blocks += "[" + name + " Input]:\n" + op.input_text;
        if (blocks.back() != '\n') blocks += "\n";
        blocks += "[" + name + " Prediction]: " + (op.prediction == 1 ? "Up" : "Down") + "\n";
    }

    RenderedPrompt p;
    p.kind = Kind::rearview;
    p.ticker = sample.ticker;
    p.target_date = sample.target_date;
    p.text = substitute(lib.body(Kind::rearview),
                        {{"ticker", sample.ticker},
                         {"target_date", p.target_date},
                         {"expert_blocks", blocks},
                         {"outcome", bucket.outcome_text()}});
    return p;
}

RenderedPrompt render_faithfulness(const TemplateLibrary& lib,
                                   const std::string& knowledge,
                                   const std::string& rationale) {
    if (knowledge.empty()) throw IntegrityError("faithfulness prompt: empty knowledge");
    if (rationale.empty()) throw IntegrityError("faithfulness prompt: empty rationale");
    RenderedPrompt p;
    p.kind = Kind::faithfulness;
    p.text = substitute(lib.body(Kind::faithfulness),
                        {{"knowledge", knowledge}, {"rationale", rationale}});
    return p;
}

}  // namespace mosaic::prompts
