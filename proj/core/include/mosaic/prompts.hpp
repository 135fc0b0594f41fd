#pragma once

#include <string>
#include <vector>

#include "mosaic/alpha.hpp"
#include "mosaic/market_data.hpp"
#include "mosaic/opinion.hpp"

namespace mosaic::prompts {

enum class Kind { unsup_sentiment, sup_sentiment, technical, rearview, faithfulness };

const char* kind_name(Kind k);

struct RenderedPrompt {
    Kind kind;
    std::string text;
    std::string ticker;
    std::string target_date;  // ISO, empty for faithfulness
};

// Direction plus magnitude band for the rearview outcome sentence,
// e.g. "down by 1-2%". Bands are half-open on |pct_change|:
// [0,1) [1,2) [2,3) [3,5) and >= 5 percent.
struct MagnitudeBucket {
    bool up;
    std::string band;  // "0-1%", "1-2%", "2-3%", "3-5%", ">5%"

    std::string outcome_text() const { return (up ? "up by " : "down by ") + band; }
};

MagnitudeBucket bucket_from_pct(double pct_change);

// Template store. Compiled-in defaults match the shipped assets under
// core/assets/templates/; a directory of .tmpl files may override them.
class TemplateLibrary {
public:
    TemplateLibrary();  // defaults

    void load_dir(const std::string& dir);  // overrides from {kind}.tmpl files

    const std::string& body(Kind k) const;

private:
    std::string bodies_[5];
};

// "The stock price of MSFT will go up." / "... will go down."
std::string verbalize_label(const std::string& ticker, int label);

// One prompt per news item.
std::vector<RenderedPrompt> render_unsup_sentiment(const TemplateLibrary& lib,
                                                   const Sample& sample);

RenderedPrompt render_sup_sentiment(const TemplateLibrary& lib, const Sample& sample);

// N2I-Align technical prompt: per-alpha blocks with the last k_hist scaled
// values (undefined renders as "nan"), then the price-history question.
// Every series must be aligned to the sample window.
RenderedPrompt render_technical(const TemplateLibrary& lib,
                                const Sample& sample,
                                const std::vector<alpha::AlphaSeries>& series,
                                int k_hist);

RenderedPrompt render_rearview(const TemplateLibrary& lib,
                               const SampleRef& sample,
                               const std::vector<ExpertOpinion>& opinions,
                               int truth_label,
                               const MagnitudeBucket& bucket);

RenderedPrompt render_faithfulness(const TemplateLibrary& lib,
                                   const std::string& knowledge,
                                   const std::string& rationale);

}  // namespace mosaic::prompts
