#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mosaic/date.hpp"

namespace mosaic {

struct PriceBar {
    Date date;
    double open = 0;
    double high = 0;
    double low = 0;
    double close = 0;
    double adj_close = 0;
    std::int64_t volume = 0;
};

struct NewsItem {
    Date date;
    std::string ticker;
    std::string text;
};

// One labeled prediction instance: predict the movement at target_date from
// the T trading days before it.
struct Sample {
    std::string ticker;
    Date target_date;
    std::vector<PriceBar> window;  // length T, dates strictly before target_date
    std::vector<NewsItem> news;    // items whose date falls in the window span
    int label = 0;                 // 0 = down, 1 = up
    double pct_change = 0;         // (adj_close_d - adj_close_{d-1}) / adj_close_{d-1}
};

struct SplitSpec {
    DateRange train;
    DateRange val;
    DateRange test;

    void validate() const;  // throws ConfigError on overlap / disorder
};

struct SplitResult {
    std::vector<Sample> train;
    std::vector<Sample> val;
    std::vector<Sample> test;
};

// Yahoo-Finance-style CSV: Date,Open,High,Low,Close,Adj Close,Volume.
// Bars returned sorted ascending; duplicate or non-monotonic dates rejected.
std::vector<PriceBar> ingest_prices(const std::string& path, const std::string& ticker);

// News file: one JSON object per line with fields date, ticker, text.
std::vector<NewsItem> ingest_news(const std::string& path);

// 1 iff p_today >= p_prev, else 0. Prices must be positive.
int movement_label(double p_today, double p_prev);

// Rolling-window sample generation with dead-band filtering:
// pct_change >= pos_thr -> label 1, pct_change <= -neg_thr -> label 0,
// anything in between is dropped. Windows count trading days.
std::vector<Sample> generate_samples(const std::string& ticker,
                                     const std::vector<PriceBar>& bars,
                                     const std::vector<NewsItem>& news,
                                     std::size_t window,
                                     double pos_thr,
                                     double neg_thr);

// Assign samples to splits by target_date; samples outside all ranges are
// discarded.
SplitResult split_samples(const std::vector<Sample>& samples, const SplitSpec& spec);

}  // namespace mosaic
