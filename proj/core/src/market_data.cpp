#include "mosaic/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mosaic/errors.hpp"

namespace mosaic {
namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_price(const std::string& s, const std::string& path, std::size_t lineno) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(path + ":" + std::to_string(lineno) +
                         ": malformed numeric field '" + s + "'");
    }
}

}  // namespace

void SplitSpec::validate() const {
    if (train.last < train.first || val.last < val.first || test.last < test.first)
        throw ConfigError("split range has last < first");
    if (train.overlaps(val) || train.overlaps(test) || val.overlaps(test))
        throw ConfigError("split ranges overlap");
    if (!(train.last < val.first && val.last < test.first))
        throw ConfigError("split ranges out of chronological order");
}

std::vector<PriceBar> ingest_prices(const std::string& path, const std::string& ticker) {
    std::ifstream in(path);
    if (!in) throw Error("price file not found: " + path);

    std::string line;
    if (!std::getline(in, line))
        throw ParseError(path + ": empty price file");

    std::vector<PriceBar> bars;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto f = split_csv_row(line);
        if (f.size() != 7)
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": expected 7 columns, got " + std::to_string(f.size()));
        PriceBar bar;
        try {
            bar.date = Date::parse_iso(f[0]);
        } catch (const ParseError&) {
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": malformed date '" + f[0] + "'");
        }
        bar.open = parse_price(f[1], path, lineno);
        bar.high = parse_price(f[2], path, lineno);
        bar.low = parse_price(f[3], path, lineno);
        bar.close = parse_price(f[4], path, lineno);
        bar.adj_close = parse_price(f[5], path, lineno);
        double vol = parse_price(f[6], path, lineno);
        if (vol < 0)
            throw IntegrityError(path + ":" + std::to_string(lineno) + ": negative volume");
        bar.volume = static_cast<std::int64_t>(vol);
        if (bar.adj_close <= 0)
            throw IntegrityError(path + ":" + std::to_string(lineno) +
                                 ": non-positive adjusted close");
        bars.push_back(bar);
    }

    std::stable_sort(bars.begin(), bars.end(),
                     [](const PriceBar& a, const PriceBar& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < bars.size(); ++i) {
        if (bars[i].date == bars[i - 1].date)
            throw IntegrityError(path + ": duplicate date " + bars[i].date.to_iso() +
                                 " for ticker " + ticker);
    }
    return bars;
}

std::vector<NewsItem> ingest_news(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("news file not found: " + path);

    std::vector<NewsItem> items;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!j.contains("date") || !j.contains("ticker") || !j.contains("text"))
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": record needs date, ticker, text");
        NewsItem item;
        item.date = Date::parse_iso(j["date"].get<std::string>());
        item.ticker = j["ticker"].get<std::string>();
        item.text = j["text"].get<std::string>();
        auto first = item.text.find_first_not_of(" \t\r\n");
        if (first == std::string::npos)
            throw ParseError(path + ":" + std::to_string(lineno) + ": empty news text");
        items.push_back(std::move(item));
    }
    std::stable_sort(items.begin(), items.end(),
                     [](const NewsItem& a, const NewsItem& b) { return a.date < b.date; });
    return items;
}

int movement_label(double p_today, double p_prev) {
    if (p_today <= 0 || p_prev <= 0)
        throw DomainError("movement_label requires positive prices");
    return p_today >= p_prev ? 1 : 0;
}

std::vector<Sample> generate_samples(const std::string& ticker,
                                     const std::vector<PriceBar>& bars,
                                     const std::vector<NewsItem>& news,
                                     std::size_t window,
                                     double pos_thr,
                                     double neg_thr) {
    if (window < 1) throw ConfigError("window length must be >= 1");
    if (pos_thr < 0 || neg_thr < 0) throw ConfigError("thresholds must be non-negative");

    std::vector<Sample> samples;
    if (bars.size() < window + 1) return samples;

    for (std::size_t i = window; i < bars.size(); ++i) {
        const PriceBar& target = bars[i];
        const PriceBar& prev = bars[i - 1];
        double pct = (target.adj_close - prev.adj_close) / prev.adj_close;

        int label;
        if (pct >= pos_thr)
            label = 1;
        else if (pct <= -neg_thr)
            label = 0;
        else
            continue;  // dead band

        Sample s;
        s.ticker = ticker;
        s.target_date = target.date;
        s.window.assign(bars.begin() + (i - window), bars.begin() + i);
        s.label = label;
        s.pct_change = pct;

        // After-hours news attaches to the next trading day: an item dated on
        // a non-trading day counts toward the first later trading date in the
        // series. Items predating the whole price history are out of scope.
        const Date wfirst = s.window.front().date;
        const Date wlast = s.window.back().date;
        for (const NewsItem& item : news) {
            if (item.date > wlast) break;
            if (!item.ticker.empty() && item.ticker != ticker) continue;
            Date effective = item.date;
            bool trading_day = std::any_of(
                bars.begin(), bars.end(),
                [&](const PriceBar& b) { return b.date == effective; });
            if (!trading_day) {
                if (effective < bars.front().date) continue;
                auto it = std::find_if(bars.begin(), bars.end(),
                                       [&](const PriceBar& b) { return b.date > effective; });
                if (it == bars.end()) continue;
                effective = it->date;
            }
            if (effective < wfirst || effective > wlast) continue;
            s.news.push_back(item);
        }
        samples.push_back(std::move(s));
    }
    return samples;
}

SplitResult split_samples(const std::vector<Sample>& samples, const SplitSpec& spec) {
    spec.validate();
    SplitResult r;
    for (const Sample& s : samples) {
        if (spec.train.contains(s.target_date))
            r.train.push_back(s);
        else if (spec.val.contains(s.target_date))
            r.val.push_back(s);
        else if (spec.test.contains(s.target_date))
            r.test.push_back(s);
    }
    return r;
}

}  // namespace mosaic
