#include <fstream>

#include <json.hpp>

#include "mosaic/alpha.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/hash.hpp"

namespace mosaic::alpha {
namespace {

AlphaDef make_def(std::string name, std::string title, std::string formula,
                  std::string explanation) {
    AlphaDef d;
    d.name = std::move(name);
    d.title = std::move(title);
    d.formula_text = std::move(formula);
    d.explanation = std::move(explanation);
    d.formula = parse(d.formula_text);
    return d;
}

}  // namespace

const std::vector<AlphaDef>& builtin_catalog() {
    static const std::vector<AlphaDef> catalog = [] {
        std::vector<AlphaDef> c;
        c.push_back(make_def(
            "MV7", "MV7 - Moving Average of 7 Days", "ts_mean(close, 7)",
            "This Formula expression calculates the average closing price over the past 7 "
            "days, which helps to smooth out short-term volatility and identify the "
            "underlying trend in the price movement."));
        c.push_back(make_def(
            "MV20", "MV20 - Moving Average of 20 Days", "ts_mean(close, 20)",
            "Similar to MV7, this Formula expression computes the average closing price "
            "over a longer period of 20 days. This is often used to assess the medium-term "
            "market trend and can act as support or resistance levels for the price."));
        c.push_back(make_def(
            "MACD", "MACD - Moving Average Convergence Divergence",
            "minus(ewma(close, 12), ewma(close, 26))",
            "The MACD is a trend-following momentum indicator that shows the relationship "
            "between two moving averages of a security's price. The Formula expression "
            "represents the difference between the 12-day exponential moving average (EMA) "
            "and the 26-day EMA of the closing prices."));
        c.push_back(make_def(
            "EMA", "EMA - Exponential Moving Average", "ewma(close, com=0.5)",
            "This Formula expression calculates the exponential moving average of the "
            "closing prices, giving more weight to recent prices. The com parameter "
            "controls the degree of weighting decrease, making it a more sensitive measure "
            "of recent price movements."));
        // The printed middle-line formula is the 20-day stddev even though its
        // explanation describes a moving average; the formula wins here.
        c.push_back(make_def(
            "BollMid", "Bollinger Bands - Middle Line", "ts_stddev(close, 20)",
            "This Formula expression is the simple moving average of the closing price "
            "over the past 20 days. It serves as the middle line in Bollinger Bands and is "
            "used to determine the intermediate-term trend."));
        c.push_back(make_def(
            "BollUp", "Bollinger Bands - Upper Band",
            "plus(ts_mean(close, 20), times(ts_stddev(close, 20), 2))",
            "The upper band of the Bollinger Bands is calculated by adding two standard "
            "deviations to the 20-day moving average. This band adjusts for volatility and "
            "can signal overbought conditions when the price touches or breaches the upper "
            "band."));
        c.push_back(make_def(
            "BollLow", "Bollinger Bands - Lower Band",
            "minus(ts_mean(close, 20), times(ts_stddev(close, 20), 2))",
            "The lower band of the Bollinger Bands is calculated by subtracting two "
            "standard deviations from the 20-day moving average. It also adjusts for "
            "volatility and can signal oversold conditions when the price touches or "
            "breaches the lower band."));
        c.push_back(make_def(
            "LogMomentum", "LogMomentum", "log(minus(close, shift(close, 1)))",
            "This Formula expression calculates the natural logarithm of the difference "
            "between the current closing price and the previous day's closing price. It "
            "provides a measure of the momentum of the security's price by capturing the "
            "rate of change on a logarithmic scale."));
        c.push_back(make_def(
            "VMA60", "VMA60 - Volume Moving Average 60",
            "div(ts_mean(volume, 60), plus(volume, 1e-12))",
            "The VMA60 Formula expression calculates the average volume over a 60-day "
            "period and divides it by the current volume plus a small constant to prevent "
            "division by zero. It compares the current volume to the average volume over a "
            "longer period, which can signal changes in trader participation."));
        return c;
    }();
    return catalog;
}

std::vector<AlphaDef> load_catalog(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("alpha catalog " + path + ": " + e.what());
    }
    if (!j.is_array()) throw ParseError("alpha catalog must be a JSON array");

    std::vector<AlphaDef> defs;
    for (const auto& entry : j) {
        AlphaDef d;
        d.name = entry.at("name").get<std::string>();
        d.title = entry.value("title", d.name);
        d.formula_text = entry.at("formula").get<std::string>();
        d.explanation = entry.at("explanation").get<std::string>();
        d.formula = parse(d.formula_text);
        for (const auto& other : defs)
            if (other.name == d.name)
                throw IntegrityError("duplicate alpha name in catalog: " + d.name);
        defs.push_back(std::move(d));
    }
    return defs;
}

}  // namespace mosaic::alpha
