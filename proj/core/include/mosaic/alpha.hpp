#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mosaic/market_data.hpp"

namespace mosaic::alpha {

// Formula AST. Expressions are immutable once parsed and shareable across
// threads.
struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class Field { open, high, low, close, volume };

struct Expr {
    enum class Kind { field, literal, call };

    Kind kind;
    Field field{};                       // kind == field
    double literal{};                    // kind == literal
    std::string func;                    // kind == call
    std::vector<ExprPtr> args;           // positional
    std::map<std::string, ExprPtr> named;  // named args, e.g. com=0.5
};

// Parse a formula like "minus(ewma(close, 12), ewma(close, 26))".
// Throws ParseError with a character position on malformed input,
// unknown functions, or wrong arity.
ExprPtr parse(const std::string& text);

// Canonical rendering; parse(render(parse(s))) == parse(s).
std::string render(const Expr& e);

bool equal(const Expr& a, const Expr& b);

using OptSeries = std::vector<std::optional<double>>;

// Evaluate elementwise over the bar series. Rolling windows are undefined
// until full; undefined operands propagate; log of a non-positive value and
// division by zero are undefined.
OptSeries eval(const Expr& e, const std::vector<PriceBar>& bars);

// round(value * factor), half away from zero; undefined stays undefined.
// Throws DomainError when |scaled| exceeds max_digits decimal digits.
std::vector<std::optional<long long>> rescale(const OptSeries& values,
                                              double factor,
                                              int max_digits = 9);

struct AlphaDef {
    std::string name;          // short identifier, e.g. "MV7"
    std::string title;         // display form, e.g. "MV7 - Moving Average of 7 Days"
    std::string formula_text;  // canonical DSL form
    std::string explanation;
    ExprPtr formula;
};

struct AlphaSeries {
    AlphaDef def;
    OptSeries values;
    std::vector<std::optional<long long>> scaled;
};

// The nine built-in alphas: MV7, MV20, MACD, EMA, Bollinger middle/upper/
// lower, LogMomentum, VMA60.
const std::vector<AlphaDef>& builtin_catalog();

// Load a catalog from a JSON file: [{name, formula, explanation}, ...].
std::vector<AlphaDef> load_catalog(const std::string& path);

AlphaSeries evaluate_alpha(const AlphaDef& def,
                           const std::vector<PriceBar>& bars,
                           double rescale_factor);

}  // namespace mosaic::alpha
