#include <cmath>

#include "mosaic/alpha.hpp"
#include "mosaic/errors.hpp"

namespace mosaic::alpha {
namespace {

double bar_field(const PriceBar& b, Field f) {
    switch (f) {
        case Field::open: return b.open;
        case Field::high: return b.high;
        case Field::low: return b.low;
        case Field::close: return b.close;
        case Field::volume: return static_cast<double>(b.volume);
    }
    return 0;
}

long window_literal(const Expr& e, const char* func) {
    if (e.kind != Expr::Kind::literal)
        throw DomainError(std::string(func) + ": window argument must be a numeric literal");
    double v = e.literal;
    if (v < 1 || v != std::floor(v))
        throw DomainError(std::string(func) + ": window must be a positive integer");
    return static_cast<long>(v);
}

OptSeries rolling(const OptSeries& x, long w, bool stddev) {
    OptSeries out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i + 1 < static_cast<std::size_t>(w)) continue;
        double sum = 0, sumsq = 0;
        bool ok = true;
        for (long j = 0; j < w; ++j) {
            const auto& v = x[i - j];
            if (!v) {
                ok = false;
                break;
            }
            sum += *v;
            sumsq += *v * *v;
        }
        if (!ok) continue;
        if (!stddev) {
            out[i] = sum / w;
        } else {
            if (w < 2) continue;  // sample stddev needs n >= 2
            double mean = sum / w;
            double var = (sumsq - w * mean * mean) / (w - 1);
            out[i] = std::sqrt(var < 0 ? 0 : var);
        }
    }
    return out;
}

// Adjusted EWMA with decaying weights; undefined inputs keep their position
// (weights still advance) but produce undefined outputs.
OptSeries ewma(const OptSeries& x, double alpha) {
    OptSeries out(x.size());
    double num = 0, den = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num *= 1 - alpha;
        den *= 1 - alpha;
        if (x[i]) {
            num += *x[i];
            den += 1;
            out[i] = num / den;
        }
    }
    return out;
}

OptSeries pointwise2(const OptSeries& a, const OptSeries& b, char op) {
    OptSeries out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i] || !b[i]) continue;
        double x = *a[i], y = *b[i];
        switch (op) {
            case '+': out[i] = x + y; break;
            case '-': out[i] = x - y; break;
            case '*': out[i] = x * y; break;
            case '/':
                if (y != 0) out[i] = x / y;
                break;
        }
    }
    return out;
}

OptSeries eval_impl(const Expr& e, const std::vector<PriceBar>& bars) {
    const std::size_t n = bars.size();
    switch (e.kind) {
        case Expr::Kind::field: {
            OptSeries out(n);
            for (std::size_t i = 0; i < n; ++i) out[i] = bar_field(bars[i], e.field);
            return out;
        }
        case Expr::Kind::literal:
            return OptSeries(n, e.literal);
        case Expr::Kind::call:
            break;
    }

    const std::string& f = e.func;
    if (f == "ts_mean" || f == "ts_stddev") {
        OptSeries x = eval_impl(*e.args[0], bars);
        long w = window_literal(*e.args[1], f.c_str());
        return rolling(x, w, f == "ts_stddev");
    }
    if (f == "ewma") {
        OptSeries x = eval_impl(*e.args[0], bars);
        double a;
        if (auto it = e.named.find("com"); it != e.named.end()) {
            if (it->second->kind != Expr::Kind::literal)
                throw DomainError("ewma: com must be a numeric literal");
            double com = it->second->literal;
            if (com < 0) throw DomainError("ewma: com must be >= 0");
            a = 1.0 / (1.0 + com);
        } else {
            if (e.args[1]->kind != Expr::Kind::literal)
                throw DomainError("ewma: span must be a numeric literal");
            double span = e.args[1]->literal;
            if (span < 1) throw DomainError("ewma: span must be >= 1");
            a = 2.0 / (span + 1.0);
        }
        return ewma(x, a);
    }
    if (f == "shift") {
        OptSeries x = eval_impl(*e.args[0], bars);
        long k = window_literal(*e.args[1], "shift");
        OptSeries out(n);
        for (std::size_t i = static_cast<std::size_t>(k); i < n; ++i) out[i] = x[i - k];
        return out;
    }
    if (f == "log") {
        OptSeries x = eval_impl(*e.args[0], bars);
        OptSeries out(n);
        for (std::size_t i = 0; i < n; ++i)
            if (x[i] && *x[i] > 0) out[i] = std::log(*x[i]);
        return out;
    }
    if (f == "plus" || f == "minus" || f == "times" || f == "div") {
        OptSeries a = eval_impl(*e.args[0], bars);
        OptSeries b = eval_impl(*e.args[1], bars);
        char op = f == "plus" ? '+' : f == "minus" ? '-' : f == "times" ? '*' : '/';
        return pointwise2(a, b, op);
    }
    throw DomainError("unsupported function: " + f);
}

}  // namespace

OptSeries eval(const Expr& e, const std::vector<PriceBar>& bars) {
    if (bars.empty()) throw DomainError("eval requires a non-empty bar series");
    return eval_impl(e, bars);
}

std::vector<std::optional<long long>> rescale(const OptSeries& values,
                                              double factor,
                                              int max_digits) {
    if (factor <= 0) throw DomainError("rescale factor must be positive");
    double limit = std::pow(10.0, max_digits);
    std::vector<std::optional<long long>> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!values[i]) continue;
        double scaled = std::round(*values[i] * factor);  // half away from zero
        if (std::abs(scaled) >= limit)
            throw DomainError("rescaled value exceeds " + std::to_string(max_digits) +
                              " digits: " + std::to_string(scaled));
        out[i] = static_cast<long long>(scaled);
    }
    return out;
}

AlphaSeries evaluate_alpha(const AlphaDef& def,
                           const std::vector<PriceBar>& bars,
                           double rescale_factor) {
    AlphaSeries s;
    s.def = def;
    s.values = eval(*def.formula, bars);
    s.scaled = rescale(s.values, rescale_factor);
    return s;
}

}  // namespace mosaic::alpha
