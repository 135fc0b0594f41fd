#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "mosaic/alpha.hpp"
#include "mosaic/errors.hpp"

namespace mosaic::alpha {
namespace {

struct FuncSig {
    std::size_t min_args;
    std::size_t max_args;
    std::vector<std::string> named;  // admissible named args
};

// Supported function set with arities. ewma takes either a positional span
// or a single com= named argument.
const std::map<std::string, FuncSig>& signatures() {
    static const std::map<std::string, FuncSig> sigs = {
        {"ts_mean", {2, 2, {}}},   {"ts_stddev", {2, 2, {}}},
        {"ewma", {1, 2, {"com"}}}, {"shift", {2, 2, {}}},
        {"log", {1, 1, {}}},       {"plus", {2, 2, {}}},
        {"minus", {2, 2, {}}},     {"times", {2, 2, {}}},
        {"div", {2, 2, {}}},
    };
    return sigs;
}

std::optional<Field> field_from_name(const std::string& s) {
    if (s == "open") return Field::open;
    if (s == "high") return Field::high;
    if (s == "low") return Field::low;
    if (s == "close") return Field::close;
    if (s == "volume") return Field::volume;
    return std::nullopt;
}

const char* field_name(Field f) {
    switch (f) {
        case Field::open: return "open";
        case Field::high: return "high";
        case Field::low: return "low";
        case Field::close: return "close";
        case Field::volume: return "volume";
    }
    return "?";
}

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    ExprPtr parse() {
        ExprPtr e = expression();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("parse error at position " + std::to_string(pos_) + ": " + msg);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    ExprPtr expression() {
        char c = peek();
        if (c == '\0') fail("unexpected end of input");
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier_expr();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.')
            return number();
        fail(std::string("unexpected character '") + c + "'");
    }

    ExprPtr number() {
        skip_ws();
        std::size_t start = pos_;
        if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) ++pos_;
        bool digits = false;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
            digits = digits || std::isdigit(static_cast<unsigned char>(text_[pos_]));
            ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
        }
        if (!digits) {
            pos_ = start;
            fail("malformed number");
        }
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::literal;
        e->literal = std::stod(text_.substr(start, pos_ - start));
        return e;
    }

    std::string identifier() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        if (pos_ == start) fail("expected identifier");
        return text_.substr(start, pos_ - start);
    }

    ExprPtr identifier_expr() {
        std::size_t id_pos = pos_;
        std::string name = identifier();
        if (peek() != '(') {
            if (auto f = field_from_name(name)) {
                auto e = std::make_shared<Expr>();
                e->kind = Expr::Kind::field;
                e->field = *f;
                return e;
            }
            pos_ = id_pos;
            fail("unknown field '" + name + "'");
        }

        auto sig_it = signatures().find(name);
        if (sig_it == signatures().end()) {
            pos_ = id_pos;
            fail("unknown function '" + name + "'");
        }
        const FuncSig& sig = sig_it->second;

        expect('(');
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::call;
        e->func = name;

        if (peek() != ')') {
            while (true) {
                // named argument: ident '=' value
                std::size_t arg_pos = pos_;
                bool named = false;
                if (std::isalpha(static_cast<unsigned char>(peek()))) {
                    std::string key = identifier();
                    if (peek() == '=') {
                        ++pos_;
                        if (std::find(sig.named.begin(), sig.named.end(), key) == sig.named.end()) {
                            pos_ = arg_pos;
                            fail("function '" + name + "' has no named argument '" + key + "'");
                        }
                        if (e->named.count(key)) fail("duplicate named argument '" + key + "'");
                        e->named[key] = expression();
                        named = true;
                    } else {
                        pos_ = arg_pos;
                    }
                }
                if (!named) {
                    if (!e->named.empty())
                        fail("positional argument after named argument");
                    e->args.push_back(expression());
                }
                if (peek() == ',') {
                    ++pos_;
                    continue;
                }
                break;
            }
        }
        expect(')');

        std::size_t total = e->args.size() + e->named.size();
        if (total < sig.min_args || total > sig.max_args)
            throw ParseError("parse error at position " + std::to_string(id_pos) +
                             ": function '" + name + "' expects " +
                             std::to_string(sig.min_args) +
                             (sig.min_args == sig.max_args
                                  ? ""
                                  : ".." + std::to_string(sig.max_args)) +
                             " argument(s), got " + std::to_string(total));
        // ewma needs its series plus a decay spec one way or the other
        if (name == "ewma" && e->args.empty())
            throw ParseError("parse error at position " + std::to_string(id_pos) +
                             ": ewma requires a series argument");
        if (name == "ewma" && e->args.size() < 2 && !e->named.count("com"))
            throw ParseError("parse error at position " + std::to_string(id_pos) +
                             ": ewma requires a span argument or com=");
        return e;
    }

    const std::string& text_;
    std::size_t pos_ = 0;
};

std::string render_number(double v) {
    // integral values print without an exponent (e.g. "20", not "2e+01")
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.0f", v);
        return buf;
    }
    // shortest representation that round-trips through stod
    for (int prec = 1; prec <= 17; ++prec) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::stod(buf) == v) return buf;
    }
    return std::to_string(v);
}

}  // namespace

ExprPtr parse(const std::string& text) {
    return Parser(text).parse();
}

std::string render(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::field:
            return field_name(e.field);
        case Expr::Kind::literal:
            return render_number(e.literal);
        case Expr::Kind::call: {
            std::string out = e.func + "(";
            bool first = true;
            for (const auto& a : e.args) {
                if (!first) out += ", ";
                out += render(*a);
                first = false;
            }
            for (const auto& [k, v] : e.named) {
                if (!first) out += ", ";
                out += k + "=" + render(*v);
                first = false;
            }
            return out + ")";
        }
    }
    return "";
}

bool equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Expr::Kind::field:
            return a.field == b.field;
        case Expr::Kind::literal:
            return a.literal == b.literal;
        case Expr::Kind::call: {
            if (a.func != b.func || a.args.size() != b.args.size() ||
                a.named.size() != b.named.size())
                return false;
            for (std::size_t i = 0; i < a.args.size(); ++i)
                if (!equal(*a.args[i], *b.args[i])) return false;
            for (auto ia = a.named.begin(), ib = b.named.begin(); ia != a.named.end();
                 ++ia, ++ib)
                if (ia->first != ib->first || !equal(*ia->second, *ib->second)) return false;
            return true;
        }
    }
    return false;
}

}  // namespace mosaic::alpha
