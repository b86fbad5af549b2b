#include "fibertwist/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace fibertwist {

namespace {
enum class Func { Sin, Cos, Log, Exp };
} // namespace

struct Expr::Node {
    enum class Kind { Number, Var, Neg, Add, Sub, Mul, Div, Pow, Call } kind;
    double number = 0.0;
    Func func = Func::Sin;
    std::unique_ptr<Node> lhs, rhs;

    std::unique_ptr<Node> clone() const {
        auto n = std::make_unique<Node>();
        n->kind = kind;
        n->number = number;
        n->func = func;
        if (lhs) n->lhs = lhs->clone();
        if (rhs) n->rhs = rhs->clone();
        return n;
    }
};

namespace {

using Node = Expr::Node;
using Kind = Expr::Node::Kind;

std::unique_ptr<Node> make(Kind k) {
    auto n = std::make_unique<Node>();
    n->kind = k;
    return n;
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    std::unique_ptr<Node> run() {
        auto e = parse_expr();
        skip_ws();
        if (pos_ != text_.size())
            throw SyntaxError("unexpected trailing input", pos_);
        return e;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() &&
               std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }
    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }
    bool consume(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    // expr := term (('+'|'-') term)*
    std::unique_ptr<Node> parse_expr() {
        auto lhs = parse_term();
        for (;;) {
            char c = peek();
            if (c != '+' && c != '-') return lhs;
            ++pos_;
            auto n = make(c == '+' ? Kind::Add : Kind::Sub);
            n->lhs = std::move(lhs);
            n->rhs = parse_term();
            lhs = std::move(n);
        }
    }

    // term := factor (('*'|'/') factor)*
    std::unique_ptr<Node> parse_term() {
        auto lhs = parse_factor();
        for (;;) {
            char c = peek();
            if (c != '*' && c != '/') return lhs;
            ++pos_;
            auto n = make(c == '*' ? Kind::Mul : Kind::Div);
            n->lhs = std::move(lhs);
            n->rhs = parse_factor();
            lhs = std::move(n);
        }
    }

    // factor := unary ('^' factor)?   (right-associative)
    std::unique_ptr<Node> parse_factor() {
        auto base = parse_unary();
        if (peek() == '^') {
            ++pos_;
            auto n = make(Kind::Pow);
            n->lhs = std::move(base);
            n->rhs = parse_factor();
            return n;
        }
        return base;
    }

    // unary := '-' unary | atom
    std::unique_ptr<Node> parse_unary() {
        if (peek() == '-') {
            ++pos_;
            auto n = make(Kind::Neg);
            n->lhs = parse_unary();
            return n;
        }
        return parse_atom();
    }

    // atom := number | 'z' | ident '(' expr ')' | '(' expr ')'
    std::unique_ptr<Node> parse_atom() {
        skip_ws();
        if (pos_ >= text_.size())
            throw SyntaxError("unexpected end of input", pos_);
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            auto e = parse_expr();
            if (!consume(')')) throw SyntaxError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return parse_ident();
        throw SyntaxError(std::string("unexpected character '") + c + "'",
                          pos_);
    }

    std::unique_ptr<Node> parse_number() {
        const char* begin = text_.data() + pos_;
        char* end = nullptr;
        // text_ comes from a std::string in Expr::parse, so it is
        // NUL-terminated and strtod cannot run past it.
        double v = std::strtod(begin, &end);
        if (end == begin) throw SyntaxError("malformed number", pos_);
        pos_ += static_cast<std::size_t>(end - begin);
        auto n = make(Kind::Number);
        n->number = v;
        return n;
    }

    std::unique_ptr<Node> parse_ident() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                text_[pos_] == '_'))
            ++pos_;
        std::string name(text_.substr(start, pos_ - start));
        if (peek() == '(') {
            ++pos_;
            auto arg = parse_expr();
            if (!consume(')')) throw SyntaxError("expected ')'", pos_);
            auto n = make(Kind::Call);
            if (name == "sin")
                n->func = Func::Sin;
            else if (name == "cos")
                n->func = Func::Cos;
            else if (name == "log")
                n->func = Func::Log;
            else if (name == "exp")
                n->func = Func::Exp;
            else
                throw UnknownFunctionError("unknown function '" + name + "'");
            n->lhs = std::move(arg);
            return n;
        }
        if (name == "z") return make(Kind::Var);
        throw UnknownVariableError("unknown variable '" + name + "'");
    }
};

double eval_pow(double x, double y) {
    // Integer exponents by repeated multiplication, so negative bases work;
    // anything else goes through exp(y log x) and needs x > 0.
    if (std::isfinite(y) && std::floor(y) == y && std::fabs(y) <= 1e9) {
        long long n = static_cast<long long>(y);
        bool inv = n < 0;
        unsigned long long p = inv ? static_cast<unsigned long long>(-n)
                                   : static_cast<unsigned long long>(n);
        double acc = 1.0, base = x;
        while (p) {
            if (p & 1ULL) acc *= base;
            base *= base;
            p >>= 1ULL;
        }
        return inv ? 1.0 / acc : acc;
    }
    if (x <= 0.0)
        throw DomainError("non-integer power of a non-positive base");
    return std::exp(y * std::log(x));
}

double eval_node(const Node& n, double z) {
    double r;
    switch (n.kind) {
    case Kind::Number: r = n.number; break;
    case Kind::Var: r = z; break;
    case Kind::Neg: r = -eval_node(*n.lhs, z); break;
    case Kind::Add: r = eval_node(*n.lhs, z) + eval_node(*n.rhs, z); break;
    case Kind::Sub: r = eval_node(*n.lhs, z) - eval_node(*n.rhs, z); break;
    case Kind::Mul: r = eval_node(*n.lhs, z) * eval_node(*n.rhs, z); break;
    case Kind::Div: r = eval_node(*n.lhs, z) / eval_node(*n.rhs, z); break;
    case Kind::Pow:
        r = eval_pow(eval_node(*n.lhs, z), eval_node(*n.rhs, z));
        break;
    case Kind::Call: {
        double a = eval_node(*n.lhs, z);
        switch (n.func) {
        case Func::Sin: r = std::sin(a); break;
        case Func::Cos: r = std::cos(a); break;
        case Func::Exp: r = std::exp(a); break;
        case Func::Log:
            if (a <= 0.0)
                throw DomainError("log of non-positive value " +
                                  std::to_string(a));
            r = std::log(a);
            break;
        default: r = 0.0; break;
        }
        break;
    }
    default: r = 0.0; break;
    }
    if (!std::isfinite(r)) throw DomainError("non-finite value in evaluation");
    return r;
}

} // namespace

Expr Expr::parse(std::string_view text) {
    Expr e;
    e.text_ = std::string(text);
    e.root_ = Parser(e.text_).run();
    return e;
}

double Expr::eval(double z) const {
    if (!std::isfinite(z)) throw DomainError("non-finite argument");
    return eval_node(*root_, z);
}

Expr::Expr(const Expr& other) : text_(other.text_) {
    if (other.root_) root_ = other.root_->clone();
}
Expr& Expr::operator=(const Expr& other) {
    if (this != &other) {
        text_ = other.text_;
        root_ = other.root_ ? other.root_->clone() : nullptr;
    }
    return *this;
}
Expr::~Expr() = default;

} // namespace fibertwist
