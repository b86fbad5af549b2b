#pragma once
#include <memory>
#include <string>
#include <string_view>

#include "fibertwist/errors.hpp"

namespace fibertwist {

// Arithmetic expression in the single variable z, with + - * / ^, unary
// minus, and the functions sin, cos, log (natural), exp. '^' is
// right-associative and binds tighter than '*' and '/'.
class Expr {
public:
    static Expr parse(std::string_view text);

    double eval(double z) const;
    const std::string& text() const { return text_; }

    Expr(Expr&&) noexcept = default;
    Expr& operator=(Expr&&) noexcept = default;
    Expr(const Expr&);
    Expr& operator=(const Expr&);
    ~Expr();

    struct Node;

private:
    Expr() = default;
    std::unique_ptr<Node> root_;
    std::string text_;
};

} // namespace fibertwist
