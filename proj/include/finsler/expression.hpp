#pragma once

#include <cctype>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "finsler/dual.hpp"
#include "finsler/errors.hpp"

namespace finsler {

/// Parsed arithmetic expression over the chart variables x[i], y[i] (0-based)
/// and an optional named scalar variable. Supported: + - * / ^, unary minus,
/// pow(a,b), sqrt, sin, cos, exp, log, numeric literals, parentheses.
class Expr {
public:
    enum class Op { Const, VarX, VarY, VarNamed, Add, Sub, Mul, Div, Neg, Pow, Sqrt, Sin, Cos, Exp, Log };

    struct Node {
        Op op;
        double constant = 0.0;
        int index = -1;
        int a = -1, b = -1; // child slots
    };

    static Expr parse(const std::string& text, const std::string& named_var = "") {
        Expr e;
        e.text_ = text;
        e.named_var_ = named_var;
        Parser p{text, named_var, e};
        e.root_ = p.parse_expr();
        p.skip_ws();
        if (p.pos != text.size())
            throw ParseError("unexpected trailing input '" + text.substr(p.pos) + "' at position " +
                                 std::to_string(p.pos) + " in expression \"" + text + "\"",
                             p.pos);
        return e;
    }

    /// Highest x[i]/y[i] index referenced, or -1 when none appear.
    int max_index() const {
        int m = -1;
        for (const Node& n : nodes_)
            if (n.op == Op::VarX || n.op == Op::VarY) m = std::max(m, n.index);
        return m;
    }

    bool uses_x() const {
        for (const Node& n : nodes_)
            if (n.op == Op::VarX) return true;
        return false;
    }

    const std::string& text() const { return text_; }

    template <class S>
    S eval(std::span<const S> x, std::span<const S> y, const S* named = nullptr) const {
        return eval_node<S>(root_, x, y, named);
    }

private:
    std::vector<Node> nodes_;
    int root_ = -1;
    std::string text_;
    std::string named_var_;

    int add(Node n) {
        nodes_.push_back(n);
        return static_cast<int>(nodes_.size()) - 1;
    }

    template <class S>
    S eval_node(int id, std::span<const S> x, std::span<const S> y, const S* named) const {
        const Node& n = nodes_[id];
        switch (n.op) {
            case Op::Const: return S(n.constant);
            case Op::VarX:
                if (n.index >= static_cast<int>(x.size()))
                    throw EvaluationError("expression references x[" + std::to_string(n.index) +
                                          "] beyond chart dimension");
                return x[n.index];
            case Op::VarY:
                if (n.index >= static_cast<int>(y.size()))
                    throw EvaluationError("expression references y[" + std::to_string(n.index) +
                                          "] beyond chart dimension");
                return y[n.index];
            case Op::VarNamed:
                if (!named) throw EvaluationError("expression variable '" + named_var_ + "' is unbound");
                return *named;
            case Op::Add: return eval_node<S>(n.a, x, y, named) + eval_node<S>(n.b, x, y, named);
            case Op::Sub: return eval_node<S>(n.a, x, y, named) - eval_node<S>(n.b, x, y, named);
            case Op::Mul: return eval_node<S>(n.a, x, y, named) * eval_node<S>(n.b, x, y, named);
            case Op::Div: return eval_node<S>(n.a, x, y, named) / eval_node<S>(n.b, x, y, named);
            case Op::Neg: return -eval_node<S>(n.a, x, y, named);
            case Op::Pow: {
                const Node& exponent = nodes_[n.b];
                if (exponent.op == Op::Const)
                    return pow(eval_node<S>(n.a, x, y, named), exponent.constant);
                return pow(eval_node<S>(n.a, x, y, named), eval_node<S>(n.b, x, y, named));
            }
            case Op::Sqrt: return sqrt(eval_node<S>(n.a, x, y, named));
            case Op::Sin: return sin(eval_node<S>(n.a, x, y, named));
            case Op::Cos: return cos(eval_node<S>(n.a, x, y, named));
            case Op::Exp: return exp(eval_node<S>(n.a, x, y, named));
            case Op::Log: return log(eval_node<S>(n.a, x, y, named));
        }
        throw EvaluationError("corrupt expression node");
    }

    struct Parser {
        const std::string& s;
        const std::string& named;
        Expr& e;
        std::size_t pos = 0;

        [[noreturn]] void fail(const std::string& msg) {
            throw ParseError(msg + " at position " + std::to_string(pos) + " in expression \"" + s + "\"", pos);
        }

        void skip_ws() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }

        bool eat(char c) {
            skip_ws();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }

        int parse_expr() {
            int lhs = parse_term();
            for (;;) {
                skip_ws();
                if (eat('+')) lhs = e.add({Op::Add, 0, -1, lhs, parse_term()});
                else if (eat('-')) lhs = e.add({Op::Sub, 0, -1, lhs, parse_term()});
                else return lhs;
            }
        }

        int parse_term() {
            int lhs = parse_factor();
            for (;;) {
                skip_ws();
                if (eat('*')) lhs = e.add({Op::Mul, 0, -1, lhs, parse_factor()});
                else if (eat('/')) lhs = e.add({Op::Div, 0, -1, lhs, parse_factor()});
                else return lhs;
            }
        }

        int parse_factor() {
            int base = parse_unary();
            skip_ws();
            if (eat('^')) return e.add({Op::Pow, 0, -1, base, parse_factor()}); // right-assoc
            return base;
        }

        int parse_unary() {
            skip_ws();
            if (eat('-')) return e.add({Op::Neg, 0, -1, parse_unary(), -1});
            eat('+');
            return parse_primary();
        }

        int parse_primary() {
            skip_ws();
            if (pos >= s.size()) fail("unexpected end of expression");
            const char c = s[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
            if (c == '(') {
                ++pos;
                const int inner = parse_expr();
                if (!eat(')')) fail("expected ')'");
                return inner;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
            fail(std::string("unexpected character '") + c + "'");
        }

        int parse_number() {
            const std::size_t start = pos;
            std::size_t consumed = 0;
            double v = 0.0;
            try {
                v = std::stod(s.substr(start), &consumed);
            } catch (const std::exception&) {
                fail("malformed numeric literal");
            }
            pos = start + consumed;
            return e.add({Op::Const, v, -1, -1, -1});
        }

        int parse_ident() {
            const std::size_t start = pos;
            while (pos < s.size() &&
                   (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
                ++pos;
            const std::string id = s.substr(start, pos - start);

            if (id == "x" || id == "y") {
                if (!eat('[')) fail("expected '[' after '" + id + "'");
                skip_ws();
                std::size_t consumed = 0;
                int idx = -1;
                try {
                    idx = std::stoi(s.substr(pos), &consumed);
                } catch (const std::exception&) {
                    fail("expected index in '" + id + "[...]'");
                }
                pos += consumed;
                if (!eat(']')) fail("expected ']'");
                if (idx < 0) fail("negative coordinate index");
                return e.add({id == "x" ? Op::VarX : Op::VarY, 0, idx, -1, -1});
            }
            if (id == "pi") return e.add({Op::Const, 3.14159265358979323846, -1, -1, -1});
            if (!named.empty() && id == named) return e.add({Op::VarNamed, 0, -1, -1, -1});

            Op fn;
            if (id == "sqrt") fn = Op::Sqrt;
            else if (id == "sin") fn = Op::Sin;
            else if (id == "cos") fn = Op::Cos;
            else if (id == "exp") fn = Op::Exp;
            else if (id == "log") fn = Op::Log;
            else if (id == "pow") {
                if (!eat('(')) fail("expected '(' after 'pow'");
                const int a = parse_expr();
                if (!eat(',')) fail("expected ',' in pow(a,b)");
                const int b = parse_expr();
                if (!eat(')')) fail("expected ')'");
                return e.add({Op::Pow, 0, -1, a, b});
            } else {
                pos = start;
                fail("unknown identifier '" + id + "'");
            }
            if (!eat('(')) fail("expected '(' after '" + id + "'");
            const int a = parse_expr();
            if (!eat(')')) fail("expected ')'");
            return e.add({fn, 0, -1, a, -1});
        }
    };
};

} // namespace finsler
