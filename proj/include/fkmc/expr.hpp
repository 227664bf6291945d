#pragma once

#include <cctype>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "fkmc/csv.hpp"
#include "fkmc/errors.hpp"
#include "fkmc/vec.hpp"

namespace fkmc {

struct ExprSyntaxError : Error {
    std::size_t offset;
    ExprSyntaxError(std::size_t off, const std::string& msg)
        : Error("syntax error at offset " + std::to_string(off) + ": " + msg), offset(off) {}
};

struct UnknownIdentifier : Error {
    using Error::Error;
};

/// Arithmetic expressions over variables {x, x1..xn, t}, numeric literals,
/// + - * / ^ (right-associative), unary minus, and the function set
/// {exp, log, sin, cos, sqrt, abs, min, max}. Constants are bound at
/// evaluation time through the environment.
namespace expr {

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    enum class Kind { Number, Var, Unary, Binary, Call };
    Kind kind = Kind::Number;
    double number = 0.0;
    std::string name;  ///< Var / Call
    char op = 0;       ///< Binary: one of + - * / ^
    std::vector<NodePtr> args;
};

inline NodePtr number(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Number;
    n->number = v;
    return n;
}
inline NodePtr var(std::string name) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Var;
    n->name = std::move(name);
    return n;
}
inline NodePtr unary_minus(NodePtr a) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Unary;
    n->op = '-';
    n->args = {std::move(a)};
    return n;
}
inline NodePtr binary(char op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Binary;
    n->op = op;
    n->args = {std::move(a), std::move(b)};
    return n;
}
inline NodePtr call(std::string fn, std::vector<NodePtr> args) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Call;
    n->name = std::move(fn);
    n->args = std::move(args);
    return n;
}

inline std::size_t function_arity(const std::string& name) {
    if (name == "exp" || name == "log" || name == "sin" || name == "cos" || name == "sqrt" ||
        name == "abs")
        return 1;
    if (name == "min" || name == "max") return 2;
    return 0;
}

inline bool operator==(const Node& a, const Node& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Node::Kind::Number:
            return a.number == b.number;
        case Node::Kind::Var:
            return a.name == b.name;
        case Node::Kind::Unary:
        case Node::Kind::Binary:
            if (a.op != b.op || a.args.size() != b.args.size()) return false;
            break;
        case Node::Kind::Call:
            if (a.name != b.name || a.args.size() != b.args.size()) return false;
            break;
    }
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!(*a.args[i] == *b.args[i])) return false;
    return true;
}
inline bool equal(const NodePtr& a, const NodePtr& b) { return a && b && *a == *b; }

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    NodePtr parse() {
        NodePtr e = parse_sum();
        skip_ws();
        if (pos_ != src_.size()) fail(pos_, "unexpected trailing input");
        return e;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(std::size_t off, const std::string& msg) {
        throw ExprSyntaxError(off, msg);
    }
    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    NodePtr parse_sum() {
        NodePtr lhs = parse_product();
        for (;;) {
            skip_ws();
            if (eat('+'))
                lhs = binary('+', lhs, parse_product());
            else if (eat('-'))
                lhs = binary('-', lhs, parse_product());
            else
                return lhs;
        }
    }

    NodePtr parse_product() {
        NodePtr lhs = parse_factor();
        for (;;) {
            skip_ws();
            if (eat('*'))
                lhs = binary('*', lhs, parse_factor());
            else if (eat('/'))
                lhs = binary('/', lhs, parse_factor());
            else
                return lhs;
        }
    }

    // factor := '-' factor | power;  power := primary ['^' factor]
    NodePtr parse_factor() {
        skip_ws();
        if (eat('-')) return unary_minus(parse_factor());
        NodePtr base = parse_primary();
        if (eat('^')) return binary('^', base, parse_factor());
        return base;
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail(pos_, "unexpected end of input");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = parse_sum();
            if (!eat(')')) fail(pos_, "expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
        fail(pos_, std::string("unexpected character '") + c + "'");
    }

    NodePtr parse_number() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
            ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
            if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
                pos_ = p;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    ++pos_;
            }
        }
        const std::string text(src_.substr(start, pos_ - start));
        try {
            std::size_t used = 0;
            const double v = std::stod(text, &used);
            if (used != text.size()) fail(start, "malformed number");
            return number(v);
        } catch (const std::exception&) {
            fail(start, "malformed number");
        }
    }

    NodePtr parse_ident() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                      src_[pos_] == '_'))
            ++pos_;
        std::string name(src_.substr(start, pos_ - start));
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == '(') {
            const std::size_t arity = function_arity(name);
            if (arity == 0)
                throw UnknownIdentifier("unknown function '" + name + "' at offset " +
                                        std::to_string(start));
            ++pos_;
            std::vector<NodePtr> args;
            args.push_back(parse_sum());
            while (eat(',')) args.push_back(parse_sum());
            if (!eat(')')) fail(pos_, "expected ')'");
            if (args.size() != arity)
                fail(start, "function '" + name + "' expects " + std::to_string(arity) +
                                " argument(s)");
            return call(std::move(name), std::move(args));
        }
        return var(std::move(name));
    }
};

}  // namespace detail

inline NodePtr parse(std::string_view source) { return detail::Parser(source).parse(); }

/// Fully parenthesized rendering; parse(print(e)) == e structurally.
inline std::string print(const NodePtr& e) {
    switch (e->kind) {
        case Node::Kind::Number: {
            if (e->number < 0.0)  // negative literals re-parse as unary minus otherwise
                return "(0-" + format_sig(-e->number, 17) + ")";
            return format_sig(e->number, 17);
        }
        case Node::Kind::Var:
            return e->name;
        case Node::Kind::Unary:
            return "(-" + print(e->args[0]) + ")";
        case Node::Kind::Binary:
            return "(" + print(e->args[0]) + e->op + print(e->args[1]) + ")";
        case Node::Kind::Call: {
            std::string s = e->name + "(" + print(e->args[0]);
            for (std::size_t i = 1; i < e->args.size(); ++i) s += "," + print(e->args[i]);
            return s + ")";
        }
    }
    return {};
}

/// Evaluation environment: state vector, time, and named constants.
struct Env {
    const Vec* x = nullptr;
    double t = 0.0;
    const std::map<std::string, double>* constants = nullptr;
    /// extra scalar bindings (e.g. y in space-time kernels)
    const std::map<std::string, double>* locals = nullptr;
};

inline double eval(const NodePtr& e, const Env& env);

namespace detail {
inline double resolve_var(const std::string& name, const Env& env) {
    if (env.locals) {
        const auto it = env.locals->find(name);
        if (it != env.locals->end()) return it->second;
    }
    if (name == "t") return env.t;
    if (env.x) {
        if (name == "x") return (*env.x)[0];
        if (name.size() >= 2 && name[0] == 'x') {
            bool digits = true;
            for (std::size_t i = 1; i < name.size(); ++i)
                if (!std::isdigit(static_cast<unsigned char>(name[i]))) digits = false;
            if (digits) {
                const std::size_t idx = std::stoul(name.substr(1));
                if (idx >= 1 && idx <= env.x->size()) return (*env.x)[idx - 1];
                throw UnknownIdentifier("variable '" + name + "' exceeds the state dimension");
            }
        }
    }
    if (env.constants) {
        const auto it = env.constants->find(name);
        if (it != env.constants->end()) return it->second;
    }
    throw UnknownIdentifier("unknown identifier '" + name + "'");
}
}  // namespace detail

inline double eval(const NodePtr& e, const Env& env) {
    switch (e->kind) {
        case Node::Kind::Number:
            return e->number;
        case Node::Kind::Var:
            return detail::resolve_var(e->name, env);
        case Node::Kind::Unary:
            return -eval(e->args[0], env);
        case Node::Kind::Binary: {
            const double a = eval(e->args[0], env);
            const double b = eval(e->args[1], env);
            double r = 0.0;
            switch (e->op) {
                case '+': r = a + b; break;
                case '-': r = a - b; break;
                case '*': r = a * b; break;
                case '/': r = a / b; break;
                case '^': r = std::pow(a, b); break;
                default: throw EvaluationError("bad operator");
            }
            if (!std::isfinite(r))
                throw EvaluationError(std::string("non-finite result of '") + e->op + "'");
            return r;
        }
        case Node::Kind::Call: {
            const double a = eval(e->args[0], env);
            double r = 0.0;
            if (e->name == "exp") r = std::exp(a);
            else if (e->name == "log") r = std::log(a);
            else if (e->name == "sin") r = std::sin(a);
            else if (e->name == "cos") r = std::cos(a);
            else if (e->name == "sqrt") r = std::sqrt(a);
            else if (e->name == "abs") r = std::abs(a);
            else if (e->name == "min") r = std::min(a, eval(e->args[1], env));
            else if (e->name == "max") r = std::max(a, eval(e->args[1], env));
            else throw UnknownIdentifier("unknown function '" + e->name + "'");
            if (!std::isfinite(r))
                throw EvaluationError("non-finite result of " + e->name + "()");
            return r;
        }
    }
    throw EvaluationError("malformed expression tree");
}

/// Collects identifiers that the environment cannot resolve; used to validate
/// configured expressions before any simulation starts.
inline void collect_unknowns(const NodePtr& e, const Env& env, std::vector<std::string>& out) {
    if (e->kind == Node::Kind::Var) {
        try {
            detail::resolve_var(e->name, env);
        } catch (const UnknownIdentifier&) {
            out.push_back(e->name);
        }
        return;
    }
    for (const auto& a : e->args) collect_unknowns(a, env, out);
}

}  // namespace expr
}  // namespace fkmc
