#include "hjnet/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>

#include "hjnet/common.hpp"

namespace hjnet {

class ExprParser {
public:
    ExprParser(const std::string& src, const std::vector<std::string>& vars, Expr& out)
        : src_(src), vars_(vars), out_(out) {}

    void run() {
        parse_sum();
        skip_ws();
        if (pos_ != src_.size()) fail("trailing input");
    }

private:
    const std::string& src_;
    const std::vector<std::string>& vars_;
    Expr& out_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw Error("expression error in \"" + src_ + "\" at position " + std::to_string(pos_) + ": " + msg);
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool consume(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void emit(Expr::Op op, double v = 0.0) { out_.code_.push_back({op, v}); }

    void parse_sum() {
        parse_product();
        for (;;) {
            if (consume('+')) {
                parse_product();
                emit(Expr::Op::add);
            } else if (consume('-')) {
                parse_product();
                emit(Expr::Op::sub);
            } else {
                return;
            }
        }
    }

    void parse_product() {
        parse_unary();
        for (;;) {
            if (consume('*')) {
                parse_unary();
                emit(Expr::Op::mul);
            } else if (consume('/')) {
                parse_unary();
                emit(Expr::Op::div);
            } else {
                return;
            }
        }
    }

    void parse_unary() {
        if (consume('-')) {
            parse_unary();
            emit(Expr::Op::neg);
        } else if (consume('+')) {
            parse_unary();
        } else {
            parse_atom();
        }
    }

    void parse_atom() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* start = src_.c_str() + pos_;
            char* end = nullptr;
            double v = std::strtod(start, &end);
            if (end == start) fail("bad number");
            pos_ += static_cast<std::size_t>(end - start);
            emit(Expr::Op::push_const, v);
            return;
        }
        if (consume('(')) {
            parse_sum();
            if (!consume(')')) fail("expected ')'");
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            std::string name = src_.substr(start, pos_ - start);
            if (name == "pi") {
                emit(Expr::Op::push_const, 3.14159265358979323846);
                return;
            }
            if (name == "sin" || name == "cos" || name == "exp") {
                if (!consume('(')) fail("expected '(' after " + name);
                parse_sum();
                if (!consume(')')) fail("expected ')'");
                emit(name == "sin" ? Expr::Op::fsin : name == "cos" ? Expr::Op::fcos : Expr::Op::fexp);
                return;
            }
            if (name == "min" || name == "max") {
                if (!consume('(')) fail("expected '(' after " + name);
                parse_sum();
                if (!consume(',')) fail("expected ',' in " + name);
                parse_sum();
                if (!consume(')')) fail("expected ')'");
                emit(name == "min" ? Expr::Op::fmin : Expr::Op::fmax);
                return;
            }
            auto it = std::find(vars_.begin(), vars_.end(), name);
            if (it == vars_.end()) fail("unknown identifier '" + name + "'");
            emit(Expr::Op::push_var, static_cast<double>(it - vars_.begin()));
            if (std::find(out_.used_vars_.begin(), out_.used_vars_.end(), name) == out_.used_vars_.end())
                out_.used_vars_.push_back(name);
            return;
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

Expr Expr::parse(const std::string& source, const std::vector<std::string>& vars) {
    Expr e;
    e.source_ = source;
    ExprParser(source, vars, e).run();
    return e;
}

double Expr::eval(const double* values) const {
    double stack[64];
    int top = -1;
    for (const Instr& in : code_) {
        switch (in.op) {
            case Op::push_const: stack[++top] = in.value; break;
            case Op::push_var: stack[++top] = values[static_cast<int>(in.value)]; break;
            case Op::neg: stack[top] = -stack[top]; break;
            case Op::add: --top; stack[top] += stack[top + 1]; break;
            case Op::sub: --top; stack[top] -= stack[top + 1]; break;
            case Op::mul: --top; stack[top] *= stack[top + 1]; break;
            case Op::div: --top; stack[top] /= stack[top + 1]; break;
            case Op::fsin: stack[top] = std::sin(stack[top]); break;
            case Op::fcos: stack[top] = std::cos(stack[top]); break;
            case Op::fexp: stack[top] = std::exp(stack[top]); break;
            case Op::fmin: --top; stack[top] = std::min(stack[top], stack[top + 1]); break;
            case Op::fmax: --top; stack[top] = std::max(stack[top], stack[top + 1]); break;
        }
    }
    return top >= 0 ? stack[top] : 0.0;
}

bool Expr::depends_on(const std::string& var) const {
    return std::find(used_vars_.begin(), used_vars_.end(), var) != used_vars_.end();
}

}  // namespace hjnet
