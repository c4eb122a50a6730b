#pragma once

#include <memory>
#include <string>
#include <vector>

namespace hjnet {

// Arithmetic expressions used for potentials, flux limiters and initial data.
// Grammar: numbers, named variables, + - * /, unary minus, parentheses and
// the functions sin, cos, exp, min, max. Parsed once, evaluated many times;
// variable slots are resolved at parse time.
class Expr {
public:
    Expr() = default;

    // `vars` lists the variable names admitted in this context, e.g. {"s","t"}.
    static Expr parse(const std::string& source, const std::vector<std::string>& vars);

    // `values[i]` is the value of `vars[i]` passed to parse().
    double eval(const double* values) const;
    double eval(std::initializer_list<double> values) const { return eval(values.begin()); }

    bool depends_on(const std::string& var) const;
    bool constant() const { return used_vars_.empty(); }
    const std::string& source() const { return source_; }
    bool empty() const { return code_.empty(); }

private:
    enum class Op : std::uint8_t { push_const, push_var, neg, add, sub, mul, div, fsin, fcos, fexp, fmin, fmax };
    struct Instr {
        Op op;
        double value = 0.0;  // constant or variable slot
    };
    std::vector<Instr> code_;
    std::vector<std::string> used_vars_;
    std::string source_;

    friend class ExprParser;
};

}  // namespace hjnet
