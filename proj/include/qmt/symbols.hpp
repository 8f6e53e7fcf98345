#pragma once

#include <optional>
#include <span>
#include <string>

#include "qmt/polynomial.hpp"

namespace qmt {

enum class SymbolKind { Base, BasePoly, OddRoot, EvenRoot, Reciprocal, Piecewise, Characteristic };

const char* to_string(SymbolKind k);

// One presentation variable of a tower together with its evaluation
// recipe. Payload polynomials live over the variables preceding this
// symbol, so references are well founded by construction.
struct FunctionSymbol {
    std::string name;
    SymbolKind kind = SymbolKind::Base;
    Polynomial g;  // BasePoly: p; OddRoot/EvenRoot/Reciprocal: g; Piecewise: g
    Polynomial h;  // Piecewise only
    Polynomial q;  // Piecewise and Characteristic
    int root_exp = 0;
    std::optional<Rational> bound;  // Reciprocal bound N (adds N - f^2)
    bool continuous = true;
    bool visible = true;
};

// Value of the symbol given the values of all preceding variables.
// Throws on reciprocal poles.
double eval_symbol(const FunctionSymbol& s, std::span<const double> prefix);

}  // namespace qmt
