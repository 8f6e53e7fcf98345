#include "qmt/symbols.hpp"

#include <cmath>
#include <stdexcept>

namespace qmt {

const char* to_string(SymbolKind k) {
    switch (k) {
        case SymbolKind::Base: return "base";
        case SymbolKind::BasePoly: return "poly";
        case SymbolKind::OddRoot: return "oddroot";
        case SymbolKind::EvenRoot: return "evenroot";
        case SymbolKind::Reciprocal: return "recip";
        case SymbolKind::Piecewise: return "piecewise";
        case SymbolKind::Characteristic: return "chi";
    }
    return "?";
}

double eval_symbol(const FunctionSymbol& s, std::span<const double> prefix) {
    switch (s.kind) {
        case SymbolKind::Base:
            throw std::logic_error("base symbols are evaluated from domain coordinates");
        case SymbolKind::BasePoly:
            return s.g.eval(prefix);
        case SymbolKind::OddRoot: {
            double v = s.g.eval(prefix);
            return std::copysign(std::pow(std::abs(v), 1.0 / s.root_exp), v);
        }
        case SymbolKind::EvenRoot: {
            double v = s.g.eval(prefix);
            if (v < 0) v = 0;  // true negatives are rejected at adjunction time
            return std::pow(v, 1.0 / s.root_exp);
        }
        case SymbolKind::Reciprocal: {
            double v = s.g.eval(prefix);
            if (std::abs(v) < 1e-300) throw std::runtime_error("evaluation at a pole of " + s.name);
            return 1.0 / v;
        }
        case SymbolKind::Piecewise:
            return s.q.eval(prefix) >= 0 ? s.g.eval(prefix) : s.h.eval(prefix);
        case SymbolKind::Characteristic:
            return s.q.eval(prefix) >= 0 ? 1.0 : 0.0;
    }
    throw std::logic_error("unknown symbol kind");
}

}  // namespace qmt
