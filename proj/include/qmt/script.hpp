#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmt/symbols.hpp"
#include "qmt/tower.hpp"

namespace qmt {

// One problem-description statement. Expressions are kept as parsed
// polynomials over the variables declared so far plus their canonical
// re-printing, so scripts round-trip through fmt.
struct Statement {
    enum class Kind {
        Domain,
        BaseGen,
        BallBound,
        Adjoin,
        AddGen,
        Hide,
        Exclude,
        Explore,
        Certify,
        Report
    };
    Kind kind = Kind::Report;
    int line = 0, col = 0;

    // domain
    std::vector<std::string> var_names;
    std::vector<std::optional<std::pair<Rational, Rational>>> ranges;  // nullopt = all of R
    std::optional<std::vector<std::pair<Rational, Rational>>> sample_box;

    std::string name;                 // adjoin / hide target
    SymbolKind adjoin_kind = SymbolKind::BasePoly;
    std::vector<Polynomial> exprs;    // payload polynomials
    int int_arg = 0;                  // root exponent / dmax
    std::optional<Rational> rat_arg;  // recip bound / eps / ball bound
    std::string mode_arg;             // exact | closure | compact
    bool flag = false;                // force (adjoin) / nonneg (add_gen)
    std::optional<int> samples;
    std::optional<Rational> delta;
    std::optional<std::uint64_t> seed;
    std::vector<Rational> point;      // exclude target
};

struct ProblemScript {
    std::vector<Statement> statements;
    std::vector<std::string> symbol_names;  // declared order, for printing
};

struct script_error : std::runtime_error {
    int line, col;
    script_error(const std::string& msg, int l, int c)
        : std::runtime_error("line " + std::to_string(l) + ", col " + std::to_string(c) + ": " +
                             msg),
          line(l),
          col(c) {}
};

ProblemScript parse_script(const std::string& text);
std::string print_script(const ProblemScript& script);

}  // namespace qmt
