#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qmt/config.hpp"
#include "qmt/domain.hpp"
#include "qmt/groebner.hpp"
#include "qmt/symbols.hpp"

namespace qmt {

enum class Provenance { Base, Adjunction, Separator, Bound, Manual };
const char* to_string(Provenance p);

struct QmGenerator {
    Polynomial poly;  // normal form w.r.t. the ideal at insertion time
    Provenance prov = Provenance::Base;
    int stage = 0;  // variable count when the generator was added
    std::string note;
};

enum class BoundKind { Integral, Bounded, Unbounded };

struct VarStatus {
    BoundKind kind = BoundKind::Unbounded;
    Rational bound = Rational(0);  // N with N - v^2 in Q, when Bounded
    std::string via;
    double lo = 0.0, hi = 0.0;  // value range estimate when bounded/integral
    bool range_known = false;
    bool window_only = false;  // range is just the sampling window of an unbounded variable
};

struct ArchimedeanWitness {
    std::vector<VarStatus> vars;
    bool archimedean = false;
};

enum class TowerMode { Exact, Closure, Unverified };
const char* to_string(TowerMode m);
TowerMode weaker_mode(TowerMode a, TowerMode b);

// A presentation of one algebra in the chain: variables, relation ideal,
// quadratic module, archimedean bookkeeping, and the current claim about
// image vs. positivity set. Values are immutable; adjunctions copy.
struct TowerState {
    DomainDescription domain;
    std::vector<FunctionSymbol> symbols;  // first domain.dim are Base
    std::vector<Polynomial> relations;    // one per non-Base visible symbol
    GroebnerBasis ideal;                  // of `relations`, over all variables
    std::vector<QmGenerator> qmodule;
    ArchimedeanWitness witness;
    TowerMode mode = TowerMode::Exact;
    std::vector<TowerMode> mode_history;  // mode after each symbol was added
    std::vector<std::string> notes;

    std::size_t nvars() const { return symbols.size(); }
    std::vector<std::string> names() const;
    std::optional<std::size_t> symbol_index(const std::string& name) const;
    Polynomial nf(const Polynomial& p) const { return normal_form(p, ideal); }

    // Full evaluation m(x): one value per symbol, hidden ones included.
    std::vector<double> eval_point(std::span<const double> x) const;
};

// The visible part of the tower, with variables reindexed 0..k-1. This is
// what sampling, relaxations and serialization of clouds operate on.
struct Presentation {
    std::size_t nvars = 0;
    std::vector<std::string> names;
    std::vector<std::size_t> symbol_of;   // presentation var -> symbol index
    std::vector<std::size_t> index_of;    // symbol index -> presentation var or SIZE_MAX
    GroebnerBasis ideal;
    std::vector<QmGenerator> gens;
    std::vector<std::size_t> binary_vars;  // variables with relation v^2 - v

    // Reindex a polynomial over all tower variables to presentation
    // variables; throws if it touches a hidden one.
    Polynomial compress(const Polynomial& p) const;
};
Presentation presentation(const TowerState& tw);

// --- Construction -----------------------------------------------------

TowerState init_tower(const DomainDescription& domain, std::vector<std::string> base_names,
                      const std::vector<Polynomial>& base_gens,
                      std::optional<Rational> ball_bound = std::nullopt,
                      const Tolerances& tol = {});

TowerState adjoin_base_poly(const TowerState& tw, const std::string& name, const Polynomial& p);
TowerState adjoin_odd_root(const TowerState& tw, const std::string& name, const Polynomial& g,
                           int r);
TowerState adjoin_even_root(const TowerState& tw, const std::string& name, const Polynomial& g,
                            int s, const Tolerances& tol = {});
TowerState adjoin_reciprocal(const TowerState& tw, const std::string& name, const Polynomial& g,
                             std::optional<Rational> bound, const Tolerances& tol = {});

enum class PiecewiseMode { Exact, Closure };
TowerState adjoin_piecewise(const TowerState& tw, const std::string& name, const Polynomial& g,
                            const Polynomial& h, const Polynomial& q, PiecewiseMode mode_req,
                            bool force = false, const Tolerances& tol = {});

enum class ChiVariant { GeneralClosure, CompactContinuous };
TowerState adjoin_characteristic(const TowerState& tw, const std::string& name,
                                 const Polynomial& q, ChiVariant variant, bool force = false,
                                 const Tolerances& tol = {});

// sum_j (v_j - y_j)^2 - eps over the visible variables, in normal form.
Polynomial separator_generator(const TowerState& tw, std::span<const Rational> y,
                               const Rational& eps);

TowerState add_generator(const TowerState& tw, const Polynomial& p, bool claim_nonneg_on_X,
                         Provenance prov = Provenance::Manual,
                         std::optional<TowerMode> asserted_mode = std::nullopt,
                         const Tolerances& tol = {});

// Removes a symbol from the presentation (not from evaluation). Every
// relation mentioning it is dropped, so the remaining relations must
// still present the visible subalgebra; generators may not reference it.
TowerState hide_symbol(const TowerState& tw, const std::string& name);

ArchimedeanWitness archimedean_status(const TowerState& tw);

// The tower as it was when only the first k symbols existed.
TowerState prefix(const TowerState& tw, std::size_t k);

// --- Regularity -------------------------------------------------------

enum class RegularityCase { InjCase4, AlinjCase4, AlinjCase5, Comp };
enum class RegularityMethod { Auto, SturmExact, Sampling };

struct RegularityData {
    Polynomial g, h, q;  // over tw.nvars() variables; g,h unused for chi cases
};

struct RegularityResult {
    enum class Verdict { Pass, Fail, Undecided };
    Verdict verdict = Verdict::Undecided;
    std::optional<std::vector<double>> witness;
    RegularityMethod method = RegularityMethod::Sampling;
    int samples = 0;
    std::string detail;
};

RegularityResult check_regularity(const TowerState& tw, const RegularityData& data,
                                  RegularityCase which,
                                  RegularityMethod method = RegularityMethod::Auto,
                                  const Tolerances& tol = {});

// --- Serialization ----------------------------------------------------

std::string serialize(const TowerState& tw);
TowerState deserialize_tower(const std::string& text);

// Errors carrying a concrete witness point.
struct witness_error : std::runtime_error {
    std::vector<double> witness;
    witness_error(const std::string& msg, std::vector<double> w)
        : std::runtime_error(msg), witness(std::move(w)) {}
};

}  // namespace qmt
