#include "qmt/tower.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qmt/explore.hpp"
#include "qmt/sturm.hpp"

namespace qmt {

const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::Base: return "base";
        case Provenance::Adjunction: return "adjunction";
        case Provenance::Separator: return "separator";
        case Provenance::Bound: return "bound";
        case Provenance::Manual: return "manual";
    }
    return "?";
}

const char* to_string(TowerMode m) {
    switch (m) {
        case TowerMode::Exact: return "exact";
        case TowerMode::Closure: return "closure";
        case TowerMode::Unverified: return "unverified";
    }
    return "?";
}

TowerMode weaker_mode(TowerMode a, TowerMode b) {
    return static_cast<TowerMode>(std::max(static_cast<int>(a), static_cast<int>(b)));
}

std::vector<std::string> TowerState::names() const {
    std::vector<std::string> out;
    out.reserve(symbols.size());
    for (const auto& s : symbols) out.push_back(s.name);
    return out;
}

std::optional<std::size_t> TowerState::symbol_index(const std::string& name) const {
    for (std::size_t i = 0; i < symbols.size(); ++i)
        if (symbols[i].name == name) return i;
    return std::nullopt;
}

std::vector<double> TowerState::eval_point(std::span<const double> x) const {
    if (x.size() != domain.dim) throw std::invalid_argument("eval_point: wrong dimension");
    std::vector<double> vals(x.begin(), x.end());
    vals.reserve(symbols.size());
    for (std::size_t i = domain.dim; i < symbols.size(); ++i)
        vals.push_back(eval_symbol(symbols[i], std::span<const double>(vals.data(), i)));
    return vals;
}

namespace {

GroebnerBasis ideal_of(const std::vector<Polynomial>& relations, std::size_t nvars) {
    if (relations.empty()) {
        GroebnerBasis gb;
        gb.nvars = nvars;
        gb.order = TermOrder::grevlex(nvars);
        return gb;
    }
    return buchberger(relations, TermOrder::grevlex(nvars));
}

// Defining relation of one adjoined symbol, over `width` variables where
// the symbol itself is variable `idx`.
Polynomial symbol_relation(const FunctionSymbol& s, std::size_t idx, std::size_t width) {
    Polynomial f = Polynomial::variable(width, idx);
    switch (s.kind) {
        case SymbolKind::BasePoly:
            return f - s.g.extended(width);
        case SymbolKind::OddRoot:
        case SymbolKind::EvenRoot:
            return f.pow(static_cast<unsigned>(s.root_exp)) - s.g.extended(width);
        case SymbolKind::Reciprocal:
            return s.g.extended(width) * f - Polynomial::constant(width, Rational(1));
        case SymbolKind::Piecewise:
            return (f - s.g.extended(width)) * (f - s.h.extended(width));
        case SymbolKind::Characteristic:
            return f * f - f;
        case SymbolKind::Base:
            break;
    }
    throw std::logic_error("base symbol has no relation");
}

bool payload_visible(const FunctionSymbol& s, const std::vector<FunctionSymbol>& symbols) {
    auto poly_visible = [&](const Polynomial& p) {
        for (std::size_t i = 0; i < p.nvars(); ++i)
            if (p.uses_variable(i) && !symbols[i].visible) return false;
        return true;
    };
    return poly_visible(s.g) && poly_visible(s.h) && poly_visible(s.q);
}

std::vector<Polynomial> rebuild_relations(const std::vector<FunctionSymbol>& symbols,
                                          std::size_t dim) {
    std::vector<Polynomial> rels;
    for (std::size_t i = dim; i < symbols.size(); ++i) {
        const auto& s = symbols[i];
        if (!s.visible || !payload_visible(s, symbols)) continue;
        rels.push_back(symbol_relation(s, i, symbols.size()));
    }
    return rels;
}

struct RangeIv {
    double lo = 0, hi = 0;
    bool known = false;
};

RangeIv range_of_poly(const Polynomial& p, const std::vector<RangeIv>& var_ranges) {
    RangeIv acc{0, 0, true};
    for (const auto& [m, c] : p.terms()) {
        double tlo = to_double(c), thi = to_double(c);
        for (std::size_t i = 0; i < p.nvars(); ++i) {
            for (std::uint32_t e = 0; e < m.exps[i]; ++e) {
                if (i >= var_ranges.size() || !var_ranges[i].known) return {0, 0, false};
                double a = var_ranges[i].lo, b = var_ranges[i].hi;
                double c1 = tlo * a, c2 = tlo * b, c3 = thi * a, c4 = thi * b;
                tlo = std::min(std::min(c1, c2), std::min(c3, c4));
                thi = std::max(std::max(c1, c2), std::max(c3, c4));
            }
        }
        acc.lo += tlo;
        acc.hi += thi;
    }
    return acc;
}

// Evaluate a polynomial in tower variables at a domain point.
double eval_on_X(const TowerState& tw, const Polynomial& p, std::span<const double> x) {
    std::vector<double> vals = tw.eval_point(x);
    return p.eval(std::span<const double>(vals.data(), p.nvars()));
}

std::vector<std::vector<double>> spot_samples(const TowerState& tw, const Tolerances& tol) {
    if (!tw.domain.box) return {};
    return sample_domain(tw.domain, tol.check_samples, tol.seed);
}

}  // namespace

// --- archimedean bookkeeping -------------------------------------------

ArchimedeanWitness archimedean_status(const TowerState& tw) {
    const std::size_t n = tw.nvars();
    ArchimedeanWitness w;
    w.vars.assign(n, VarStatus{});

    struct LinearBounds {
        std::optional<Rational> upper, lower;
        std::string via_upper, via_lower;
    };
    std::vector<LinearBounds> linear(n);
    std::vector<std::optional<std::pair<Rational, std::string>>> quad(n);

    auto gen_name = [&](const QmGenerator& g) {
        auto nm = tw.names();
        return to_string(g.poly, nm);
    };

    for (const auto& gen : tw.qmodule) {
        const Polynomial& p = gen.poly;
        // Split into constant and variable terms.
        Rational c0 = p.constant_value();
        bool pure_squares = true, pure_linear = true;
        std::vector<std::pair<std::size_t, Rational>> squares, linears;
        for (const auto& [m, c] : p.terms()) {
            if (m.is_one()) continue;
            std::size_t var = 0;
            int nz = 0;
            for (std::size_t i = 0; i < m.nvars(); ++i)
                if (m.exps[i] > 0) {
                    var = i;
                    ++nz;
                }
            if (nz != 1) {
                pure_squares = pure_linear = false;
                break;
            }
            if (m.exps[var] == 2 && c < 0) squares.emplace_back(var, c);
            else pure_squares = false;
            if (m.exps[var] == 1) linears.emplace_back(var, c);
            else pure_linear = false;
        }
        if (pure_squares && !squares.empty() && c0 > 0) {
            // c0 - sum a_i v_i^2 >= 0 bounds each v_i^2 by c0/a_i.
            for (const auto& [var, c] : squares) {
                Rational bound = c0 / (-c);
                if (!quad[var] || quad[var]->first > bound)
                    quad[var] = std::make_pair(bound, gen_name(gen));
            }
        }
        if (pure_linear && linears.size() == 1) {
            auto [var, c] = linears[0];
            Rational cut = -c0 / c;
            if (c < 0) {  // c0 + c*v >= 0  =>  v <= -c0/c
                if (!linear[var].upper || *linear[var].upper > cut) {
                    linear[var].upper = cut;
                    linear[var].via_upper = gen_name(gen);
                }
            } else {  // v >= -c0/c
                if (!linear[var].lower || *linear[var].lower < cut) {
                    linear[var].lower = cut;
                    linear[var].via_lower = gen_name(gen);
                }
            }
        }
    }

    std::vector<RangeIv> ranges(n);
    for (std::size_t i = 0; i < n; ++i) {
        VarStatus& st = w.vars[i];
        const FunctionSymbol& s = tw.symbols[i];
        auto apply_bounds = [&](bool required) {
            if (quad[i]) {
                st.kind = BoundKind::Bounded;
                st.bound = quad[i]->first;
                st.via = quad[i]->second;
                double r = std::sqrt(to_double(st.bound));
                ranges[i] = {-r, r, true};
                st.range_known = true;
                st.lo = -r;
                st.hi = r;
            } else if (linear[i].upper && linear[i].lower) {
                st.kind = BoundKind::Bounded;
                Rational u = *linear[i].upper, l = *linear[i].lower;
                Rational uu = u * u, ll = l * l;
                st.bound = std::max(uu, ll);
                st.via = linear[i].via_upper + ", " + linear[i].via_lower;
                ranges[i] = {to_double(l), to_double(u), true};
                st.range_known = true;
                st.lo = to_double(l);
                st.hi = to_double(u);
            } else if (required) {
                st.kind = BoundKind::Unbounded;
            }
        };
        switch (s.kind) {
            case SymbolKind::Base:
                st.kind = BoundKind::Unbounded;
                apply_bounds(true);
                // A domain box still provides a sampling range (the
                // positivity set may exceed it; the flag stays honest).
                if (!ranges[i].known && tw.domain.box) {
                    ranges[i] = {to_double((*tw.domain.box)[i].first),
                                 to_double((*tw.domain.box)[i].second), true};
                    st.range_known = true;
                    st.window_only = true;
                    st.lo = ranges[i].lo;
                    st.hi = ranges[i].hi;
                    if (st.kind == BoundKind::Unbounded && st.via.empty())
                        st.via = "domain box (sampling window only)";
                }
                break;
            case SymbolKind::Reciprocal:
                st.kind = BoundKind::Unbounded;
                st.via = "reciprocal is never integral";
                apply_bounds(true);
                break;
            case SymbolKind::BasePoly:
            case SymbolKind::OddRoot:
            case SymbolKind::EvenRoot:
            case SymbolKind::Piecewise:
            case SymbolKind::Characteristic: {
                st.kind = BoundKind::Integral;
                st.via = "relation " + to_string(tw.nf(symbol_relation(s, i, n)), tw.names());
                // Range from the payload ranges when available.
                if (s.kind == SymbolKind::Characteristic) {
                    ranges[i] = {0, 1, true};
                } else if (s.kind == SymbolKind::BasePoly) {
                    ranges[i] = range_of_poly(s.g, ranges);
                } else if (s.kind == SymbolKind::OddRoot || s.kind == SymbolKind::EvenRoot) {
                    RangeIv rg = range_of_poly(s.g, ranges);
                    if (rg.known) {
                        double inv = 1.0 / s.root_exp;
                        if (s.kind == SymbolKind::EvenRoot) {
                            // On the variety f^s = g only |f| is pinned, so
                            // keep the symmetric range.
                            double m = std::pow(std::max(rg.hi, 0.0), inv);
                            ranges[i] = {-m, m, true};
                        } else {
                            auto oddroot = [&](double v) {
                                return std::copysign(std::pow(std::abs(v), inv), v);
                            };
                            ranges[i] = {oddroot(rg.lo), oddroot(rg.hi), true};
                        }
                    }
                } else {  // Piecewise: hull of both branch ranges
                    RangeIv rg = range_of_poly(s.g, ranges), rh = range_of_poly(s.h, ranges);
                    if (rg.known && rh.known)
                        ranges[i] = {std::min(rg.lo, rh.lo), std::max(rg.hi, rh.hi), true};
                }
                // An explicit bound generator may sharpen the range.
                if (quad[i]) {
                    double r = std::sqrt(to_double(quad[i]->first));
                    if (ranges[i].known) {
                        ranges[i].lo = std::max(ranges[i].lo, -r);
                        ranges[i].hi = std::min(ranges[i].hi, r);
                    } else {
                        ranges[i] = {-r, r, true};
                    }
                }
                st.range_known = ranges[i].known;
                st.lo = ranges[i].lo;
                st.hi = ranges[i].hi;
                break;
            }
        }
    }
    w.archimedean = std::all_of(w.vars.begin(), w.vars.end(), [](const VarStatus& v) {
        return v.kind != BoundKind::Unbounded;
    });
    return w;
}

// --- presentation -------------------------------------------------------

namespace {

Polynomial compress_poly(const Polynomial& p, const std::vector<std::size_t>& new_index,
                         std::size_t new_nvars) {
    Polynomial out(new_nvars);
    for (const auto& [m, c] : p.terms()) {
        Monomial mm(new_nvars);
        for (std::size_t i = 0; i < m.nvars(); ++i) {
            if (m.exps[i] == 0) continue;
            if (new_index[i] == SIZE_MAX)
                throw std::logic_error("polynomial references a hidden variable");
            mm.exps[new_index[i]] = m.exps[i];
        }
        out.add_term(mm, c);
    }
    return out;
}

}  // namespace

Polynomial Presentation::compress(const Polynomial& p) const {
    return compress_poly(p, index_of, nvars);
}

Presentation presentation(const TowerState& tw) {
    Presentation pr;
    pr.index_of.assign(tw.nvars(), SIZE_MAX);
    for (std::size_t i = 0; i < tw.nvars(); ++i) {
        if (!tw.symbols[i].visible) continue;
        pr.index_of[i] = pr.nvars++;
        pr.names.push_back(tw.symbols[i].name);
        pr.symbol_of.push_back(i);
        if (tw.symbols[i].kind == SymbolKind::Characteristic)
            pr.binary_vars.push_back(pr.nvars - 1);
    }
    pr.ideal.nvars = pr.nvars;
    pr.ideal.order = TermOrder::grevlex(pr.nvars);
    for (const auto& g : tw.ideal.gens) pr.ideal.gens.push_back(pr.compress(g));
    for (const auto& g : tw.qmodule) {
        QmGenerator gg = g;
        gg.poly = pr.compress(g.poly);
        pr.gens.push_back(std::move(gg));
    }
    return pr;
}

// --- construction -------------------------------------------------------

namespace {

void require_new_name(const TowerState& tw, const std::string& name) {
    if (name.empty()) throw std::invalid_argument("symbol name must be nonempty");
    if (tw.symbol_index(name)) throw std::invalid_argument("duplicate symbol name '" + name + "'");
}

struct NewGen {
    Polynomial poly;
    Provenance prov;
    std::string note;
};

TowerState extend(const TowerState& tw, FunctionSymbol sym, std::vector<NewGen> new_gens,
                  TowerMode new_mode, const std::vector<std::string>& extra_notes) {
    TowerState out = tw;
    const std::size_t n = tw.nvars() + 1;
    out.symbols.push_back(std::move(sym));
    for (auto& r : out.relations) r = r.extended(n);
    out.relations.push_back(symbol_relation(out.symbols.back(), n - 1, n));
    out.ideal = ideal_of(out.relations, n);
    for (auto& g : out.qmodule) g.poly = g.poly.extended(n);
    for (auto& g : new_gens) {
        Polynomial nf = out.nf(g.poly);
        if (nf.is_zero()) continue;  // generator collapsed into the ideal
        out.qmodule.push_back({std::move(nf), g.prov, static_cast<int>(n), std::move(g.note)});
    }
    out.mode = weaker_mode(tw.mode, new_mode);
    out.mode_history.push_back(out.mode);
    for (const auto& note : extra_notes) out.notes.push_back(note);
    out.witness = archimedean_status(out);
    return out;
}

}  // namespace

TowerState init_tower(const DomainDescription& domain, std::vector<std::string> base_names,
                      const std::vector<Polynomial>& base_gens, std::optional<Rational> ball_bound,
                      const Tolerances& tol) {
    domain.validate();
    if (base_names.size() != domain.dim)
        throw std::invalid_argument("need one name per base variable");
    TowerState tw;
    tw.domain = domain;
    for (std::size_t i = 0; i < domain.dim; ++i) {
        for (std::size_t j = 0; j < i; ++j)
            if (base_names[j] == base_names[i])
                throw std::invalid_argument("duplicate base variable name");
        FunctionSymbol s;
        s.name = base_names[i];
        s.kind = SymbolKind::Base;
        tw.symbols.push_back(std::move(s));
    }
    tw.ideal = ideal_of({}, domain.dim);
    for (const auto& g : base_gens) {
        if (g.nvars() != domain.dim)
            throw std::invalid_argument("base generator has wrong variable count");
        if (g.is_zero()) throw std::invalid_argument("zero base generator");
        tw.qmodule.push_back({g, Provenance::Base, static_cast<int>(domain.dim), ""});
    }
    if (ball_bound) {
        Polynomial ball = Polynomial::constant(domain.dim, *ball_bound);
        for (std::size_t i = 0; i < domain.dim; ++i)
            ball -= Polynomial::variable(domain.dim, i) * Polynomial::variable(domain.dim, i);
        tw.qmodule.push_back({ball, Provenance::Bound, static_cast<int>(domain.dim), "ball bound"});
    }
    tw.mode = TowerMode::Exact;
    tw.mode_history.assign(domain.dim, TowerMode::Exact);

    // Spot-check the nonnegativity claim of the base generators on X.
    for (const auto& x : spot_samples(tw, tol)) {
        for (const auto& g : tw.qmodule) {
            double v = g.poly.eval(std::span<const double>(x.data(), x.size()));
            if (v < -tol.pos_tol)
                throw witness_error("base generator " + to_string(g.poly, base_names) +
                                        " is negative on a sampled domain point",
                                    x);
        }
    }
    tw.witness = archimedean_status(tw);
    return tw;
}

TowerState adjoin_base_poly(const TowerState& tw, const std::string& name, const Polynomial& p) {
    require_new_name(tw, name);
    if (p.nvars() > tw.nvars()) throw std::invalid_argument("payload references future variables");
    FunctionSymbol s;
    s.name = name;
    s.kind = SymbolKind::BasePoly;
    s.g = p.extended(tw.nvars());
    s.continuous = true;
    return extend(tw, std::move(s), {}, tw.mode, {});
}

TowerState adjoin_odd_root(const TowerState& tw, const std::string& name, const Polynomial& g,
                           int r) {
    require_new_name(tw, name);
    if (r < 3 || r % 2 == 0) throw std::invalid_argument("odd root exponent must be odd and >= 3");
    FunctionSymbol s;
    s.name = name;
    s.kind = SymbolKind::OddRoot;
    s.g = g.extended(tw.nvars());
    s.root_exp = r;
    return extend(tw, std::move(s), {}, tw.mode, {});
}

namespace {

// Exact nonnegativity / no-zero checks for univariate payloads over an
// interval domain; returns nullopt when the setup is not exact.
struct ExactCheck {
    bool applicable = false;
    bool failed = false;
    std::vector<double> witness;
    std::string message;
};

ExactCheck exact_nonneg_on_X(const TowerState& tw, const Polynomial& g, const Tolerances&) {
    ExactCheck res;
    if (tw.domain.dim != 1 || !tw.domain.box || !tw.domain.compact) return res;
    if (single_variable(g) != std::optional<std::size_t>(0)) return res;
    auto region = interval_region(tw.domain.constraints, (*tw.domain.box)[0].first,
                                  (*tw.domain.box)[0].second);
    if (!region) return res;
    res.applicable = true;
    Polynomial gu = compress_univariate(g, 0);
    for (const auto& piece : *region) {
        if (piece.lo == piece.hi) {
            if (gu.eval_exact(std::span<const Rational>(&piece.lo, 1)) < 0) {
                res.failed = true;
                res.witness = {to_double(piece.lo)};
                res.message = "negative at an isolated domain point";
                return res;
            }
            continue;
        }
        SignProfile prof = sturm_profile(gu, piece.lo, piece.hi);
        for (std::size_t i = 0; i < prof.signs.size(); ++i) {
            if (prof.signs[i] < 0) {
                res.failed = true;
                res.witness = {to_double(prof.sign_samples[i])};
                res.message = "negative on an open subinterval of X";
                return res;
            }
        }
    }
    return res;
}

ExactCheck exact_nonzero_on_X(const TowerState& tw, const Polynomial& g) {
    ExactCheck res;
    if (tw.domain.dim != 1 || !tw.domain.box) return res;
    if (single_variable(g) != std::optional<std::size_t>(0)) return res;
    auto region = interval_region(tw.domain.constraints, (*tw.domain.box)[0].first,
                                  (*tw.domain.box)[0].second);
    if (!region) return res;
    res.applicable = true;
    Polynomial gu = compress_univariate(g, 0);
    for (const auto& piece : *region) {
        if (piece.lo == piece.hi) {
            if (gu.eval_exact(std::span<const Rational>(&piece.lo, 1)) == 0) {
                res.failed = true;
                res.witness = {to_double(piece.lo)};
                res.message = "vanishes at an isolated domain point";
                return res;
            }
            continue;
        }
        SignProfile prof = sturm_profile(gu, piece.lo, piece.hi);
        if (!prof.roots.empty()) {
            res.failed = true;
            res.witness = {to_double(prof.roots.front().midpoint())};
            res.message = "vanishes inside X";
            return res;
        }
    }
    return res;
}

}  // namespace

TowerState adjoin_even_root(const TowerState& tw, const std::string& name, const Polynomial& g,
                            int s_exp, const Tolerances& tol) {
    require_new_name(tw, name);
    if (s_exp < 2 || s_exp % 2 == 1)
        throw std::invalid_argument("even root exponent must be even and >= 2");
    Polynomial gg = g.extended(tw.nvars());

    ExactCheck exact = exact_nonneg_on_X(tw, gg, tol);
    if (exact.applicable) {
        if (exact.failed)
            throw witness_error("even root requires g >= 0 on X: " + exact.message, exact.witness);
    } else {
        for (const auto& x : spot_samples(tw, tol)) {
            if (eval_on_X(tw, gg, std::span<const double>(x.data(), x.size())) < -tol.pos_tol)
                throw witness_error("even root requires g >= 0 on X: negative sample", x);
        }
    }

    FunctionSymbol s;
    s.name = name;
    s.kind = SymbolKind::EvenRoot;
    s.g = gg;
    s.root_exp = s_exp;
    Polynomial f = Polynomial::variable(tw.nvars() + 1, tw.nvars());
    return extend(tw, std::move(s), {{f, Provenance::Adjunction, "even root value"}}, tw.mode, {});
}

TowerState adjoin_reciprocal(const TowerState& tw, const std::string& name, const Polynomial& g,
                             std::optional<Rational> bound, const Tolerances& tol) {
    require_new_name(tw, name);
    Polynomial gg = g.extended(tw.nvars());
    if (gg.is_zero()) throw std::invalid_argument("reciprocal of zero");

    ExactCheck exact = exact_nonzero_on_X(tw, gg);
    if (exact.applicable) {
        if (exact.failed)
            throw witness_error("reciprocal requires g != 0 on X: " + exact.message, exact.witness);
    } else {
        auto samples = spot_samples(tw, tol);
        int prev_sign = 0;
        for (const auto& x : samples) {
            double v = eval_on_X(tw, gg, std::span<const double>(x.data(), x.size()));
            if (v == 0.0)
                throw witness_error("reciprocal requires g != 0 on X: zero sample", x);
            int sgn_v = v > 0 ? 1 : -1;
            if (prev_sign != 0 && sgn_v != prev_sign)
                throw witness_error("reciprocal requires g != 0 on X: sign change across samples", x);
            prev_sign = sgn_v;
        }
    }

    FunctionSymbol s;
    s.name = name;
    s.kind = SymbolKind::Reciprocal;
    s.g = gg;
    s.bound = bound;

    std::vector<NewGen> gens;
    if (bound) {
        if (*bound <= 0) throw std::invalid_argument("reciprocal bound must be positive");
        for (const auto& x : spot_samples(tw, tol)) {
            double v = eval_on_X(tw, gg, std::span<const double>(x.data(), x.size()));
            if (v != 0.0 && 1.0 / (v * v) > to_double(*bound) + tol.pos_tol)
                throw witness_error("declared reciprocal bound violated at a sampled point", x);
        }
        const std::size_t n = tw.nvars() + 1;
        Polynomial f = Polynomial::variable(n, n - 1);
        gens.push_back({Polynomial::constant(n, *bound) - f * f, Provenance::Bound,
                        "reciprocal bound"});
    }
    return extend(tw, std::move(s), std::move(gens), tw.mode, {});
}

TowerState adjoin_piecewise(const TowerState& tw, const std::string& name, const Polynomial& g,
                            const Polynomial& h, const Polynomial& q, PiecewiseMode mode_req,
                            bool force, const Tolerances& tol) {
    require_new_name(tw, name);
    Polynomial gg = g.extended(tw.nvars()), hh = h.extended(tw.nvars()), qq = q.extended(tw.nvars());

    RegularityData data{gg, hh, qq};
    // The X-level check also settles continuity of the new symbol.
    RegularityResult on_x = check_regularity(tw, data, RegularityCase::InjCase4,
                                             RegularityMethod::Auto, tol);
    RegularityResult gate = (mode_req == PiecewiseMode::Exact)
                                ? on_x
                                : check_regularity(tw, data, RegularityCase::AlinjCase4,
                                                   RegularityMethod::Auto, tol);

    std::vector<std::string> notes;
    TowerMode new_mode =
        mode_req == PiecewiseMode::Exact ? TowerMode::Exact : TowerMode::Closure;
    if (gate.verdict != RegularityResult::Verdict::Pass) {
        if (!force) {
            if (gate.verdict == RegularityResult::Verdict::Fail)
                throw witness_error("piecewise regularity failed: " + gate.detail,
                                    gate.witness.value_or(std::vector<double>{}));
            throw std::runtime_error("piecewise regularity undecided: " + gate.detail);
        }
        new_mode = TowerMode::Unverified;
        notes.push_back("forced piecewise adjunction of " + name + " with regularity " +
                        (gate.verdict == RegularityResult::Verdict::Fail ? "Fail" : "Undecided"));
    } else {
        notes.push_back("regularity Pass for " + name + " (" +
                        (gate.method == RegularityMethod::SturmExact
                             ? "SturmExact"
                             : "Sampling n=" + std::to_string(gate.samples)) +
                        ")");
    }

    FunctionSymbol s;
    s.name = name;
    s.kind = SymbolKind::Piecewise;
    s.g = gg;
    s.h = hh;
    s.q = qq;
    s.continuous = on_x.verdict == RegularityResult::Verdict::Pass;

    const std::size_t n = tw.nvars() + 1;
    Polynomial f = Polynomial::variable(n, n - 1);
    Polynomial dg = f - gg.extended(n), dh = f - hh.extended(n);
    Polynomial qe = qq.extended(n);
    std::vector<NewGen> gens;
    gens.push_back({-(qe * dg * dg), Provenance::Adjunction, "piecewise: -q(f-g)^2"});
    gens.push_back({qe * dh * dh, Provenance::Adjunction, "piecewise: q(f-h)^2"});
    return extend(tw, std::move(s), std::move(gens), new_mode, notes);
}

TowerState adjoin_characteristic(const TowerState& tw, const std::string& name,
                                 const Polynomial& q, ChiVariant variant, bool force,
                                 const Tolerances& tol) {
    require_new_name(tw, name);
    Polynomial qq = q.extended(tw.nvars());
    RegularityData data;
    data.q = qq;

    std::vector<std::string> notes;
    TowerMode new_mode = TowerMode::Closure;
    if (variant == ChiVariant::CompactContinuous) {
        if (!tw.domain.compact)
            throw std::runtime_error("chi mode=compact requires a compact domain");
        for (const auto& s : tw.symbols)
            if (!s.continuous)
                throw std::runtime_error("chi mode=compact requires all prior symbols continuous; '" +
                                         s.name + "' is not");
    }
    RegularityResult gate =
        check_regularity(tw, data,
                         variant == ChiVariant::CompactContinuous ? RegularityCase::Comp
                                                                  : RegularityCase::AlinjCase5,
                         RegularityMethod::Auto, tol);
    if (gate.verdict != RegularityResult::Verdict::Pass) {
        if (!force) {
            if (gate.verdict == RegularityResult::Verdict::Fail)
                throw witness_error("characteristic regularity failed: " + gate.detail,
                                    gate.witness.value_or(std::vector<double>{}));
            throw std::runtime_error("characteristic regularity undecided: " + gate.detail);
        }
        new_mode = TowerMode::Unverified;
        notes.push_back("forced characteristic adjunction of " + name + " with regularity " +
                        (gate.verdict == RegularityResult::Verdict::Fail ? "Fail" : "Undecided"));
    } else {
        notes.push_back("regularity Pass for " + name + " (" +
                        (gate.method == RegularityMethod::SturmExact
                             ? "SturmExact"
                             : "Sampling n=" + std::to_string(gate.samples)) +
                        ")");
    }

    FunctionSymbol s;
    s.name = name;
    s.kind = SymbolKind::Characteristic;
    s.q = qq;
    s.continuous = false;

    const std::size_t n = tw.nvars() + 1;
    Polynomial f = Polynomial::variable(n, n - 1);
    Polynomial qe = qq.extended(n);
    std::vector<NewGen> gens;
    gens.push_back({qe * f, Provenance::Adjunction, "chi: q*f"});
    gens.push_back({qe * (f - Polynomial::constant(n, Rational(1))), Provenance::Adjunction,
                    "chi: q*(f-1)"});
    return extend(tw, std::move(s), std::move(gens), new_mode, notes);
}

Polynomial separator_generator(const TowerState& tw, std::span<const Rational> y,
                               const Rational& eps) {
    if (eps <= 0) throw std::invalid_argument("separator eps must be positive");
    Presentation pr = presentation(tw);
    if (y.size() != pr.nvars)
        throw std::invalid_argument("separator point has wrong dimension");
    const std::size_t n = tw.nvars();
    Polynomial sep = Polynomial::constant(n, -eps);
    for (std::size_t k = 0; k < pr.nvars; ++k) {
        Polynomial d = Polynomial::variable(n, pr.symbol_of[k]) -
                       Polynomial::constant(n, y[k]);
        sep += d * d;
    }
    return tw.nf(sep);
}

TowerState add_generator(const TowerState& tw, const Polynomial& p, bool claim_nonneg_on_X,
                         Provenance prov, std::optional<TowerMode> asserted_mode,
                         const Tolerances& tol) {
    Polynomial nf = tw.nf(p.extended(tw.nvars()));
    if (nf.is_zero()) throw std::invalid_argument("rejected trivial generator (0 mod ideal)");
    for (const auto& g : tw.qmodule)
        if (g.poly == nf) throw std::invalid_argument("duplicate generator (mod ideal)");

    if (claim_nonneg_on_X) {
        for (const auto& x : spot_samples(tw, tol)) {
            double v = eval_on_X(tw, nf, std::span<const double>(x.data(), x.size()));
            if (v < -tol.pos_tol)
                throw witness_error("claimed-nonnegative generator is negative at a sample", x);
        }
    }

    TowerState out = tw;
    out.qmodule.push_back({nf, prov, static_cast<int>(tw.nvars()), ""});
    if (asserted_mode) {
        out.mode = weaker_mode(tw.mode, *asserted_mode);
        out.notes.push_back("generator added with asserted mode " +
                            std::string(to_string(*asserted_mode)));
    } else {
        out.mode = TowerMode::Unverified;
    }
    if (!out.mode_history.empty()) out.mode_history.back() = out.mode;
    out.witness = archimedean_status(out);
    return out;
}

TowerState hide_symbol(const TowerState& tw, const std::string& name) {
    auto idx = tw.symbol_index(name);
    if (!idx) throw std::invalid_argument("unknown symbol '" + name + "'");
    if (*idx < tw.domain.dim && tw.domain.dim == 1)
        throw std::invalid_argument("cannot hide the only base variable");
    TowerState out = tw;
    out.symbols[*idx].visible = false;
    // The symbol's own adjunction-stage generators leave the presentation
    // with it; anything else referencing it is a hard error.
    std::vector<QmGenerator> kept;
    int dropped = 0;
    for (const auto& g : out.qmodule) {
        if (!g.poly.uses_variable(*idx)) {
            kept.push_back(g);
            continue;
        }
        bool own_footprint = g.stage == static_cast<int>(*idx) + 1 &&
                             (g.prov == Provenance::Adjunction || g.prov == Provenance::Bound);
        if (!own_footprint)
            throw std::invalid_argument("cannot hide '" + name +
                                        "': a quadratic-module generator references it");
        ++dropped;
    }
    out.qmodule = std::move(kept);
    out.relations = rebuild_relations(out.symbols, out.domain.dim);
    out.ideal = ideal_of(out.relations, out.nvars());
    out.notes.push_back("hid symbol " + name + " from the presentation (" +
                        std::to_string(dropped) + " adjunction generators dropped)");
    out.witness = archimedean_status(out);
    return out;
}

TowerState prefix(const TowerState& tw, std::size_t k) {
    if (k < tw.domain.dim || k > tw.nvars())
        throw std::invalid_argument("prefix length out of range");
    TowerState out;
    out.domain = tw.domain;
    out.symbols.assign(tw.symbols.begin(), tw.symbols.begin() + k);
    out.relations = rebuild_relations(out.symbols, out.domain.dim);
    out.ideal = ideal_of(out.relations, k);
    for (const auto& g : tw.qmodule) {
        if (g.stage > static_cast<int>(k)) continue;
        bool fits = true;
        for (std::size_t i = k; i < tw.nvars(); ++i) fits = fits && !g.poly.uses_variable(i);
        if (!fits) continue;
        QmGenerator gg = g;
        Polynomial p(k);
        for (const auto& [m, c] : g.poly.terms()) {
            Monomial mm(k);
            for (std::size_t i = 0; i < k; ++i) mm.exps[i] = m.exps[i];
            p.add_term(mm, c);
        }
        gg.poly = std::move(p);
        out.qmodule.push_back(std::move(gg));
    }
    out.mode_history.assign(tw.mode_history.begin(), tw.mode_history.begin() + k);
    out.mode = out.mode_history.empty() ? TowerMode::Exact : out.mode_history.back();
    out.witness = archimedean_status(out);
    return out;
}

}  // namespace qmt
