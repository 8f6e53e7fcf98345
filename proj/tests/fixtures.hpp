#pragma once

// Shared example towers used across the test suites. Most are built
// through the public adjunction API; a few presentations that carry extra
// relations are assembled directly (and are not meant to round-trip
// through the serializer).

#include <vector>

#include "qmt/explore.hpp"
#include "qmt/tower.hpp"

namespace fixtures {

using namespace qmt;

inline Polynomial P(const std::string& s, const std::vector<std::string>& names) {
    return parse_polynomial(s, names);
}

inline DomainDescription interval_domain(long lo, long hi, bool compact = true) {
    DomainDescription d;
    d.dim = 1;
    d.box = {{make_rational(lo), make_rational(hi)}};
    d.compact = compact;
    return d;
}

// [-1,1], Q0 = QM(1-t^2); stage 1 adds |t|, stage 2 adds chi_{t>=0}.
inline TowerState tower_4_2(int stages = 2, const Tolerances& tol = {}) {
    DomainDescription dom = interval_domain(-1, 1);
    dom.constraints = {P("1 - t^2", {"t"})};
    TowerState tw = init_tower(dom, {"t"}, {P("1 - t^2", {"t"})}, std::nullopt, tol);
    if (stages >= 1) tw = adjoin_even_root(tw, "a", P("t^2", {"t"}), 2, tol);
    if (stages >= 2)
        tw = adjoin_characteristic(tw, "c", P("t", {"t", "a"}), ChiVariant::CompactContinuous,
                                   false, tol);
    return tw;
}

// [-2,2], Q = QM(2-t, 2+t).
inline TowerState tower_4_4_base(const Tolerances& tol = {}) {
    DomainDescription dom = interval_domain(-2, 2);
    TowerState tw =
        init_tower(dom, {"t"}, {P("2 - t", {"t"}), P("2 + t", {"t"})}, std::nullopt, tol);
    return tw;
}

// The deliberately irregular adjunction: chi of q = -t^2(t+1)(t-1), forced.
inline TowerState tower_4_4_forced(const Tolerances& tol = {}) {
    TowerState tw = tower_4_4_base(tol);
    return adjoin_characteristic(tw, "f", P("t^2 - t^4", {"t"}), ChiVariant::CompactContinuous,
                                 /*force=*/true, tol);
}

// Half circle through an even root: x in [-1,1], y = sqrt(1-x^2).
// Ideal <x^2+y^2-1>, Q = QM(1-x^2, y); image and positivity set agree.
inline TowerState tower_half_circle(const Tolerances& tol = {}) {
    DomainDescription dom = interval_domain(-1, 1);
    dom.constraints = {P("1 - x^2", {"x"})};
    TowerState tw = init_tower(dom, {"x"}, {P("1 - x^2", {"x"})}, std::nullopt, tol);
    return adjoin_even_root(tw, "y", P("1 - x^2", {"x"}), 2, tol);
}

// Full circle with Q = sum of squares only: same presentation as the half
// circle but with an empty generator list, assembled directly.
inline TowerState tower_full_circle() {
    TowerState tw = tower_half_circle();
    tw.qmodule.clear();
    tw.mode = TowerMode::Unverified;  // image (upper half) differs from K (full circle)
    tw.notes.push_back("direct presentation: circle with Q = sums of squares");
    tw.witness = archimedean_status(tw);
    return tw;
}

// xy = 1 branch: x in [71/100, 141/100], y = 1/x with bound 2, so that
// Q = QM(2-x^2, 2-y^2).
inline TowerState tower_hyperbola(const Tolerances& tol = {}) {
    DomainDescription dom;
    dom.dim = 1;
    dom.box = {{make_rational(71, 100), make_rational(141, 100)}};
    dom.compact = true;
    TowerState tw = init_tower(dom, {"x"}, {P("2 - x^2", {"x"})}, std::nullopt, tol);
    return adjoin_reciprocal(tw, "y", P("x", {"x"}), make_rational(2), tol);
}

// t in [-1,1]; c = cbrt(t); f = c on {t>=0}, t^2 on {t<0}.
inline TowerState tower_4_1(const Tolerances& tol = {}) {
    DomainDescription dom = interval_domain(-1, 1);
    dom.constraints = {P("1 - t^2", {"t"})};
    TowerState tw = init_tower(dom, {"t"}, {P("1 - t^2", {"t"})}, std::nullopt, tol);
    tw = adjoin_odd_root(tw, "c", P("t", {"t"}), 3);
    return adjoin_piecewise(tw, "f", P("c", {"t", "c"}), P("t^2", {"t", "c"}), P("t", {"t", "c"}),
                            PiecewiseMode::Exact, false, tol);
}

// The three-relation presentation y^2=y, z^2=z, xyz=0 over [-2,2] with
// Q = QM(2-x, 2+x, xy, x(y-1), qz, q(z-1)), q = -x^2(x+1). Assembled
// directly; the positivity set has an isolated point on the (y,z)=(0,1)
// branch that the image closure misses.
inline TowerState tower_4_6_direct() {
    const std::vector<std::string> n1 = {"x"};
    const std::vector<std::string> n3 = {"x", "y", "z"};
    TowerState tw;
    tw.domain = interval_domain(-2, 2);
    FunctionSymbol x;
    x.name = "x";
    x.kind = SymbolKind::Base;
    FunctionSymbol y;
    y.name = "y";
    y.kind = SymbolKind::Characteristic;
    y.q = P("x", n1);
    y.continuous = false;
    FunctionSymbol z;
    z.name = "z";
    z.kind = SymbolKind::Characteristic;
    z.q = P("0 - x^3 - x^2", {"x", "y"}).extended(2);
    z.continuous = false;
    tw.symbols = {x, y, z};
    tw.relations = {P("y^2 - y", n3), P("z^2 - z", n3), P("x*y*z", n3)};
    tw.ideal = buchberger(tw.relations, TermOrder::grevlex(3));
    auto add = [&](const std::string& s, Provenance prov) {
        tw.qmodule.push_back({tw.nf(P(s, n3)), prov, 3, ""});
    };
    add("2 - x", Provenance::Base);
    add("2 + x", Provenance::Base);
    add("x*y", Provenance::Adjunction);
    add("x*y - x", Provenance::Adjunction);          // x(y-1)
    add("0 - x^3*z - x^2*z", Provenance::Adjunction);  // q z
    add("0 - x^3*z - x^2*z + x^3 + x^2", Provenance::Adjunction);  // q(z-1) = qz - q
    tw.mode = TowerMode::Unverified;
    tw.mode_history = {TowerMode::Exact, TowerMode::Closure, TowerMode::Unverified};
    tw.notes.push_back("direct presentation with the extra relation xyz");
    tw.witness = archimedean_status(tw);
    return tw;
}

// The (u, v) = (x, |x|-|y|) picture: u and v generate the visible algebra,
// Q = QM(1-u^2, 1-v^2); y, |x|, |y| are evaluation scaffolding.
inline TowerState tower_uv_butterfly(const Tolerances& tol = {}) {
    DomainDescription dom;
    dom.dim = 2;
    dom.box = {{make_rational(-12, 10), make_rational(12, 10)},
               {make_rational(-12, 10), make_rational(12, 10)}};
    dom.compact = true;
    TowerState tw = init_tower(dom, {"x", "y"}, {}, std::nullopt, tol);
    // 1-u^2 cuts K_{Q,X} properly inside X, so no nonnegativity claim; add
    // it before the scaffolding so its stored form stays in base terms.
    tw = add_generator(tw, P("1 - x^2", {"x", "y"}), false, Provenance::Manual, std::nullopt, tol);
    tw = adjoin_even_root(tw, "ax", P("x^2", {"x", "y"}), 2, tol);
    tw = adjoin_even_root(tw, "ay", P("y^2", {"x", "y", "ax"}), 2, tol);
    tw = adjoin_base_poly(tw, "v", P("ax - ay", {"x", "y", "ax", "ay"}));
    tw = add_generator(tw, P("1 - v^2", {"x", "y", "ax", "ay", "v"}), false, Provenance::Manual,
                       std::nullopt, tol);
    tw = hide_symbol(tw, "y");
    tw = hide_symbol(tw, "ax");
    tw = hide_symbol(tw, "ay");
    return tw;
}

}  // namespace fixtures
