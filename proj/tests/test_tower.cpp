#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "qmt/explore.hpp"
#include "qmt/tower.hpp"

using namespace qmt;
using fixtures::P;

namespace {

// Relations vanish and generators are nonnegative along the image.
void check_image_consistency(const TowerState& tw, int n = 1000) {
    auto xs = sample_domain(tw.domain, n, 99);
    for (const auto& x : xs) {
        std::vector<double> vals = tw.eval_point(std::span<const double>(x.data(), x.size()));
        for (const auto& r : tw.relations) {
            REQUIRE(std::abs(r.eval(vals)) <= 1e-7);
        }
        for (const auto& g : tw.qmodule) {
            REQUIRE(g.poly.eval(vals) >= -1e-7);
        }
    }
}

}  // namespace

TEST_CASE("init_tower basics") {
    SUBCASE("interval with one generator is archimedean and exact") {
        TowerState tw = fixtures::tower_4_2(0);
        CHECK(tw.mode == TowerMode::Exact);
        CHECK(tw.witness.archimedean);
        CHECK(tw.witness.vars[0].kind == BoundKind::Bounded);
        CHECK(tw.witness.vars[0].bound == 1);
    }
    SUBCASE("free plane is exact but not archimedean") {
        DomainDescription dom;
        dom.dim = 2;
        TowerState tw = init_tower(dom, {"x", "y"}, {});
        CHECK(tw.mode == TowerMode::Exact);
        CHECK(!tw.witness.archimedean);
        CHECK(tw.witness.vars[0].kind == BoundKind::Unbounded);
    }
    SUBCASE("linear pair bounds the variable") {
        TowerState tw = fixtures::tower_4_4_base();
        CHECK(tw.witness.archimedean);
        CHECK(tw.witness.vars[0].kind == BoundKind::Bounded);
        CHECK(tw.witness.vars[0].bound == 4);
    }
    SUBCASE("ball bound marks base variables bounded") {
        DomainDescription dom;
        dom.dim = 2;
        dom.box = {{make_rational(-1), make_rational(1)}, {make_rational(-1), make_rational(1)}};
        dom.compact = true;
        TowerState tw = init_tower(dom, {"x", "y"}, {}, make_rational(2));
        CHECK(tw.witness.archimedean);
        CHECK(tw.witness.vars[0].kind == BoundKind::Bounded);
        CHECK(tw.witness.vars[1].bound == 2);
    }
    SUBCASE("negative base generator claim is rejected") {
        DomainDescription dom = fixtures::interval_domain(-1, 1);
        CHECK_THROWS_AS(init_tower(dom, {"t"}, {P("t", {"t"})}, std::nullopt),
                        witness_error);
    }
}

TEST_CASE("odd root adjunction") {
    DomainDescription dom = fixtures::interval_domain(-1, 1);
    dom.constraints = {P("1 - t^2", {"t"})};
    TowerState tw = init_tower(dom, {"t"}, {P("1 - t^2", {"t"})});
    std::size_t gens_before = tw.qmodule.size();

    TowerState t2 = adjoin_odd_root(tw, "u", P("t", {"t"}), 3);
    CHECK(t2.qmodule.size() == gens_before);  // Q unchanged
    CHECK(t2.mode == TowerMode::Exact);
    CHECK(t2.witness.vars[1].kind == BoundKind::Integral);
    CHECK(t2.relations.back() == P("u^3 - t", {"t", "u"}));
    check_image_consistency(t2);

    SUBCASE("cube root of one is the real branch") {
        TowerState t3 = adjoin_odd_root(tw, "u", P("1", {"t"}), 3);
        double x = 0.3;
        CHECK(t3.eval_point(std::span<const double>(&x, 1))[1] == doctest::Approx(1.0));
    }
    SUBCASE("cube root of t^3 evaluates as t") {
        TowerState t3 = adjoin_odd_root(tw, "u", P("t^3", {"t"}), 3);
        for (double x : {-0.9, -0.2, 0.0, 0.4, 1.0}) {
            auto vals = t3.eval_point(std::span<const double>(&x, 1));
            CHECK(vals[1] == doctest::Approx(x).epsilon(1e-12));
        }
    }
    SUBCASE("even exponent is rejected") {
        CHECK_THROWS(adjoin_odd_root(tw, "u", P("t", {"t"}), 4));
    }
}

TEST_CASE("even root adjunction") {
    SUBCASE("absolute value gains a generator") {
        TowerState tw = fixtures::tower_4_2(1);
        REQUIRE(tw.qmodule.size() == 2);
        CHECK(tw.qmodule.back().poly == P("a", {"t", "a"}));
        CHECK(tw.mode == TowerMode::Exact);
        check_image_consistency(tw);
        // |t| evaluates correctly.
        double x = -0.4;
        CHECK(tw.eval_point(std::span<const double>(&x, 1))[1] == doctest::Approx(0.4));
    }
    SUBCASE("negative g is rejected with the sign-profile witness") {
        TowerState tw = fixtures::tower_4_2(0);
        try {
            adjoin_even_root(tw, "r", P("t", {"t"}), 2);
            FAIL("expected witness_error");
        } catch (const witness_error& e) {
            REQUIRE(e.witness.size() == 1);
            CHECK(e.witness[0] == doctest::Approx(-0.5));
        }
    }
}

TEST_CASE("reciprocal adjunction") {
    SUBCASE("bounded reciprocal gains N - f^2") {
        TowerState tw = fixtures::tower_hyperbola();
        CHECK(tw.relations.back() == P("x*y - 1", {"x", "y"}));
        REQUIRE(tw.qmodule.size() == 2);
        CHECK(tw.qmodule.back().poly == tw.nf(P("2 - y^2", {"x", "y"})));
        CHECK(tw.witness.archimedean);
        check_image_consistency(tw);
    }
    SUBCASE("reciprocal of a constant") {
        DomainDescription dom = fixtures::interval_domain(-1, 1);
        TowerState tw = init_tower(dom, {"t"}, {});
        TowerState t2 = adjoin_reciprocal(tw, "f", P("2", {"t"}), std::nullopt);
        CHECK(t2.relations.back() == P("2*f - 1", {"t", "f"}));
        CHECK(t2.witness.vars[1].kind == BoundKind::Unbounded);
        CHECK(!t2.witness.archimedean);
        double x = 0.1;
        CHECK(t2.eval_point(std::span<const double>(&x, 1))[1] == doctest::Approx(0.5));
    }
    SUBCASE("zero inside X is rejected exactly") {
        DomainDescription dom = fixtures::interval_domain(-1, 1);
        TowerState tw = init_tower(dom, {"t"}, {});
        CHECK_THROWS_AS(adjoin_reciprocal(tw, "f", P("t", {"t"}), std::nullopt), witness_error);
    }
    SUBCASE("1/t on [1,2] accepts the bound 1") {
        DomainDescription dom = fixtures::interval_domain(1, 2);
        TowerState tw = init_tower(dom, {"t"}, {});
        TowerState t2 = adjoin_reciprocal(tw, "f", P("t", {"t"}), make_rational(1));
        CHECK(t2.qmodule.back().poly == t2.nf(P("1 - f^2", {"t", "f"})));
        double x = 2.0;
        CHECK(t2.eval_point(std::span<const double>(&x, 1))[1] == doctest::Approx(0.5));
        // A bound below sup(1/g)^2 is caught by the sample check.
        CHECK_THROWS_AS(adjoin_reciprocal(tw, "g", P("t", {"t"}), make_rational(1, 2)),
                        witness_error);
    }
    SUBCASE("unbounded reciprocal through a discontinuous denominator") {
        // g = (1-chi)t^2 + chi is strictly positive on X but approaches 0,
        // so 1/g stays unbounded and the tower loses the archimedean flag.
        TowerState tw = fixtures::tower_4_2(2);
        Polynomial g = P("t^2 - t^2*c + c", {"t", "a", "c"});
        TowerState t2 = adjoin_reciprocal(tw, "r", g, std::nullopt);
        CHECK(t2.witness.vars.back().kind == BoundKind::Unbounded);
        CHECK(!t2.witness.archimedean);
        CHECK(tw.witness.archimedean);  // previous stage was archimedean
    }
}

TEST_CASE("piecewise adjunction") {
    SUBCASE("the cube-root/square splice") {
        TowerState tw = fixtures::tower_4_1();
        CHECK(tw.mode == TowerMode::Exact);
        CHECK(tw.symbols.back().continuous);
        REQUIRE(tw.qmodule.size() == 3);
        // -t(f-c)^2 and t(f-t^2)^2, reduced mod the ideal.
        const std::vector<std::string> n = {"t", "c", "f"};
        CHECK(tw.qmodule[1].poly == tw.nf(P("0-t", n) * (P("f - c", n) * P("f - c", n))));
        CHECK(tw.qmodule[2].poly == tw.nf(P("t", n) * (P("f - t^2", n) * P("f - t^2", n))));
        check_image_consistency(tw);
        // f(t) = t^2 left of zero, cbrt(t) right of zero.
        double x = -0.5;
        CHECK(tw.eval_point(std::span<const double>(&x, 1))[2] == doctest::Approx(0.25));
        x = 0.343;
        CHECK(tw.eval_point(std::span<const double>(&x, 1))[2] == doctest::Approx(0.7));
    }
    SUBCASE("degenerate piecewise with g = h always passes") {
        TowerState tw = fixtures::tower_4_4_base();
        TowerState t2 = adjoin_piecewise(tw, "f", P("t^2", {"t"}), P("t^2", {"t"}), P("t", {"t"}),
                                         PiecewiseMode::Exact);
        CHECK(t2.mode == TowerMode::Exact);
    }
    SUBCASE("regularity failure carries the witness t = 0") {
        TowerState tw = fixtures::tower_4_4_base();
        try {
            adjoin_piecewise(tw, "f", P("1 - t^2", {"t"}), P("t^2 - 1", {"t"}),
                             P("t^2 - t^4", {"t"}), PiecewiseMode::Exact);
            FAIL("expected witness_error");
        } catch (const witness_error& e) {
            REQUIRE(e.witness.size() == 1);
            CHECK(e.witness[0] == doctest::Approx(0.0));
        }
    }
}

TEST_CASE("characteristic adjunction") {
    SUBCASE("chi_{t>=0} on [-1,1] via the compact route") {
        TowerState tw = fixtures::tower_4_2(2);
        CHECK(tw.mode == TowerMode::Closure);
        REQUIRE(tw.qmodule.size() == 4);
        const std::vector<std::string> n = {"t", "a", "c"};
        CHECK(tw.qmodule[2].poly == tw.nf(P("t*c", n)));
        CHECK(tw.qmodule[3].poly == tw.nf(P("t*c - t", n)));
        CHECK(!tw.symbols.back().continuous);
        CHECK(tw.witness.archimedean);
        check_image_consistency(tw);
        double x = 0.5;
        CHECK(tw.eval_point(std::span<const double>(&x, 1))[2] == doctest::Approx(1.0));
        x = -0.5;
        CHECK(tw.eval_point(std::span<const double>(&x, 1))[2] == doctest::Approx(0.0));
    }
    SUBCASE("strictly positive q is vacuous") {
        TowerState tw = fixtures::tower_4_4_base();
        TowerState t2 =
            adjoin_characteristic(tw, "f", P("1", {"t"}), ChiVariant::CompactContinuous);
        CHECK(t2.mode == TowerMode::Closure);
    }
    SUBCASE("the irregular q fails with witness t = 0") {
        TowerState tw = fixtures::tower_4_4_base();
        try {
            adjoin_characteristic(tw, "f", P("t^2 - t^4", {"t"}), ChiVariant::CompactContinuous);
            FAIL("expected witness_error");
        } catch (const witness_error& e) {
            REQUIRE(e.witness.size() == 1);
            CHECK(e.witness[0] == doctest::Approx(0.0));
        }
    }
    SUBCASE("compact route refuses discontinuous prior symbols") {
        TowerState tw = fixtures::tower_4_2(2);  // chi already present
        CHECK_THROWS(adjoin_characteristic(tw, "d", P("t", {"t", "a", "c"}),
                                           ChiVariant::CompactContinuous));
    }
    SUBCASE("forcing the irregular q records the downgrade") {
        TowerState tw = fixtures::tower_4_4_forced();
        CHECK(tw.mode == TowerMode::Unverified);
        CHECK(!tw.notes.empty());
    }
}

TEST_CASE("regularity checks") {
    TowerState tw = fixtures::tower_4_4_base();
    RegularityData bad;
    bad.q = P("t^2 - t^4", {"t"});
    RegularityData good;
    good.q = P("1 - t^2", {"t"});

    SUBCASE("comp: exact verdicts on the two reference polynomials") {
        auto r1 = check_regularity(tw, bad, RegularityCase::Comp);
        CHECK(r1.verdict == RegularityResult::Verdict::Fail);
        CHECK(r1.method == RegularityMethod::SturmExact);
        REQUIRE(r1.witness.has_value());
        CHECK((*r1.witness)[0] == doctest::Approx(0.0));

        auto r2 = check_regularity(tw, good, RegularityCase::Comp);
        CHECK(r2.verdict == RegularityResult::Verdict::Pass);
        CHECK(r2.method == RegularityMethod::SturmExact);
    }
    SUBCASE("comp: sampling agrees with the exact verdicts") {
        auto r1 = check_regularity(tw, bad, RegularityCase::Comp, RegularityMethod::Sampling);
        CHECK(r1.verdict == RegularityResult::Verdict::Fail);
        REQUIRE(r1.witness.has_value());
        CHECK(std::abs((*r1.witness)[0]) < 1e-3);

        auto r2 = check_regularity(tw, good, RegularityCase::Comp, RegularityMethod::Sampling);
        CHECK(r2.verdict == RegularityResult::Verdict::Pass);
    }
    SUBCASE("comp: empty zero set is vacuous") {
        RegularityData vac;
        vac.q = P("t^2 + 1", {"t"});
        auto r = check_regularity(tw, vac, RegularityCase::Comp);
        CHECK(r.verdict == RegularityResult::Verdict::Pass);
    }
    SUBCASE("inj4: exact and sampling verdicts agree") {
        RegularityData d;
        d.g = P("1 - t^2", {"t"});
        d.h = P("t^2 - 1", {"t"});
        d.q = P("t^2 - t^4", {"t"});
        auto r1 = check_regularity(tw, d, RegularityCase::InjCase4);
        CHECK(r1.verdict == RegularityResult::Verdict::Fail);
        CHECK(r1.method == RegularityMethod::SturmExact);
        auto r2 = check_regularity(tw, d, RegularityCase::InjCase4, RegularityMethod::Sampling);
        CHECK(r2.verdict == RegularityResult::Verdict::Fail);

        d.q = P("1 - t^2", {"t"});  // zeros at +-1, where g = h = 0
        auto r3 = check_regularity(tw, d, RegularityCase::InjCase4);
        CHECK(r3.verdict == RegularityResult::Verdict::Pass);
        auto r4 = check_regularity(tw, d, RegularityCase::InjCase4, RegularityMethod::Sampling);
        CHECK(r4.verdict == RegularityResult::Verdict::Pass);
    }
    SUBCASE("comp on a planar domain via zero-set projection") {
        DomainDescription dom;
        dom.dim = 2;
        dom.box = {{make_rational(-1), make_rational(1)}, {make_rational(-1), make_rational(1)}};
        dom.compact = true;
        TowerState plane = init_tower(dom, {"x", "y"}, {});
        // x^2 + y^2 - 1/4 vanishes on a circle with negatives inside.
        RegularityData ok;
        ok.q = fixtures::P("x^2 + y^2 - 1/4", {"x", "y"});
        auto r1 = check_regularity(plane, ok, RegularityCase::Comp);
        CHECK(r1.verdict == RegularityResult::Verdict::Pass);
        CHECK(r1.method == RegularityMethod::Sampling);
        // x^2 + y^2 is never negative, so its zero at the origin fails.
        RegularityData bad2;
        bad2.q = fixtures::P("x^2 + y^2", {"x", "y"});
        auto r2 = check_regularity(plane, bad2, RegularityCase::Comp);
        CHECK(r2.verdict == RegularityResult::Verdict::Fail);
        REQUIRE(r2.witness.has_value());
        CHECK(std::hypot((*r2.witness)[0], (*r2.witness)[1]) < 1e-3);
    }
    SUBCASE("alinj5 on the two-branch tower rejects -t^2(t+1)") {
        // B = R[t, chi_{[0,2]}] over [-2,2]: zeros of q on K at (0,0) and
        // (0,1) cannot be approached from {q > 0}.
        TowerState b = init_tower(fixtures::interval_domain(-2, 2), {"t"},
                                  {P("2 - t", {"t"}), P("2 + t", {"t"})});
        b = adjoin_characteristic(b, "s", P("t", {"t"}), ChiVariant::CompactContinuous);
        RegularityData d;
        d.q = P("0 - t^3 - t^2", {"t", "s"});
        auto r = check_regularity(b, d, RegularityCase::AlinjCase5);
        CHECK(r.verdict == RegularityResult::Verdict::Fail);
        REQUIRE(r.witness.has_value());
        CHECK(std::abs((*r.witness)[0]) < 1e-3);  // t coordinate of the bad zero

        // 1-t^2 vanishes at (-1,0) and (1,1), interior to each branch,
        // where both signs are available.
        RegularityData ok;
        ok.q = P("1 - t^2", {"t", "s"});
        auto r2 = check_regularity(b, ok, RegularityCase::AlinjCase5);
        CHECK(r2.verdict == RegularityResult::Verdict::Pass);
    }
}

TEST_CASE("separator and generator management") {
    TowerState tw = fixtures::tower_4_4_forced();
    SUBCASE("separator has the textbook shape") {
        std::vector<Rational> y = {make_rational(0), make_rational(0)};
        Polynomial sep = separator_generator(tw, y, make_rational(1, 2));
        CHECK(sep == tw.nf(P("t^2 + f^2 - 1/2", {"t", "f"})));
    }
    SUBCASE("separator is negative at its target and positive on the image") {
        std::vector<Rational> y = {make_rational(0), make_rational(0)};
        Polynomial sep = separator_generator(tw, y, make_rational(1, 2));
        std::vector<double> target = {0.0, 0.0};
        CHECK(sep.eval(target) < 0);
        for (const auto& x : sample_domain(tw.domain, 200, 5)) {
            auto vals = tw.eval_point(std::span<const double>(x.data(), x.size()));
            CHECK(sep.eval(vals) > 0);
        }
    }
    SUBCASE("adding zero is rejected") {
        CHECK_THROWS(add_generator(tw, Polynomial(2), false));
    }
    SUBCASE("separator against a far point reduces modulo the circle relation") {
        TowerState circle = fixtures::tower_half_circle();
        std::vector<Rational> y = {make_rational(2), make_rational(0)};
        Polynomial sep = separator_generator(circle, y, make_rational(1));
        // (x-2)^2 + y^2 - 1 reduces to 4 - 4x, nonnegative on the circle.
        CHECK(sep == P("4 - 4*x", {"x", "y"}));
        for (const auto& x : sample_domain(circle.domain, 300, 7)) {
            auto vals = circle.eval_point(std::span<const double>(x.data(), x.size()));
            CHECK(sep.eval(vals) >= -1e-12);
        }
    }
    SUBCASE("add_generator resets the mode unless asserted") {
        TowerState t2 = add_generator(tw, P("4 - t^2", {"t", "f"}), true);
        CHECK(t2.mode == TowerMode::Unverified);
    }
    SUBCASE("excluding a negative-branch point of the hyperbola") {
        TowerState hyp = fixtures::tower_hyperbola();
        std::vector<Rational> y = {make_rational(-1), make_rational(-1)};
        TowerState t2 = exclude_point(hyp, y, make_rational(1));
        CHECK(t2.qmodule.back().prov == Provenance::Separator);
        VarietyOptions vo;
        vo.samples = 2000;
        vo.seed = 71;
        PointCloud var = sample_variety(t2, vo);
        for (std::size_t i = 0; i < var.size(); ++i) {
            double du = var.point(i)[0] + 1.0, dv = var.point(i)[1] + 1.0;
            CHECK(du * du + dv * dv >= 1.0 - 1e-6);  // the eps=1 ball is now excluded
        }
    }
    SUBCASE("exclude_point keeps the separator provenance") {
        std::vector<Rational> y = {make_rational(0), make_rational(0)};
        TowerState t2 = exclude_point(tw, y, make_rational(1, 2));
        CHECK(t2.qmodule.back().prov == Provenance::Separator);
        // Excluding an image point fails.
        std::vector<Rational> on_image = {make_rational(1, 2), make_rational(1)};
        CHECK_THROWS_AS(exclude_point(t2, on_image, make_rational(1, 2)), witness_error);
    }
}

TEST_CASE("mode monotonicity along a chain") {
    TowerState tw = fixtures::tower_4_2(2);
    REQUIRE(tw.mode_history.size() == 3);
    CHECK(tw.mode_history[0] == TowerMode::Exact);
    CHECK(tw.mode_history[1] == TowerMode::Exact);
    CHECK(tw.mode_history[2] == TowerMode::Closure);
    for (std::size_t i = 1; i < tw.mode_history.size(); ++i)
        CHECK(static_cast<int>(tw.mode_history[i]) >= static_cast<int>(tw.mode_history[i - 1]));
}

TEST_CASE("archimedean status stability under integral adjunctions") {
    TowerState tw = fixtures::tower_4_2(0);
    CHECK(tw.witness.archimedean);
    tw = adjoin_even_root(tw, "a", P("t^2", {"t"}), 2);
    CHECK(tw.witness.archimedean);
    tw = adjoin_characteristic(tw, "c", P("t", {"t", "a"}), ChiVariant::CompactContinuous);
    CHECK(tw.witness.archimedean);
    tw = adjoin_odd_root(tw, "u", P("t", {"t", "a", "c"}), 3);
    CHECK(tw.witness.archimedean);
    tw = adjoin_piecewise(tw, "p", P("t^2", {"t", "a", "c", "u"}), P("t^2", {"t", "a", "c", "u"}),
                          P("t", {"t", "a", "c", "u"}), PiecewiseMode::Exact);
    CHECK(tw.witness.archimedean);
}

TEST_CASE("tower serialization round trip") {
    for (const TowerState& tw :
         {fixtures::tower_4_2(2), fixtures::tower_4_1(), fixtures::tower_hyperbola(),
          fixtures::tower_4_4_forced(), fixtures::tower_uv_butterfly(),
          fixtures::tower_4_6_direct()}) {
        std::string text = serialize(tw);
        TowerState back = deserialize_tower(text);
        CHECK(serialize(back) == text);
        CHECK(back.nvars() == tw.nvars());
        CHECK(back.mode == tw.mode);
        CHECK(back.qmodule.size() == tw.qmodule.size());
        for (std::size_t i = 0; i < tw.qmodule.size(); ++i)
            CHECK(back.qmodule[i].poly == tw.qmodule[i].poly);
        CHECK(back.ideal.gens.size() == tw.ideal.gens.size());
    }
}

TEST_CASE("prefix towers and hidden symbols") {
    SUBCASE("prefix recovers the earlier stages") {
        TowerState full = fixtures::tower_4_2(2);
        TowerState s1 = prefix(full, 2);
        CHECK(s1.nvars() == 2);
        CHECK(s1.qmodule.size() == 2);  // 1-t^2 and a
        CHECK(s1.mode == TowerMode::Exact);
        TowerState s0 = prefix(full, 1);
        CHECK(s0.qmodule.size() == 1);
        CHECK(s0.ideal.gens.empty());
    }
    SUBCASE("butterfly presentation exposes only (x, v)") {
        TowerState tw = fixtures::tower_uv_butterfly();
        Presentation pr = presentation(tw);
        REQUIRE(pr.nvars == 2);
        CHECK(pr.names[0] == "x");
        CHECK(pr.names[1] == "v");
        CHECK(pr.ideal.gens.empty());  // free presentation
        CHECK(pr.gens.size() == 2);
        // Evaluation still sees the hidden scaffolding.
        std::vector<double> x = {0.5, -0.25};
        auto vals = tw.eval_point(x);
        CHECK(vals.back() == doctest::Approx(0.25));  // |x|-|y|
    }
}
