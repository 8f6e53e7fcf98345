#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "qmt/certificate.hpp"
#include "qmt/explore.hpp"
#include "qmt/relaxation.hpp"

using namespace qmt;
using fixtures::P;

namespace {

const std::vector<std::string> XY = {"x", "y"};
const std::vector<std::string> TAC = {"t", "a", "c"};

Certificate circle_certificate(const TowerState& tw) {
    // sigma_0 = Gram of x^2 + (y+1)^2 over {1, x, y}.
    Presentation pr = presentation(tw);
    Certificate cert;
    cert.f = P("2*y + 2", XY);
    cert.eps = Rational(0);
    cert.degree = 1;
    CertificateBlock blk;
    blk.generator = Polynomial::constant(pr.nvars, Rational(1));
    blk.basis = standard_monomials(pr.ideal, 1);
    blk.gram = {{Rational(1), Rational(0), Rational(1)},
                {Rational(0), Rational(1), Rational(0)},
                {Rational(1), Rational(0), Rational(1)}};
    cert.blocks.push_back(blk);
    cert.rationalized = true;
    return cert;
}

}  // namespace

TEST_CASE("rational psd check") {
    CHECK(rational_psd({{Rational(1), Rational(0)}, {Rational(0), Rational(0)}}));
    CHECK(rational_psd({{Rational(1), Rational(1)}, {Rational(1), Rational(1)}}));
    CHECK(!rational_psd({{Rational(1), Rational(2)}, {Rational(2), Rational(1)}}));
    CHECK(!rational_psd({{Rational(-1)}}));
    CHECK(rational_psd({}));
    // Zero diagonal with nonzero off-diagonal entries is indefinite.
    CHECK(!rational_psd({{Rational(0), Rational(1)}, {Rational(1), Rational(0)}}));
}

TEST_CASE("build_relaxation shapes") {
    SUBCASE("circle moment basis at d=1 is {1, x, y}") {
        TowerState tw = fixtures::tower_full_circle();
        RelaxationProblem rp = build_relaxation(tw, P("2 + 2*y", XY), 1);
        REQUIRE(rp.blocks.size() == 1);  // Q = sums of squares only
        REQUIRE(rp.blocks[0].basis.size() == 3);
        auto name = [&](const Monomial& m) {
            return to_string(Polynomial::term(2, m, Rational(1)), XY);
        };
        CHECK(name(rp.blocks[0].basis[0]) == "1");
        CHECK(name(rp.blocks[0].basis[1]) == "x");
        CHECK(name(rp.blocks[0].basis[2]) == "y");
    }
    SUBCASE("the |t|/chi tower carries one localizing block per generator") {
        TowerState tw = fixtures::tower_4_2(2);
        RelaxationProblem rp = build_relaxation(tw, P("a", TAC), 2);
        CHECK(rp.blocks.size() == 5);  // sigma_0 + 1-t^2, a, tc, t(c-1)
        for (std::size_t b = 1; b < rp.blocks.size(); ++b)
            CHECK(rp.blocks[b].qmodule_index >= 0);
    }
    SUBCASE("constant objective has a constant bound") {
        TowerState tw = fixtures::tower_full_circle();
        LowerBoundResult lb = lower_bound(tw, P("7/2", XY), 1);
        REQUIRE(lb.solution.status == SDPStatus::Optimal);
        CHECK(lb.value == doctest::Approx(3.5).epsilon(1e-6));
    }
    SUBCASE("degree too small is rejected") {
        TowerState tw = fixtures::tower_full_circle();
        CHECK_THROWS(build_relaxation(tw, P("x*y^4", XY), 1));
    }
}

TEST_CASE("lower bounds") {
    SUBCASE("min of 2+y on the circle is 1") {
        TowerState tw = fixtures::tower_full_circle();
        LowerBoundResult lb = lower_bound(tw, P("2 + y", XY), 1);
        REQUIRE(lb.solution.status == SDPStatus::Optimal);
        CHECK(lb.value >= 0.999);
        CHECK(lb.value <= 1.0 + 1e-5);
    }
    SUBCASE("an explicit sum of squares is bounded by zero") {
        TowerState tw = fixtures::tower_full_circle();
        Polynomial f = P("x + y", XY) * P("x + y", XY);
        LowerBoundResult lb = lower_bound(tw, f, 1);
        CHECK(lb.value >= -1e-6);
    }
    SUBCASE("|t| is nonnegative on the |t|/chi tower") {
        TowerState tw = fixtures::tower_4_2(2);
        LowerBoundResult lb = lower_bound(tw, P("a", TAC), 2);
        CHECK(lb.value >= -1e-5);
        CHECK(lb.value <= 1e-5);
    }
    SUBCASE("monotone in the relaxation order") {
        TowerState tw = fixtures::tower_full_circle();
        double prev = -1e300;
        for (int d = 1; d <= 3; ++d) {
            LowerBoundResult lb = lower_bound(tw, P("2 + y", XY), d);
            CHECK(lb.value >= prev - 1e-7);
            prev = lb.value;
        }
    }
    SUBCASE("weak duality against sampled image values") {
        TowerState tw = fixtures::tower_4_2(2);
        Polynomial f = P("a + 1/5", TAC);
        LowerBoundResult lb = lower_bound(tw, f, 2);
        auto xs = sample_domain(tw.domain, 10000, 61);
        double min_f = 1e300;
        for (const auto& x : xs) {
            auto vals = tw.eval_point(std::span<const double>(x.data(), x.size()));
            min_f = std::min(min_f, f.extended(3).eval(vals));
        }
        CHECK(lb.value <= min_f + 1e-5);
    }
}

TEST_CASE("verify_certificate") {
    TowerState tw = fixtures::tower_half_circle();
    SUBCASE("the circle identity is exactly verified") {
        Certificate cert = circle_certificate(tw);
        VerificationReport rep = verify_certificate(tw, P("2*y + 2", XY), Rational(0), cert);
        CHECK(rep.level == VerificationLevel::ExactVerified);
        CHECK(rep.residual_norm == 0.0);
        CHECK(rep.grams_exactly_psd);
    }
    SUBCASE("a corrupted Gram entry refutes with a witness term") {
        Certificate cert = circle_certificate(tw);
        cert.blocks[0].gram[1][1] += 1;
        VerificationReport rep = verify_certificate(tw, P("2*y + 2", XY), Rational(0), cert);
        CHECK(rep.level == VerificationLevel::Refuted);
        REQUIRE(rep.witness_term.has_value());
    }
    SUBCASE("degree-zero identity for |t| + 1/10") {
        TowerState t42 = fixtures::tower_4_2(2);
        Presentation pr = presentation(t42);
        Certificate cert;
        cert.f = P("a", TAC);
        cert.eps = make_rational(1, 10);
        cert.degree = 0;
        cert.rationalized = true;
        CertificateBlock s0;
        s0.generator = Polynomial::constant(3, Rational(1));
        s0.basis = {Monomial(3)};
        s0.gram = {{make_rational(1, 10)}};
        CertificateBlock sa;
        sa.generator = P("a", TAC);
        sa.basis = {Monomial(3)};
        sa.gram = {{Rational(1)}};
        cert.blocks = {s0, sa};
        VerificationReport rep = verify_certificate(t42, P("a", TAC), make_rational(1, 10), cert);
        CHECK(rep.level == VerificationLevel::ExactVerified);
    }
    SUBCASE("a generator certifies itself with a unit coefficient") {
        TowerState t42 = fixtures::tower_4_2(2);
        Certificate cert;
        cert.f = P("a", TAC);
        cert.eps = Rational(0);
        CertificateBlock sa;
        sa.generator = P("a", TAC);
        sa.basis = {Monomial(3)};
        sa.gram = {{Rational(1)}};
        cert.blocks = {sa};
        VerificationReport rep = verify_certificate(t42, P("a", TAC), Rational(0), cert);
        CHECK(rep.level == VerificationLevel::ExactVerified);
    }
}

TEST_CASE("rationalize_certificate") {
    TowerState tw = fixtures::tower_half_circle();
    SUBCASE("dyadic noise is rounded away") {
        Certificate cert = circle_certificate(tw);
        cert.rationalized = false;
        // Perturb entries the way solver output looks.
        for (auto& row : cert.blocks[0].gram)
            for (auto& v : row) v += rational_from_double(3e-10);
        Certificate fixed = rationalize_certificate(tw, cert);
        VerificationReport rep = verify_certificate(tw, P("2*y + 2", XY), Rational(0), fixed);
        CHECK(rep.level == VerificationLevel::ExactVerified);
    }
    SUBCASE("an impossible certificate loses PSD and is rejected") {
        Certificate cert;
        cert.f = P("0 - 1", XY);  // f = -1 cannot be in Q
        cert.eps = Rational(0);
        CertificateBlock s0;
        s0.generator = Polynomial::constant(2, Rational(1));
        s0.basis = {Monomial(2)};
        s0.gram = {{Rational(-1)}};
        cert.blocks = {s0};
        CHECK_THROWS(rationalize_certificate(tw, cert));
    }
}

TEST_CASE("exactly verified certificates are sound on sampled domain points") {
    struct Case {
        TowerState tw;
        Polynomial f;
        Rational eps;
        Certificate cert;
    };
    std::vector<Case> cases;
    {
        TowerState tw = fixtures::tower_half_circle();
        cases.push_back({tw, P("2*y + 2", XY), Rational(0), circle_certificate(tw)});
    }
    {
        TowerState tw = fixtures::tower_4_2(2);
        CertifyResult res = certify_positivity(tw, P("a", TAC), make_rational(1, 10), 3);
        REQUIRE(res.success);
        cases.push_back({tw, P("a", TAC), make_rational(1, 10), *res.certificate});
    }
    for (auto& c : cases) {
        VerificationReport rep = verify_certificate(c.tw, c.f, c.eps, c.cert);
        REQUIRE(rep.level == VerificationLevel::ExactVerified);
        Polynomial fw = c.f.extended(c.tw.nvars());
        for (const auto& x : sample_domain(c.tw.domain, 1000, 997)) {
            auto vals = c.tw.eval_point(std::span<const double>(x.data(), x.size()));
            CHECK(fw.eval(vals) + to_double(c.eps) >= -1e-9);
        }
    }
}

TEST_CASE("extracted circle certificate survives rationalization") {
    TowerState tw = fixtures::tower_half_circle();
    CertifyResult res = certify_positivity(tw, P("2*y + 2", XY), Rational(0), 2);
    REQUIRE(res.success);
    CHECK(res.report.level == VerificationLevel::ExactVerified);
    CHECK(res.certificate->rationalized);
}

TEST_CASE("certificate file round trip") {
    TowerState tw = fixtures::tower_half_circle();
    Certificate cert = circle_certificate(tw);
    std::string text = certificate_to_text(cert, XY);
    Certificate back = certificate_from_text(text, XY);
    CHECK(certificate_to_text(back, XY) == text);
    CHECK(back.blocks.size() == cert.blocks.size());
    CHECK(back.blocks[0].gram == cert.blocks[0].gram);
    CHECK(back.eps == cert.eps);
    VerificationReport rep = verify_certificate(tw, P("2*y + 2", XY), Rational(0), back);
    CHECK(rep.level == VerificationLevel::ExactVerified);

    // A solver-produced, rationalized certificate round-trips bit-exactly
    // and stays exactly verified.
    TowerState t42 = fixtures::tower_4_2(2);
    CertifyResult res = certify_positivity(t42, P("a", TAC), make_rational(1, 10), 3);
    REQUIRE(res.success);
    Presentation pr = presentation(t42);
    std::string text2 = certificate_to_text(*res.certificate, pr.names);
    Certificate back2 = certificate_from_text(text2, pr.names);
    CHECK(certificate_to_text(back2, pr.names) == text2);
    CHECK(verify_certificate(t42, P("a", TAC), make_rational(1, 10), back2).level ==
          VerificationLevel::ExactVerified);
}

TEST_CASE("certify_positivity") {
    SUBCASE("|t| + 1/10 on the |t|/chi tower is exactly certified") {
        TowerState tw = fixtures::tower_4_2(2);
        CertifyResult res = certify_positivity(tw, P("a", TAC), make_rational(1, 10), 3);
        REQUIRE(res.success);
        CHECK(res.report.level == VerificationLevel::ExactVerified);
        CHECK(res.degree_reached <= 2);
    }
    SUBCASE("|t|(1-t^2) + eps admits a low-degree certificate") {
        TowerState tw = fixtures::tower_4_2(2);
        Polynomial f = P("a", TAC) * P("1 - t^2", TAC);
        CertifyResult res = certify_positivity(tw, f, make_rational(1, 10), 3);
        REQUIRE(res.success);
        CHECK(res.report.residual_norm <= 1e-6);
        CHECK(res.degree_reached <= 3);
    }
    SUBCASE("f = -1 is refuted by image samples before any solve") {
        TowerState tw = fixtures::tower_4_2(2);
        CertifyResult res = certify_positivity(tw, P("0 - 1", TAC), make_rational(1, 2), 3);
        CHECK(!res.success);
        CHECK(res.report.level == VerificationLevel::Refuted);
        CHECK(res.bound_trajectory.empty());
    }
    SUBCASE("non-archimedean towers are rejected") {
        DomainDescription dom;
        dom.dim = 1;
        TowerState tw = init_tower(dom, {"t"}, {});
        CHECK_THROWS(certify_positivity(tw, P("1", {"t"}), Rational(0), 2));
    }
    SUBCASE("the spliced cube-root function is certified once eps clears the relaxation error") {
        TowerState tw = fixtures::tower_4_1();
        Polynomial f = P("f", {"t", "c", "f"});
        CertifyResult res = certify_positivity(tw, f, Rational(1), 4);
        REQUIRE(res.success);
        CHECK(res.report.residual_norm <= 1e-6);
        CHECK(res.degree_reached <= 4);
    }
    SUBCASE("a too-small eps on the spliced tower fails honestly with a trajectory") {
        // The degree-4 representation at margin 1/10 needs Gram entries far
        // beyond double range; the search must report failure, not fake it.
        TowerState tw = fixtures::tower_4_1();
        CertifyResult res =
            certify_positivity(tw, P("f", {"t", "c", "f"}), make_rational(1, 10), 3);
        CHECK(!res.success);
        CHECK(!res.bound_trajectory.empty());
        CHECK(res.best_residual < 1e300);
        CHECK(!res.detail.empty());
    }
}
