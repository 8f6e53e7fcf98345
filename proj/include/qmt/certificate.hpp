#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qmt/relaxation.hpp"
#include "qmt/tower.hpp"

namespace qmt {

// Putinar-shaped representation data: one Gram matrix per participating
// quadratic-module generator (generator 1 for the sum-of-squares part).
// Entries are exact rationals; a freshly extracted certificate carries the
// dyadic values of the solver doubles until rationalization rounds them.
struct CertificateBlock {
    Polynomial generator;         // over the presentation variables; 1 for sigma_0
    std::vector<Monomial> basis;  // presentation-variable monomials
    std::vector<std::vector<Rational>> gram;  // symmetric, basis x basis
};

struct Certificate {
    Polynomial f;  // the certified element, over the presentation variables
    Rational eps = Rational(0);
    int degree = 0;
    bool rationalized = false;
    std::vector<CertificateBlock> blocks;
};

enum class VerificationLevel { ExactVerified, NumericVerified, Refuted };
const char* to_string(VerificationLevel v);

struct VerificationReport {
    VerificationLevel level = VerificationLevel::Refuted;
    double residual_norm = 0.0;  // L1 norm of the residual's coefficients
    // Largest offending residual term when Refuted.
    std::optional<std::pair<Monomial, Rational>> witness_term;
    bool grams_exactly_psd = false;
    std::string detail;
};

// Exact PSD test by fraction-free symmetric decomposition with diagonal
// pivoting; no square roots are taken.
bool rational_psd(const std::vector<std::vector<Rational>>& g);

Certificate extract_certificate(const TowerState& tw, const Polynomial& f, const Rational& eps,
                                const RelaxationProblem& relax, const SDPSolution& sol);

// Rounds every Gram entry to denominator <= bound (escalating from small
// denominators), absorbs a nonnegative constant residual into the (1,1)
// entry of sigma_0, and keeps the first rounding that is exactly PSD with
// zero residual. Throws when no rounding survives.
Certificate rationalize_certificate(const TowerState& tw, const Certificate& cert,
                                    unsigned long denominator_bound = 1ul << 32);

VerificationReport verify_certificate(const TowerState& tw, const Polynomial& f,
                                      const Rational& eps, const Certificate& cert);

struct CertifyOptions {
    SDPOptions sdp;
    RelaxationOptions relax;
    Tolerances tol;
    double accept_residual = 1e-6;
};

struct CertifyResult {
    bool success = false;
    std::optional<Certificate> certificate;
    VerificationReport report;
    int degree_reached = 0;
    double best_residual = 1e300;
    std::vector<std::pair<int, double>> bound_trajectory;  // (d, lambda_d)
    std::string detail;
};

// Iterates the relaxation order from ceil(deg f / 2) to d_max, accepts the
// first certificate with numeric residual <= accept_residual, then tries
// to rationalize it. Requires an archimedean tower; refutes early when a
// sampled image point already violates f + eps >= 0.
CertifyResult certify_positivity(const TowerState& tw, const Polynomial& f, const Rational& eps,
                                 int d_max, const CertifyOptions& opts = {});

// Text serialization; bit-exact round trip for rationalized certificates.
std::string certificate_to_text(const Certificate& cert, std::span<const std::string> names);
Certificate certificate_from_text(const std::string& text, std::span<const std::string> names);

}  // namespace qmt
