#pragma once

#include <cstdint>

namespace qmt {

// Sampling and verification thresholds. Topological side conditions are
// only semi-decided by sampling, so every threshold is explicit here and
// quoted in reports.
struct Tolerances {
    double zero_tol = 1e-5;       // |q(y)| <= zero_tol counts as a zero
    double sign_tol = 1e-5;       // strict-sign thresholds
    double neighborhood = 0.05;   // delta for closure / coverage tests
    double rel_tol = 1e-7;        // relation residual for variety membership
    double pos_tol = 1e-7;        // generator nonnegativity slack
    double refine_tol = 1e-10;    // Gauss-Newton target residual
    int refine_iters = 50;
    int check_samples = 1000;     // precondition spot checks on X
    int variety_samples = 10000;  // default cloud size
    std::uint64_t seed = 20110614ULL;
};

}  // namespace qmt
