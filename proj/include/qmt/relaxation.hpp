#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qmt/sdp.hpp"
#include "qmt/tower.hpp"

namespace qmt {

// One PSD block of the relaxation: the multiplier of `generator`
// (generator == 1 for the plain sum-of-squares part).
struct RelaxationBlock {
    Polynomial generator;          // over the presentation variables
    std::vector<Monomial> basis;   // standard monomials, degree-truncated
    int qmodule_index = -1;        // -1 for the sigma_0 block
};

struct RelaxationProblem {
    int degree = 0;
    Presentation pres;
    Polynomial f_reduced;              // NF of the objective element
    std::vector<Monomial> monomials;   // standard monomials up to 2d
    std::vector<RelaxationBlock> blocks;
    SDPProblem sdp;
    Rational f_constant;               // coefficient of 1 in f_reduced
    // Exact per-constraint data: entry (block, i, j) -> coefficient of the
    // row's monomial, kept for certificate verification bookkeeping.
    std::vector<Monomial> row_monomials;  // one per SDP constraint row
    bool infeasible_at_degree = false;    // some f-monomial is unreachable
    std::vector<std::string> warnings;
    std::vector<std::string> skipped_generators;
};

struct RelaxationOptions {
    int monomial_cap = 2000;
};

// Moment/SOS relaxation of order d for f over the tower presentation:
// matching f - lambda = sum_b <G_b, basis_b basis_b^T g_b> coefficientwise
// over the standard monomials of the quotient. The SDP primal variables
// are the Gram blocks; lambda* = f_constant - <C, X*>.
RelaxationProblem build_relaxation(const TowerState& tw, const Polynomial& f, int d,
                                   const RelaxationOptions& opts = {});

struct LowerBoundResult {
    double value = 0;
    SDPSolution solution;
    RelaxationProblem relaxation;
};

LowerBoundResult lower_bound(const TowerState& tw, const Polynomial& f, int d,
                             const SDPOptions& sdp_opts = {},
                             const RelaxationOptions& opts = {});

}  // namespace qmt
