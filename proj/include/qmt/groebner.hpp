#pragma once

#include <vector>

#include "qmt/polynomial.hpp"

namespace qmt {

// Reduced Groebner basis: generators monic, tails fully reduced, no
// leading monomial divides another generator's monomials.
struct GroebnerBasis {
    std::size_t nvars = 0;
    TermOrder order;
    std::vector<Polynomial> gens;

    bool empty() const { return gens.empty(); }
};

// Full remainder of p under multivariate division by gb. Idempotent;
// returns 0 exactly when p lies in the ideal.
Polynomial normal_form(const Polynomial& p, const GroebnerBasis& gb);

Polynomial s_polynomial(const Polynomial& f, const Polynomial& g, const TermOrder& order);

// Buchberger with normal pair selection and the coprimality and chain
// criteria. Inputs need not be monic or reduced; zero inputs are rejected.
GroebnerBasis buchberger(const std::vector<Polynomial>& gens, const TermOrder& order);

// All monomials of total degree <= d in gb.nvars variables that are not
// divisible by any leading monomial of gb, listed by increasing degree
// (grevlex-descending within a degree).
std::vector<Monomial> standard_monomials(const GroebnerBasis& gb, int d);

}  // namespace qmt
