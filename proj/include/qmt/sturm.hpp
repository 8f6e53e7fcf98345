#pragma once

#include <optional>
#include <vector>

#include "qmt/polynomial.hpp"

namespace qmt {

// Isolating interval for one real root; lo == hi means the root is known
// exactly. Intervals of one profile are pairwise disjoint and sorted.
struct RootInterval {
    Rational lo, hi;
    int multiplicity = 1;

    bool is_exact() const { return lo == hi; }
    Rational midpoint() const { return (lo + hi) / 2; }
};

// Exact sign behaviour of a univariate polynomial on [lo, hi]: the roots
// (with multiplicities) and the sign on each open subinterval between
// consecutive interior roots. signs.size() == #interior roots + 1.
struct SignProfile {
    Rational lo, hi;
    std::vector<RootInterval> roots;     // includes endpoint roots
    std::vector<int> signs;              // +1 / -1
    std::vector<Rational> sign_samples;  // where each sign was evaluated

    bool has_negative() const {
        for (int s : signs)
            if (s < 0) return true;
        return false;
    }
    std::vector<RootInterval> interior_roots() const {
        std::vector<RootInterval> out;
        for (const auto& r : roots)
            if (!(r.is_exact() && (r.lo == lo || r.lo == hi))) out.push_back(r);
        return out;
    }
};

// Exact root isolation and sign analysis of q (univariate, nonzero) on
// [lo, hi] via Sturm sequences and Yun squarefree decomposition.
SignProfile sturm_profile(const Polynomial& q, const Rational& lo, const Rational& hi);

// Number of distinct real roots of q in the closed interval.
int count_roots_closed(const Polynomial& q, const Rational& lo, const Rational& hi);

struct ClosedInterval {
    Rational lo, hi;  // lo == hi is a singleton
};

// {x in [box] : g(x) >= 0 for all g}, as a union of closed intervals.
// Returns nullopt when a region boundary root is irrational (callers then
// fall back to sampling-based checks).
std::optional<std::vector<ClosedInterval>> interval_region(
    const std::vector<Polynomial>& constraints, const Rational& lo, const Rational& hi);

// squarefree(q) / gcd(squarefree(q), d): the part of q's root set that d
// does not share. Inputs and output are one-variable polynomials.
Polynomial univariate_coprime_part(const Polynomial& q, const Polynomial& d);

// First variable index used by p, if p uses at most one variable.
std::optional<std::size_t> single_variable(const Polynomial& p);

// Compress p (which uses at most variable `var`) to one ambient variable.
Polynomial compress_univariate(const Polynomial& p, std::size_t var);

}  // namespace qmt
