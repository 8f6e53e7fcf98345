#include "qmt/groebner.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace qmt {

namespace {

// One reduction step: cancel the highest reducible term of p. Returns
// false when no term of p is divisible by any leading monomial.
bool reduce_step(Polynomial& p, const std::vector<Polynomial>& gens,
                 const std::vector<std::pair<Monomial, Rational>>& leads, const TermOrder& order) {
    // Scan terms from largest to smallest in the ambient order.
    std::vector<std::pair<Monomial, Rational>> terms(p.terms().begin(), p.terms().end());
    std::sort(terms.begin(), terms.end(),
              [&](const auto& a, const auto& b) { return order.less(b.first, a.first); });
    for (const auto& [m, c] : terms) {
        for (std::size_t k = 0; k < gens.size(); ++k) {
            if (!leads[k].first.divides(m)) continue;
            Monomial q = leads[k].first.divide_into(m);
            Rational factor = c / leads[k].second;
            p -= Polynomial::term(p.nvars(), q, factor) * gens[k];
            return true;
        }
    }
    return false;
}

Polynomial reduce_full(Polynomial p, const std::vector<Polynomial>& gens, const TermOrder& order) {
    if (gens.empty()) return p;
    std::vector<std::pair<Monomial, Rational>> leads;
    leads.reserve(gens.size());
    for (const auto& g : gens) leads.push_back(g.leading_term(order));
    while (!p.is_zero() && reduce_step(p, gens, leads, order)) {
    }
    return p;
}

}  // namespace

Polynomial normal_form(const Polynomial& p, const GroebnerBasis& gb) {
    if (p.nvars() != gb.nvars)
        throw std::invalid_argument("normal_form: ambient variable mismatch");
    return reduce_full(p, gb.gens, gb.order);
}

Polynomial s_polynomial(const Polynomial& f, const Polynomial& g, const TermOrder& order) {
    auto [lmf, lcf] = f.leading_term(order);
    auto [lmg, lcg] = g.leading_term(order);
    Monomial l = lmf.lcm(lmg);
    Polynomial a = Polynomial::term(f.nvars(), lmf.divide_into(l), Rational(1) / lcf) * f;
    Polynomial b = Polynomial::term(g.nvars(), lmg.divide_into(l), Rational(1) / lcg) * g;
    return a - b;
}

GroebnerBasis buchberger(const std::vector<Polynomial>& input, const TermOrder& order) {
    if (input.empty()) throw std::invalid_argument("buchberger: empty generator list");
    std::size_t nvars = input.front().nvars();
    std::vector<Polynomial> basis;
    for (const auto& g : input) {
        if (g.is_zero()) throw std::invalid_argument("buchberger: zero generator");
        if (g.nvars() != nvars) throw std::invalid_argument("buchberger: ambient variable mismatch");
        basis.push_back(g);
    }

    auto lead = [&](std::size_t i) { return basis[i].leading_term(order).first; };

    struct Pair {
        std::size_t i, j;
        Monomial l;
    };
    std::vector<Pair> pending;
    std::set<std::pair<std::size_t, std::size_t>> handled;
    auto push_pair = [&](std::size_t i, std::size_t j) {
        pending.push_back({i, j, lead(i).lcm(lead(j))});
    };
    for (std::size_t i = 0; i < basis.size(); ++i)
        for (std::size_t j = i + 1; j < basis.size(); ++j) push_pair(i, j);

    auto treated = [&](std::size_t i, std::size_t j) {
        return handled.count({std::min(i, j), std::max(i, j)}) > 0;
    };

    while (!pending.empty()) {
        // Normal selection: smallest lcm first.
        auto it = std::min_element(pending.begin(), pending.end(),
                                   [&](const Pair& a, const Pair& b) { return order.less(a.l, b.l); });
        Pair pr = *it;
        pending.erase(it);
        handled.insert({pr.i, pr.j});

        // Coprimality criterion.
        if (lead(pr.i).coprime(lead(pr.j))) continue;
        // Chain criterion: some k with LM(k) | lcm and both side pairs done.
        bool skip = false;
        for (std::size_t k = 0; k < basis.size() && !skip; ++k) {
            if (k == pr.i || k == pr.j) continue;
            if (lead(k).divides(pr.l) && treated(pr.i, k) && treated(pr.j, k)) skip = true;
        }
        if (skip) continue;

        Polynomial s = reduce_full(s_polynomial(basis[pr.i], basis[pr.j], order), basis, order);
        if (s.is_zero()) continue;
        basis.push_back(s);
        for (std::size_t i = 0; i + 1 < basis.size(); ++i) push_pair(i, basis.size() - 1);
    }

    // Minimalize: drop generators whose lead is divisible by another kept
    // lead; for equal leads the lowest index survives.
    std::vector<bool> keep(basis.size(), true);
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const Monomial li = basis[i].leading_term(order).first;
        for (std::size_t j = 0; j < basis.size(); ++j) {
            if (i == j || !keep[j]) continue;
            const Monomial lj = basis[j].leading_term(order).first;
            if (lj.divides(li) && (!(li == lj) || j < i)) {
                keep[i] = false;
                break;
            }
        }
    }
    std::vector<Polynomial> minimal;
    for (std::size_t i = 0; i < basis.size(); ++i)
        if (keep[i]) minimal.push_back(basis[i]);

    // Reduce tails against the other generators and normalize to monic.
    std::vector<Polynomial> reduced;
    for (std::size_t i = 0; i < minimal.size(); ++i) {
        std::vector<Polynomial> others;
        for (std::size_t j = 0; j < minimal.size(); ++j)
            if (j != i) others.push_back(minimal[j]);
        Polynomial r = others.empty() ? minimal[i] : reduce_full(minimal[i], others, order);
        if (r.is_zero()) continue;
        auto [lm, lc] = r.leading_term(order);
        reduced.push_back(r.scaled(Rational(1) / lc));
    }
    std::sort(reduced.begin(), reduced.end(), [&](const Polynomial& a, const Polynomial& b) {
        return order.less(a.leading_term(order).first, b.leading_term(order).first);
    });

    GroebnerBasis gb;
    gb.nvars = nvars;
    gb.order = order;
    gb.gens = std::move(reduced);
    return gb;
}

std::vector<Monomial> standard_monomials(const GroebnerBasis& gb, int d) {
    if (d < 0) throw std::invalid_argument("standard_monomials: negative degree");
    std::vector<Monomial> leads;
    for (const auto& g : gb.gens) leads.push_back(g.leading_term(gb.order).first);

    std::vector<Monomial> out;
    Monomial current(gb.nvars);
    // Enumerate exponent vectors of total degree <= d.
    auto standard = [&](const Monomial& m) {
        for (const auto& lm : leads)
            if (lm.divides(m)) return false;
        return true;
    };
    std::vector<Monomial> all;
    std::vector<std::uint32_t> stack(gb.nvars, 0);
    auto rec = [&](auto&& self, std::size_t var, std::uint32_t remaining) -> void {
        if (var == gb.nvars) {
            Monomial m(gb.nvars);
            m.exps = stack;
            if (standard(m)) all.push_back(std::move(m));
            return;
        }
        for (std::uint32_t e = 0; e <= remaining; ++e) {
            stack[var] = e;
            self(self, var + 1, remaining - e);
        }
        stack[var] = 0;
    };
    rec(rec, 0, static_cast<std::uint32_t>(d));

    std::sort(all.begin(), all.end(), [&](const Monomial& a, const Monomial& b) {
        std::uint32_t da = a.degree(), db = b.degree();
        if (da != db) return da < db;
        return gb.order.less(b, a);  // larger first within a degree
    });
    return all;
}

}  // namespace qmt
