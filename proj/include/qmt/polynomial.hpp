#pragma once

#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmt/monomial.hpp"
#include "qmt/rational.hpp"

namespace qmt {

// Sparse multivariate polynomial with exact rational coefficients.
// Terms are kept in a canonical order and never store zero coefficients.
class Polynomial {
  public:
    using TermMap = std::map<Monomial, Rational, MonoLess>;

    Polynomial() : nvars_(0) {}
    explicit Polynomial(std::size_t nvars) : nvars_(nvars) {}

    static Polynomial constant(std::size_t nvars, const Rational& c) {
        Polynomial p(nvars);
        if (c != 0) p.terms_.emplace(Monomial(nvars), c);
        return p;
    }
    static Polynomial variable(std::size_t nvars, std::size_t i, int power = 1) {
        Polynomial p(nvars);
        Monomial m(nvars);
        m.exps.at(i) = static_cast<std::uint32_t>(power);
        p.terms_.emplace(std::move(m), Rational(1));
        return p;
    }
    static Polynomial term(std::size_t nvars, Monomial m, const Rational& c) {
        Polynomial p(nvars);
        if (c != 0) p.terms_.emplace(std::move(m), c);
        return p;
    }

    std::size_t nvars() const { return nvars_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t nterms() const { return terms_.size(); }
    const TermMap& terms() const { return terms_; }

    // -1 for the zero polynomial.
    int degree() const {
        int d = -1;
        for (const auto& [m, c] : terms_) d = std::max(d, static_cast<int>(m.degree()));
        return d;
    }
    bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_one()); }
    Rational constant_value() const {
        auto it = terms_.find(Monomial(nvars_));
        return it == terms_.end() ? Rational(0) : it->second;
    }
    bool uses_variable(std::size_t i) const {
        for (const auto& [m, c] : terms_)
            if (m.exps[i] > 0) return true;
        return false;
    }

    void add_term(const Monomial& m, const Rational& c) {
        if (c == 0) return;
        auto [it, inserted] = terms_.emplace(m, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    Polynomial operator-() const {
        Polynomial r(*this);
        for (auto& [m, c] : r.terms_) c = -c;
        return r;
    }
    Polynomial& operator+=(const Polynomial& o) {
        check_vars(o);
        for (const auto& [m, c] : o.terms_) add_term(m, c);
        return *this;
    }
    Polynomial& operator-=(const Polynomial& o) {
        check_vars(o);
        for (const auto& [m, c] : o.terms_) add_term(m, -c);
        return *this;
    }
    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    Polynomial scaled(const Rational& c) const {
        Polynomial r(nvars_);
        if (c == 0) return r;
        for (const auto& [m, k] : terms_) r.terms_.emplace(m, k * c);
        return r;
    }
    Polynomial pow(unsigned e) const;

    bool operator==(const Polynomial& o) const { return nvars_ == o.nvars_ && terms_ == o.terms_; }

    // Leading term with respect to an explicit order.
    std::pair<Monomial, Rational> leading_term(const TermOrder& order) const;

    double eval(std::span<const double> x) const;
    Rational eval_exact(std::span<const Rational> x) const;
    Polynomial derivative(std::size_t var) const;
    Polynomial extended(std::size_t new_nvars) const;

  private:
    void check_vars(const Polynomial& o) const {
        if (nvars_ != o.nvars_)
            throw std::invalid_argument("polynomial variable-count mismatch: " +
                                        std::to_string(nvars_) + " vs " + std::to_string(o.nvars_));
    }

    std::size_t nvars_;
    TermMap terms_;
};

// Text format: terms like `num/den*x^2*y`, separated by `+`/`-`;
// coefficient or exponent may be omitted when 1. Whitespace-insensitive.
std::string to_string(const Polynomial& p, std::span<const std::string> names);
Polynomial parse_polynomial(const std::string& text, std::span<const std::string> names);

}  // namespace qmt
