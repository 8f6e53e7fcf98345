#include "qmt/polynomial.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace qmt {

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.nvars() != b.nvars())
        throw std::invalid_argument("polynomial variable-count mismatch in product");
    Polynomial r(a.nvars());
    for (const auto& [ma, ca] : a.terms())
        for (const auto& [mb, cb] : b.terms()) r.add_term(ma * mb, ca * cb);
    return r;
}

Polynomial Polynomial::pow(unsigned e) const {
    Polynomial r = Polynomial::constant(nvars_, Rational(1));
    Polynomial base(*this);
    while (e > 0) {
        if (e & 1u) r = r * base;
        e >>= 1u;
        if (e > 0) base = base * base;
    }
    return r;
}

std::pair<Monomial, Rational> Polynomial::leading_term(const TermOrder& order) const {
    if (terms_.empty()) throw std::logic_error("leading term of zero polynomial");
    auto best = terms_.begin();
    for (auto it = std::next(terms_.begin()); it != terms_.end(); ++it)
        if (order.less(best->first, it->first)) best = it;
    return {best->first, best->second};
}

double Polynomial::eval(std::span<const double> x) const {
    double acc = 0.0;
    for (const auto& [m, c] : terms_) {
        double t = to_double(c);
        for (std::size_t i = 0; i < nvars_; ++i) {
            for (std::uint32_t e = 0; e < m.exps[i]; ++e) t *= x[i];
        }
        acc += t;
    }
    return acc;
}

Rational Polynomial::eval_exact(std::span<const Rational> x) const {
    Rational acc(0);
    for (const auto& [m, c] : terms_) {
        Rational t = c;
        for (std::size_t i = 0; i < nvars_; ++i)
            for (std::uint32_t e = 0; e < m.exps[i]; ++e) t *= x[i];
        acc += t;
    }
    return acc;
}

Polynomial Polynomial::derivative(std::size_t var) const {
    Polynomial r(nvars_);
    for (const auto& [m, c] : terms_) {
        if (m.exps[var] == 0) continue;
        Monomial d(m);
        d.exps[var] -= 1;
        r.add_term(d, c * Rational(static_cast<long>(m.exps[var])));
    }
    return r;
}

Polynomial Polynomial::extended(std::size_t new_nvars) const {
    if (new_nvars < nvars_) throw std::invalid_argument("cannot shrink polynomial variable count");
    Polynomial r(new_nvars);
    for (const auto& [m, c] : terms_) r.add_term(m.extended(new_nvars), c);
    return r;
}

std::string to_string(const Polynomial& p, std::span<const std::string> names) {
    if (p.is_zero()) return "0";
    // Print highest terms first; the map iterates ascending.
    std::vector<std::pair<Monomial, Rational>> terms(p.terms().begin(), p.terms().end());
    std::ostringstream out;
    bool first = true;
    for (auto it = terms.rbegin(); it != terms.rend(); ++it) {
        const auto& [m, c] = *it;
        Rational a = c;
        if (first) {
            if (a < 0) {
                out << "-";
                a = -a;
            }
        } else {
            out << (a < 0 ? " - " : " + ");
            if (a < 0) a = -a;
        }
        first = false;
        bool printed_coef = false;
        if (a != 1 || m.is_one()) {
            out << to_string(a);
            printed_coef = true;
        }
        for (std::size_t i = 0; i < m.nvars(); ++i) {
            if (m.exps[i] == 0) continue;
            if (printed_coef) out << "*";
            printed_coef = true;
            out << names[i];
            if (m.exps[i] > 1) out << "^" << m.exps[i];
        }
    }
    return out.str();
}

namespace {

struct Lexer {
    std::string s;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eof() {
        skip_ws();
        return pos >= s.size();
    }
    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }
    bool accept(char c) {
        if (peek() == c) {
            ++pos;
            return true;
        }
        return false;
    }
    std::optional<std::string> number() {
        skip_ws();
        std::size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos == start) return std::nullopt;
        std::string digits = s.substr(start, pos - start);
        std::size_t save = pos;
        if (accept('/')) {
            std::size_t dstart = pos;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
            if (pos == dstart) {
                pos = save;  // "/" belonged to something else
                return digits;
            }
            return digits + "/" + s.substr(dstart, pos - dstart);
        }
        return digits;
    }
    std::optional<std::string> name() {
        skip_ws();
        std::size_t start = pos;
        if (pos < s.size() &&
            (std::isalpha(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) {
            ++pos;
            while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
                ++pos;
            return s.substr(start, pos - start);
        }
        return std::nullopt;
    }
};

}  // namespace

Polynomial parse_polynomial(const std::string& text, std::span<const std::string> names) {
    auto var_index = [&](const std::string& n) -> std::size_t {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == n) return i;
        throw std::invalid_argument("unknown variable '" + n + "' in polynomial '" + text + "'");
    };

    Lexer lx{text};
    Polynomial result(names.size());
    bool any_term = false;
    int sign = 1;
    if (lx.accept('+')) sign = 1;
    else if (lx.accept('-')) sign = -1;

    while (!lx.eof()) {
        // One term: *-separated rational and variable-power factors.
        Rational coef(sign);
        Monomial mono(names.size());
        bool factor_expected = true;
        while (factor_expected) {
            if (auto num = lx.number()) {
                auto q = parse_rational(*num);
                if (!q) throw std::invalid_argument("bad coefficient '" + *num + "' in '" + text + "'");
                coef *= *q;
            } else if (auto nm = lx.name()) {
                std::size_t vi = var_index(*nm);
                unsigned e = 1;
                if (lx.accept('^')) {
                    auto en = lx.number();
                    if (!en || en->find('/') != std::string::npos)
                        throw std::invalid_argument("bad exponent in '" + text + "'");
                    e = static_cast<unsigned>(std::stoul(*en));
                }
                mono.exps[vi] += e;
            } else {
                throw std::invalid_argument("expected factor at position " +
                                            std::to_string(lx.pos) + " in '" + text + "'");
            }
            factor_expected = lx.accept('*');
        }
        result.add_term(mono, coef);
        any_term = true;

        if (lx.eof()) break;
        if (lx.accept('+')) sign = 1;
        else if (lx.accept('-')) sign = -1;
        else
            throw std::invalid_argument("expected '+' or '-' at position " +
                                        std::to_string(lx.pos) + " in '" + text + "'");
    }
    if (!any_term) throw std::invalid_argument("empty polynomial text");
    return result;
}

}  // namespace qmt
