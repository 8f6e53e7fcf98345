#include "qmt/rational.hpp"

#include <cctype>

namespace qmt {

std::optional<Rational> parse_rational(const std::string& text) {
    std::string s;
    s.reserve(text.size());
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) return std::nullopt;

    auto digits_ok = [](const std::string& t) {
        if (t.empty()) return false;
        std::size_t i = (t[0] == '+' || t[0] == '-') ? 1 : 0;
        if (i == t.size()) return false;
        for (; i < t.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
        return true;
    };

    std::string num = s, den = "1";
    if (auto slash = s.find('/'); slash != std::string::npos) {
        num = s.substr(0, slash);
        den = s.substr(slash + 1);
    }
    if (!digits_ok(num) || !digits_ok(den)) return std::nullopt;

    Rational q;
    if (q.set_str(num + "/" + den, 10) != 0) return std::nullopt;
    if (q.get_den() == 0) return std::nullopt;
    q.canonicalize();
    return q;
}

Rational round_to_denominator(const Rational& x, unsigned long max_den) {
    if (max_den == 0) max_den = 1;
    if (x.get_den() <= max_den) return x;

    // Continued-fraction expansion; p/q is the current convergent.
    mpz_class a = x.get_num(), b = x.get_den();
    mpz_class p_prev = 0, q_prev = 1, p = 1, q = 0;
    mpz_class bound(static_cast<unsigned long>(max_den));

    while (b != 0) {
        mpz_class quot = a / b;  // floor for positive b; a may be negative
        mpz_class rem = a - quot * b;
        if (rem < 0) {
            quot -= 1;
            rem += b;
        }
        mpz_class q_next = quot * q + q_prev;
        if (q_next > bound) {
            // Best semiconvergent: largest k with k*q + q_prev <= bound.
            mpz_class k = (bound - q_prev) / q;
            mpz_class q_semi = k * q + q_prev;
            mpz_class p_semi = k * p + p_prev;
            Rational conv(p, q), semi(p_semi, q_semi);
            conv.canonicalize();
            semi.canonicalize();
            // The semiconvergent only beats the last convergent when k >= quot/2.
            if (q_semi > 0 && abs(semi - x) < abs(conv - x)) return semi;
            return conv;
        }
        mpz_class p_next = quot * p + p_prev;
        p_prev = p;
        q_prev = q;
        p = p_next;
        q = q_next;
        a = b;
        b = rem;
    }
    Rational r(p, q);
    r.canonicalize();
    return r;
}

}  // namespace qmt
