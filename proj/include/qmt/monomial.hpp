#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

namespace qmt {

// Exponent vector over a fixed ambient variable list.
struct Monomial {
    std::vector<std::uint32_t> exps;

    Monomial() = default;
    explicit Monomial(std::size_t nvars) : exps(nvars, 0) {}

    std::size_t nvars() const { return exps.size(); }
    std::uint32_t degree() const {
        return std::accumulate(exps.begin(), exps.end(), std::uint32_t{0});
    }
    bool is_one() const {
        return std::all_of(exps.begin(), exps.end(), [](auto e) { return e == 0; });
    }
    bool divides(const Monomial& m) const {
        for (std::size_t i = 0; i < exps.size(); ++i)
            if (exps[i] > m.exps[i]) return false;
        return true;
    }
    Monomial operator*(const Monomial& m) const {
        Monomial r(*this);
        for (std::size_t i = 0; i < exps.size(); ++i) r.exps[i] += m.exps[i];
        return r;
    }
    // Requires divides(m) at the call site (m / *this).
    Monomial divide_into(const Monomial& m) const {
        Monomial r(m);
        for (std::size_t i = 0; i < exps.size(); ++i) r.exps[i] -= exps[i];
        return r;
    }
    Monomial lcm(const Monomial& m) const {
        Monomial r(*this);
        for (std::size_t i = 0; i < exps.size(); ++i) r.exps[i] = std::max(r.exps[i], m.exps[i]);
        return r;
    }
    bool coprime(const Monomial& m) const {
        for (std::size_t i = 0; i < exps.size(); ++i)
            if (exps[i] > 0 && m.exps[i] > 0) return false;
        return true;
    }
    Monomial extended(std::size_t new_nvars) const {
        Monomial r(*this);
        r.exps.resize(new_nvars, 0);
        return r;
    }
    bool operator==(const Monomial& m) const { return exps == m.exps; }
};

// Graded reverse-lexicographic order with an explicit variable priority
// permutation: priority[k] is the index of the k-th most significant variable.
struct TermOrder {
    std::vector<std::uint32_t> priority;

    static TermOrder grevlex(std::size_t nvars) {
        TermOrder o;
        o.priority.resize(nvars);
        for (std::size_t i = 0; i < nvars; ++i) o.priority[i] = static_cast<std::uint32_t>(i);
        return o;
    }

    // <0 if a < b, 0 if equal, >0 if a > b.
    int compare(const Monomial& a, const Monomial& b) const {
        std::uint32_t da = a.degree(), db = b.degree();
        if (da != db) return da < db ? -1 : 1;
        // Equal degree: smaller exponent in the least significant variable wins.
        for (std::size_t k = priority.size(); k-- > 0;) {
            std::uint32_t i = priority[k];
            if (a.exps[i] != b.exps[i]) return a.exps[i] > b.exps[i] ? -1 : 1;
        }
        return 0;
    }
    bool less(const Monomial& a, const Monomial& b) const { return compare(a, b) < 0; }
};

// Map comparator using grevlex with identity priority; gives every
// Polynomial a canonical iteration order independent of any TermOrder.
struct MonoLess {
    bool operator()(const Monomial& a, const Monomial& b) const {
        std::uint32_t da = a.degree(), db = b.degree();
        if (da != db) return da < db;
        for (std::size_t k = a.exps.size(); k-- > 0;)
            if (a.exps[k] != b.exps[k]) return a.exps[k] > b.exps[k];
        return false;
    }
};

}  // namespace qmt
