#include "qmt/sturm.hpp"

#include <algorithm>
#include <stdexcept>

namespace qmt {

namespace {

// Dense univariate polynomial over the rationals, coefficients low to high.
struct UniPoly {
    std::vector<Rational> c;

    void normalize() {
        while (!c.empty() && c.back() == 0) c.pop_back();
    }
    int degree() const { return static_cast<int>(c.size()) - 1; }
    bool is_zero() const { return c.empty(); }

    Rational eval(const Rational& x) const {
        Rational acc(0);
        for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
        return acc;
    }
    int sign_at(const Rational& x) const { return sgn(eval(x)); }

    UniPoly derivative() const {
        UniPoly d;
        for (std::size_t i = 1; i < c.size(); ++i) d.c.push_back(c[i] * Rational(static_cast<long>(i)));
        d.normalize();
        return d;
    }
    UniPoly monic() const {
        UniPoly m(*this);
        if (!m.is_zero()) {
            Rational lead = m.c.back();
            for (auto& k : m.c) k /= lead;
        }
        return m;
    }
};

UniPoly operator-(const UniPoly& a) {
    UniPoly r(a);
    for (auto& k : r.c) k = -k;
    return r;
}

// Exact division with remainder over the field of rationals.
std::pair<UniPoly, UniPoly> divmod(const UniPoly& a, const UniPoly& b) {
    if (b.is_zero()) throw std::logic_error("univariate division by zero");
    UniPoly rem = a, quot;
    quot.c.assign(std::max<int>(0, a.degree() - b.degree() + 1), Rational(0));
    while (!rem.is_zero() && rem.degree() >= b.degree()) {
        int shift = rem.degree() - b.degree();
        Rational f = rem.c.back() / b.c.back();
        quot.c[shift] = f;
        for (int i = 0; i <= b.degree(); ++i) rem.c[i + shift] -= f * b.c[i];
        rem.normalize();
    }
    quot.normalize();
    return {quot, rem};
}

UniPoly gcd_monic(UniPoly a, UniPoly b) {
    a.normalize();
    b.normalize();
    while (!b.is_zero()) {
        UniPoly r = divmod(a, b).second;
        a = b;
        b = r;
    }
    return a.monic();
}

UniPoly sub(const UniPoly& a, const UniPoly& b) {
    UniPoly d;
    d.c.assign(std::max(a.c.size(), b.c.size()), Rational(0));
    for (std::size_t i = 0; i < a.c.size(); ++i) d.c[i] += a.c[i];
    for (std::size_t i = 0; i < b.c.size(); ++i) d.c[i] -= b.c[i];
    d.normalize();
    return d;
}

// Yun squarefree decomposition: returns (factor, multiplicity) pairs with
// squarefree pairwise-coprime factors.
std::vector<std::pair<UniPoly, int>> squarefree_decomposition(const UniPoly& f) {
    std::vector<std::pair<UniPoly, int>> out;
    if (f.degree() < 1) return out;
    UniPoly fp = f.derivative();
    UniPoly g = gcd_monic(f, fp);
    if (g.degree() == 0) {
        out.emplace_back(f.monic(), 1);
        return out;
    }
    UniPoly ci = divmod(f, g).first;
    UniPoly di = sub(divmod(fp, g).first, ci.derivative());
    int i = 1;
    while (ci.degree() > 0) {
        UniPoly fi = gcd_monic(ci, di);
        if (fi.degree() > 0) out.emplace_back(fi, i);
        ci = divmod(ci, fi).first;
        di = sub(divmod(di, fi).first, ci.derivative());
        ++i;
    }
    return out;
}

struct SturmChain {
    std::vector<UniPoly> seq;

    explicit SturmChain(const UniPoly& f) {
        seq.push_back(f);
        UniPoly d = f.derivative();
        if (!d.is_zero()) seq.push_back(d);
        while (seq.size() >= 2 && !seq.back().is_zero()) {
            UniPoly r = divmod(seq[seq.size() - 2], seq.back()).second;
            if (r.is_zero()) break;
            seq.push_back(-r);
        }
    }
    int variations(const Rational& x) const {
        int v = 0, prev = 0;
        for (const auto& p : seq) {
            int s = p.sign_at(x);
            if (s == 0) continue;
            if (prev != 0 && s != prev) ++v;
            prev = s;
        }
        return v;
    }
    // Distinct roots in the open interval (a, b). For squarefree f the
    // variation count at an exact root equals its right-hand limit, so
    // only a root at b needs the -1 correction.
    int count_open(const Rational& a, const Rational& b, const UniPoly& f) const {
        int n = variations(a) - variations(b);
        if (f.sign_at(b) == 0) n -= 1;
        return n;
    }
};

struct IsolatedRoot {
    Rational lo, hi;  // lo == hi: exact
    int multiplicity;
};

// Isolate the (simple) roots of squarefree f within [lo, hi].
void isolate_squarefree(const UniPoly& f, const Rational& lo, const Rational& hi, int multiplicity,
                        std::vector<IsolatedRoot>& out) {
    if (f.degree() < 1) return;
    SturmChain chain(f);
    if (f.sign_at(lo) == 0) out.push_back({lo, lo, multiplicity});
    if (hi != lo && f.sign_at(hi) == 0) out.push_back({hi, hi, multiplicity});

    struct Seg {
        Rational a, b;
        int count;
    };
    std::vector<Seg> work;
    int total = chain.count_open(lo, hi, f);
    if (total > 0) work.push_back({lo, hi, total});

    while (!work.empty()) {
        Seg s = work.back();
        work.pop_back();
        if (s.count == 0) continue;
        if (s.count == 1) {
            // Shrink until narrow or an exact hit.
            Rational a = s.a, b = s.b;
            Rational width_limit = (hi - lo) / 1048576;  // 2^-20 of the span
            bool exact = false;
            while (b - a > width_limit) {
                Rational m = (a + b) / 2;
                int sm = f.sign_at(m);
                if (sm == 0) {
                    out.push_back({m, m, multiplicity});
                    exact = true;
                    break;
                }
                if (chain.count_open(a, m, f) == 1) b = m;
                else a = m;
            }
            if (!exact) out.push_back({a, b, multiplicity});
            continue;
        }
        Rational m = (s.a + s.b) / 2;
        if (f.sign_at(m) == 0) out.push_back({m, m, multiplicity});
        int left = chain.count_open(s.a, m, f);
        int right = s.count - left - (f.sign_at(m) == 0 ? 1 : 0);
        if (left > 0) work.push_back({s.a, m, left});
        if (right > 0) work.push_back({m, s.b, right});
    }
}

UniPoly to_unipoly(const Polynomial& q) {
    auto var = single_variable(q);
    if (!var) throw std::invalid_argument("sturm: polynomial is not univariate");
    Polynomial u = q.nvars() == 1 ? q : compress_univariate(q, *var);
    UniPoly p;
    p.c.assign(static_cast<std::size_t>(u.degree()) + 1, Rational(0));
    for (const auto& [m, c] : u.terms()) p.c[m.exps[0]] = c;
    p.normalize();
    return p;
}

}  // namespace

Polynomial univariate_coprime_part(const Polynomial& q, const Polynomial& d) {
    UniPoly fq = to_unipoly(q), fd = to_unipoly(d);
    if (fq.is_zero()) throw std::invalid_argument("coprime part of the zero polynomial");
    // Squarefree part: product of the squarefree factors.
    UniPoly sf;
    sf.c = {Rational(1)};
    for (const auto& [factor, mult] : squarefree_decomposition(fq)) {
        UniPoly prod;
        prod.c.assign(sf.c.size() + factor.c.size() - 1, Rational(0));
        for (std::size_t i = 0; i < sf.c.size(); ++i)
            for (std::size_t j = 0; j < factor.c.size(); ++j) prod.c[i + j] += sf.c[i] * factor.c[j];
        prod.normalize();
        sf = prod;
    }
    UniPoly g = fd.is_zero() ? sf : gcd_monic(sf, fd);
    UniPoly rest = g.degree() < 1 ? sf : divmod(sf, g).first;
    Polynomial out(1);
    for (std::size_t i = 0; i < rest.c.size(); ++i) {
        Monomial m(1);
        m.exps[0] = static_cast<std::uint32_t>(i);
        out.add_term(m, rest.c[i]);
    }
    return out;
}

std::optional<std::size_t> single_variable(const Polynomial& p) {
    std::optional<std::size_t> var;
    for (std::size_t i = 0; i < p.nvars(); ++i) {
        if (!p.uses_variable(i)) continue;
        if (var) return std::nullopt;
        var = i;
    }
    if (!var) var = 0;  // constant: treat as univariate in the first variable
    return var;
}

Polynomial compress_univariate(const Polynomial& p, std::size_t var) {
    Polynomial r(1);
    for (const auto& [m, c] : p.terms()) {
        Monomial mm(1);
        mm.exps[0] = m.exps.empty() ? 0 : m.exps[var];
        r.add_term(mm, c);
    }
    return r;
}

SignProfile sturm_profile(const Polynomial& q, const Rational& lo, const Rational& hi) {
    if (q.is_zero()) throw std::invalid_argument("sturm_profile: zero polynomial");
    if (lo > hi) throw std::invalid_argument("sturm_profile: empty interval");
    UniPoly f = to_unipoly(q);

    SignProfile prof;
    prof.lo = lo;
    prof.hi = hi;

    if (lo == hi) {
        int s = f.sign_at(lo);
        if (s == 0) prof.roots.push_back({lo, lo, 1});
        else {
            prof.signs.push_back(s);
            prof.sign_samples.push_back(lo);
        }
        return prof;
    }

    std::vector<IsolatedRoot> roots;
    for (const auto& [factor, mult] : squarefree_decomposition(f))
        isolate_squarefree(factor, lo, hi, mult, roots);

    // Cross-factor intervals are disjoint (distinct roots); refining is
    // unnecessary because factor roots never coincide, but sort them.
    std::sort(roots.begin(), roots.end(),
              [](const IsolatedRoot& a, const IsolatedRoot& b) { return a.lo < b.lo; });
    for (const auto& r : roots) prof.roots.push_back({r.lo, r.hi, r.multiplicity});

    // Sign samples between consecutive interior root intervals.
    std::vector<IsolatedRoot> interior;
    for (const auto& r : roots)
        if (!(r.lo == r.hi && (r.lo == lo || r.lo == hi))) interior.push_back(r);

    std::vector<Rational> cuts;  // sample points
    if (interior.empty()) {
        cuts.push_back((lo + hi) / 2);
    } else {
        cuts.push_back((lo + interior.front().lo) / 2);
        for (std::size_t i = 0; i + 1 < interior.size(); ++i)
            cuts.push_back((interior[i].hi + interior[i + 1].lo) / 2);
        cuts.push_back((interior.back().hi + hi) / 2);
    }
    for (const auto& x : cuts) {
        int s = f.sign_at(x);
        if (s == 0) throw std::logic_error("sturm_profile: sample hit a root");
        prof.signs.push_back(s);
        prof.sign_samples.push_back(x);
    }
    return prof;
}

int count_roots_closed(const Polynomial& q, const Rational& lo, const Rational& hi) {
    SignProfile p = sturm_profile(q, lo, hi);
    return static_cast<int>(p.roots.size());
}

std::optional<std::vector<ClosedInterval>> interval_region(
    const std::vector<Polynomial>& constraints, const Rational& lo, const Rational& hi) {
    std::vector<ClosedInterval> region{{lo, hi}};
    for (const auto& g : constraints) {
        if (g.is_zero()) return std::nullopt;
        if (g.is_constant()) {
            if (g.constant_value() < 0) return std::vector<ClosedInterval>{};
            continue;
        }
        std::vector<ClosedInterval> next;
        for (const auto& piece : region) {
            if (piece.lo == piece.hi) {
                Rational v = compress_univariate(g, *single_variable(g))
                                 .eval_exact(std::span<const Rational>(&piece.lo, 1));
                if (v >= 0) next.push_back(piece);
                continue;
            }
            SignProfile prof = sturm_profile(g, piece.lo, piece.hi);
            for (const auto& r : prof.roots)
                if (!r.is_exact()) return std::nullopt;  // irrational boundary
            // Walk division points; keep closed pieces with sign >= 0 and
            // singleton roots inside negative stretches.
            std::vector<Rational> pts{piece.lo};
            for (const auto& r : prof.roots)
                if (r.lo != piece.lo && r.lo != piece.hi) pts.push_back(r.lo);
            pts.push_back(piece.hi);
            std::vector<ClosedInterval> pos;
            for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
                if (prof.signs[i] > 0) pos.push_back({pts[i], pts[i + 1]});
            }
            // Merge adjacent positive pieces sharing a root endpoint.
            std::vector<ClosedInterval> merged;
            for (auto& iv : pos) {
                if (!merged.empty() && merged.back().hi == iv.lo) merged.back().hi = iv.hi;
                else merged.push_back(iv);
            }
            // Roots inside negative stretches become singletons.
            for (const auto& r : prof.roots) {
                bool covered = false;
                for (const auto& iv : merged) covered |= (iv.lo <= r.lo && r.lo <= iv.hi);
                if (!covered) merged.push_back({r.lo, r.lo});
            }
            std::sort(merged.begin(), merged.end(),
                      [](const ClosedInterval& a, const ClosedInterval& b) { return a.lo < b.lo; });
            for (auto& iv : merged) next.push_back(iv);
        }
        region = std::move(next);
        if (region.empty()) break;
    }
    return region;
}

}  // namespace qmt
