#include <algorithm>
#include <cmath>
#include <functional>

#include "qmt/explore.hpp"
#include "qmt/sturm.hpp"
#include "qmt/tower.hpp"

namespace qmt {

namespace {

using Verdict = RegularityResult::Verdict;

RegularityResult pass(RegularityMethod m, int samples, std::string detail = "") {  // NOLINT
    return {Verdict::Pass, std::nullopt, m, samples, std::move(detail)};
}
RegularityResult fail(RegularityMethod m, std::vector<double> w, std::string detail,
                      int samples = 0) {
    return {Verdict::Fail, std::move(w), m, samples, std::move(detail)};
}
RegularityResult undecided(RegularityMethod m, std::string detail, int samples = 0) {
    return {Verdict::Undecided, std::nullopt, m, samples, std::move(detail)};
}

bool uses_only_base_var(const Polynomial& p) {
    for (std::size_t i = 1; i < p.nvars(); ++i)
        if (p.uses_variable(i)) return false;
    return true;
}

struct ExactSetup {
    bool ok = false;
    std::vector<ClosedInterval> region;
};

ExactSetup exact_setup(const TowerState& tw, const Polynomial& q) {
    ExactSetup s;
    if (tw.domain.dim != 1 || !tw.domain.box || !tw.domain.compact) return s;
    if (!uses_only_base_var(q)) return s;
    auto region = interval_region(tw.domain.constraints, (*tw.domain.box)[0].first,
                                  (*tw.domain.box)[0].second);
    if (!region) return s;
    s.ok = true;
    s.region = std::move(*region);
    return s;
}

// --- exact paths -------------------------------------------------------

RegularityResult comp_exact(const TowerState&, const Polynomial& q, const ExactSetup& setup) {
    Polynomial qu = compress_univariate(q, 0);
    if (qu.is_zero())
        return fail(RegularityMethod::SturmExact, {to_double(setup.region.front().lo)},
                    "q is identically zero; its zero set cannot lie in cl{q<0}");
    for (const auto& piece : setup.region) {
        if (piece.lo == piece.hi) {
            Rational v = qu.eval_exact(std::span<const Rational>(&piece.lo, 1));
            if (v == 0)
                return fail(RegularityMethod::SturmExact, {to_double(piece.lo)},
                            "q vanishes at an isolated point of X");
            continue;
        }
        SignProfile prof = sturm_profile(qu, piece.lo, piece.hi);
        std::size_t interior = 0;
        for (const auto& r : prof.roots) {
            bool at_lo = r.is_exact() && r.lo == piece.lo;
            bool at_hi = r.is_exact() && r.lo == piece.hi;
            if (at_lo) {
                if (!(prof.signs.front() < 0))
                    return fail(RegularityMethod::SturmExact, {to_double(r.lo)},
                                "zero of q at the left endpoint has no negative side");
            } else if (at_hi) {
                if (!(prof.signs.back() < 0))
                    return fail(RegularityMethod::SturmExact, {to_double(r.lo)},
                                "zero of q at the right endpoint has no negative side");
            } else {
                bool neg_left = prof.signs[interior] < 0;
                bool neg_right = prof.signs[interior + 1] < 0;
                ++interior;
                if (!neg_left && !neg_right)
                    return fail(RegularityMethod::SturmExact, {to_double(r.midpoint())},
                                "zero of q not approximable from {q<0} within X");
            }
        }
    }
    return pass(RegularityMethod::SturmExact, 0);
}

RegularityResult inj4_exact(const TowerState& tw, const RegularityData& d,
                            const ExactSetup& setup, double zero_tol) {
    Polynomial qu = compress_univariate(d.q, 0);
    if (qu.is_zero()) {
        // Zero set is all of X: g must equal h on X.
        if (tw.nf(d.g - d.h).is_zero()) return pass(RegularityMethod::SturmExact, 0);
        return fail(RegularityMethod::SturmExact, {to_double(setup.region.front().lo)},
                    "q is identically zero but g != h");
    }
    const bool gh_base = uses_only_base_var(d.g) && uses_only_base_var(d.h);
    if (gh_base) {
        Polynomial du = compress_univariate(d.g - d.h, 0);
        if (du.is_zero()) return pass(RegularityMethod::SturmExact, 0, "g = h");
        // Roots of q that are not roots of g-h.
        Polynomial bad = univariate_coprime_part(qu, du);
        for (const auto& piece : setup.region) {
            if (piece.lo == piece.hi) {
                Rational qv = qu.eval_exact(std::span<const Rational>(&piece.lo, 1));
                Rational dv = du.eval_exact(std::span<const Rational>(&piece.lo, 1));
                if (qv == 0 && dv != 0)
                    return fail(RegularityMethod::SturmExact, {to_double(piece.lo)},
                                "q(x)=0 but g(x) != h(x)");
                continue;
            }
            SignProfile prof = sturm_profile(bad, piece.lo, piece.hi);
            if (!prof.roots.empty())
                return fail(RegularityMethod::SturmExact,
                            {to_double(prof.roots.front().midpoint())},
                            "q(x)=0 but g(x) != h(x)");
        }
        return pass(RegularityMethod::SturmExact, 0);
    }
    // Zeros of q are exact; compare g and h through the evaluation map.
    for (const auto& piece : setup.region) {
        std::vector<RootInterval> roots;
        if (piece.lo == piece.hi) {
            if (qu.eval_exact(std::span<const Rational>(&piece.lo, 1)) == 0)
                roots.push_back({piece.lo, piece.lo, 1});
        } else {
            SignProfile prof = sturm_profile(qu, piece.lo, piece.hi);
            roots = prof.roots;
        }
        for (const auto& r : roots) {
            double x = to_double(r.midpoint());
            std::vector<double> vals = tw.eval_point(std::span<const double>(&x, 1));
            double gv = d.g.eval(vals), hv = d.h.eval(vals);
            if (std::abs(gv - hv) > zero_tol)
                return fail(RegularityMethod::SturmExact, {x},
                            "q(x)=0 but g(x) != h(x) (evaluated difference " +
                                std::to_string(gv - hv) + ")");
        }
    }
    return pass(RegularityMethod::SturmExact, 0, "zeros exact, g-h compared by evaluation");
}

// --- sampling paths on X ------------------------------------------------

struct XSamples {
    std::vector<std::vector<double>> xs;
    std::vector<double> f;  // q evaluated through m
};

// Zeros of q through the evaluation map on a one-dimensional X.
std::vector<double> zeros_on_X(const TowerState& tw, const Polynomial& q, int grid,
                               double zero_tol) {
    double lo = to_double((*tw.domain.box)[0].first);
    double hi = to_double((*tw.domain.box)[0].second);
    auto F = [&](double t) {
        std::vector<double> vals = tw.eval_point(std::span<const double>(&t, 1));
        return q.eval(vals);
    };
    std::vector<double> zeros;
    for (double z : scan_zeros(F, lo, hi, grid, zero_tol)) {
        bool in_X = true;
        for (const auto& g : tw.domain.constraints)
            in_X = in_X && g.eval(std::span<const double>(&z, 1)) >= -1e-12;
        if (in_X) zeros.push_back(z);
    }
    return zeros;
}

// Damped Newton with numeric gradients toward {F = 0} on X; returns the
// deduplicated converged zeros. Jump crossings of discontinuous F do not
// converge and are dropped.
std::vector<std::vector<double>> zeros_on_X_nd(
    const TowerState& tw, const std::function<double(std::span<const double>)>& F,
    const std::vector<std::vector<double>>& seeds, std::size_t max_seeds) {
    std::vector<std::vector<double>> zeros;
    auto in_X = [&](const std::vector<double>& x) {
        if (tw.domain.box) {
            for (std::size_t i = 0; i < tw.domain.dim; ++i) {
                if (x[i] < to_double((*tw.domain.box)[i].first) - 1e-9) return false;
                if (x[i] > to_double((*tw.domain.box)[i].second) + 1e-9) return false;
            }
        }
        for (const auto& g : tw.domain.constraints)
            if (g.eval(std::span<const double>(x.data(), x.size())) < -1e-9) return false;
        return true;
    };
    std::size_t step = std::max<std::size_t>(1, seeds.size() / max_seeds);
    for (std::size_t s = 0; s < seeds.size(); s += step) {
        std::vector<double> x = seeds[s];
        bool converged = false;
        for (int it = 0; it < 60; ++it) {
            double f = F(x);
            if (std::abs(f) < 1e-11) {
                converged = true;
                break;
            }
            std::vector<double> grad(x.size());
            double g2 = 0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                double h = 1e-7 * (1.0 + std::abs(x[i]));
                std::vector<double> xp = x, xm = x;
                xp[i] += h;
                xm[i] -= h;
                grad[i] = (F(xp) - F(xm)) / (2 * h);
                g2 += grad[i] * grad[i];
            }
            if (g2 < 1e-300 || !std::isfinite(g2)) break;
            for (std::size_t i = 0; i < x.size(); ++i) x[i] -= f * grad[i] / g2;
        }
        if (!converged || !in_X(x)) continue;
        bool dup = false;
        for (const auto& z : zeros) {
            double d2 = 0;
            for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - z[i]) * (x[i] - z[i]);
            dup = dup || d2 < 1e-10;
        }
        if (!dup) zeros.push_back(x);
    }
    return zeros;
}

XSamples sample_X_sorted(const TowerState& tw, const Polynomial& q, int n, std::uint64_t seed) {
    XSamples s;
    s.xs = sample_domain(tw.domain, n, seed);
    if (tw.domain.dim == 1)
        std::sort(s.xs.begin(), s.xs.end(),
                  [](const auto& a, const auto& b) { return a[0] < b[0]; });
    s.f.reserve(s.xs.size());
    for (const auto& x : s.xs) {
        std::vector<double> vals = tw.eval_point(std::span<const double>(x.data(), x.size()));
        s.f.push_back(q.eval(vals));
    }
    return s;
}

RegularityResult comp_sampling(const TowerState& tw, const Polynomial& q, const Tolerances& tol) {
    if (!tw.domain.box) return undecided(RegularityMethod::Sampling, "no sampling box for X");
    const int n = tol.variety_samples;
    XSamples s = sample_X_sorted(tw, q, n, tol.seed);

    if (tw.domain.dim == 1) {
        for (double z : zeros_on_X(tw, q, n, tol.zero_tol)) {
            bool near_neg = false;
            for (std::size_t i = 0; i < s.xs.size() && !near_neg; ++i)
                near_neg = s.f[i] < -tol.sign_tol && std::abs(s.xs[i][0] - z) <= tol.neighborhood;
            if (!near_neg)
                return fail(RegularityMethod::Sampling, {z},
                            "sampled zero of q not near any sampled {q<0} point", n);
        }
        return pass(RegularityMethod::Sampling, n);
    }

    // Multivariate X: pin the zero set by Newton projection from the
    // sample cloud, then test each zero against the nearby negatives.
    auto F = [&](std::span<const double> x) {
        std::vector<double> vals = tw.eval_point(x);
        return q.eval(vals);
    };
    auto zeros = zeros_on_X_nd(
        tw, F, s.xs, 500);
    for (const auto& z : zeros) {
        bool near_neg = false;
        for (std::size_t j = 0; j < s.xs.size() && !near_neg; ++j) {
            if (s.f[j] >= -tol.sign_tol) continue;
            double d2 = 0;
            for (std::size_t k = 0; k < tw.domain.dim; ++k) {
                double dk = z[k] - s.xs[j][k];
                d2 += dk * dk;
            }
            near_neg = std::sqrt(d2) <= tol.neighborhood;
        }
        if (!near_neg)
            return fail(RegularityMethod::Sampling, z,
                        "sampled zero of q not near any sampled {q<0} point", n);
    }
    if (zeros.empty()) {
        double min_abs = 1e300;
        for (double fv : s.f) min_abs = std::min(min_abs, std::abs(fv));
        if (min_abs <= 10 * tol.zero_tol)
            return undecided(RegularityMethod::Sampling,
                             "q has near-zero samples but its zero set could not be pinned", n);
    }
    return pass(RegularityMethod::Sampling, n);
}

RegularityResult inj4_sampling(const TowerState& tw, const RegularityData& d,
                               const Tolerances& tol) {
    if (!tw.domain.box) return undecided(RegularityMethod::Sampling, "no sampling box for X");
    const int n = tol.variety_samples;
    XSamples s = sample_X_sorted(tw, d.q, n, tol.seed);

    auto gh_gap = [&](const std::vector<double>& x) {
        std::vector<double> vals = tw.eval_point(std::span<const double>(x.data(), x.size()));
        return std::abs(d.g.eval(vals) - d.h.eval(vals));
    };

    if (tw.domain.dim == 1) {
        for (double z : zeros_on_X(tw, d.q, n, tol.zero_tol)) {
            std::vector<double> x{z};
            if (gh_gap(x) > tol.zero_tol)
                return fail(RegularityMethod::Sampling, x, "q(x)=0 but g(x) != h(x)", n);
        }
        return pass(RegularityMethod::Sampling, n);
    }
    auto F = [&](std::span<const double> x) {
        std::vector<double> vals = tw.eval_point(x);
        return d.q.eval(vals);
    };
    for (const auto& z : zeros_on_X_nd(tw, F, s.xs, 500)) {
        if (gh_gap(z) > tol.zero_tol)
            return fail(RegularityMethod::Sampling, z, "q(x)=0 but g(x) != h(x)", n);
    }
    return pass(RegularityMethod::Sampling, n);
}

// --- sampling paths on K_{Q,Y} ------------------------------------------

struct KSamples {
    PointCloud cloud;
    PointCloud zeros;
    Polynomial q_vis;
    double min_abs_q = 1e300;
};

KSamples sample_K(const TowerState& tw, const Polynomial& q, const Tolerances& tol) {
    KSamples ks;
    Presentation pr = presentation(tw);
    ks.q_vis = pr.compress(q);
    VarietyOptions opts;
    opts.box = derive_box(tw);
    opts.samples = tol.variety_samples;
    opts.rel_tol = tol.rel_tol;
    opts.pos_tol = tol.pos_tol;
    opts.seed = tol.seed;
    ks.cloud = sample_variety(tw, opts);
    ks.zeros = project_to_zero_set(tw, ks.cloud, ks.q_vis, tol.refine_tol, tol.pos_tol);
    for (std::size_t i = 0; i < ks.cloud.size(); ++i)
        ks.min_abs_q = std::min(ks.min_abs_q, std::abs(ks.q_vis.eval(ks.cloud.point(i))));
    return ks;
}

double point_dist(std::span<const double> a, std::span<const double> b) {
    double d2 = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(d2);
}

RegularityResult alinj4_sampling(const TowerState& tw, const RegularityData& d,
                                 const Tolerances& tol) {
    KSamples ks = sample_K(tw, d.q, tol);
    Presentation pr = presentation(tw);
    Polynomial g_vis = pr.compress(d.g), h_vis = pr.compress(d.h);
    const int n = static_cast<int>(ks.cloud.size());
    if (ks.zeros.size() == 0) {
        if (ks.min_abs_q <= 10 * tol.zero_tol)
            return undecided(RegularityMethod::Sampling,
                             "zero set of q on K could not be pinned by projection", n);
        return pass(RegularityMethod::Sampling, n, "no zeros of q on sampled K");
    }
    for (std::size_t i = 0; i < ks.zeros.size(); ++i) {
        auto z = ks.zeros.point(i);
        if (std::abs(g_vis.eval(z) - h_vis.eval(z)) > tol.zero_tol)
            return fail(RegularityMethod::Sampling, std::vector<double>(z.begin(), z.end()),
                        "zero of q on K where g != h", n);
    }
    return pass(RegularityMethod::Sampling, n);
}

RegularityResult alinj5_sampling(const TowerState& tw, const RegularityData& d,
                                 const Tolerances& tol) {
    KSamples ks = sample_K(tw, d.q, tol);
    const int n = static_cast<int>(ks.cloud.size());
    if (ks.zeros.size() == 0) {
        if (ks.min_abs_q <= 10 * tol.zero_tol)
            return undecided(RegularityMethod::Sampling,
                             "zero set of q on K could not be pinned by projection", n);
        return pass(RegularityMethod::Sampling, n, "no zeros of q on sampled K");
    }
    for (std::size_t i = 0; i < ks.zeros.size(); ++i) {
        auto z = ks.zeros.point(i);
        bool near_pos = false, near_neg = false;
        for (std::size_t j = 0; j < ks.cloud.size() && !(near_pos && near_neg); ++j) {
            double qv = ks.q_vis.eval(ks.cloud.point(j));
            if (qv > tol.sign_tol && !near_pos)
                near_pos = point_dist(z, ks.cloud.point(j)) <= tol.neighborhood;
            if (qv < -tol.sign_tol && !near_neg)
                near_neg = point_dist(z, ks.cloud.point(j)) <= tol.neighborhood;
        }
        if (!near_pos || !near_neg)
            return fail(RegularityMethod::Sampling, std::vector<double>(z.begin(), z.end()),
                        std::string("zero of q on K not approximable from ") +
                            (!near_pos ? "{q>0}" : "{q<0}"),
                        n);
    }
    return pass(RegularityMethod::Sampling, n);
}

}  // namespace

RegularityResult check_regularity(const TowerState& tw, const RegularityData& data,
                                  RegularityCase which, RegularityMethod method,
                                  const Tolerances& tol) {
    switch (which) {
        case RegularityCase::Comp: {
            ExactSetup setup = exact_setup(tw, data.q);
            if (method == RegularityMethod::SturmExact && !setup.ok)
                return undecided(RegularityMethod::SturmExact,
                                 "exact method requires a univariate interval domain");
            if (setup.ok && method != RegularityMethod::Sampling)
                return comp_exact(tw, data.q, setup);  // tw reserved for witness context
            return comp_sampling(tw, data.q, tol);
        }
        case RegularityCase::InjCase4: {
            ExactSetup setup = exact_setup(tw, data.q);
            if (method == RegularityMethod::SturmExact && !setup.ok)
                return undecided(RegularityMethod::SturmExact,
                                 "exact method requires a univariate interval domain");
            if (setup.ok && method != RegularityMethod::Sampling)
                return inj4_exact(tw, data, setup, tol.zero_tol);
            return inj4_sampling(tw, data, tol);
        }
        case RegularityCase::AlinjCase4:
            if (method == RegularityMethod::SturmExact)
                return undecided(RegularityMethod::SturmExact,
                                 "closure-level regularity is decided by sampling");
            return alinj4_sampling(tw, data, tol);
        case RegularityCase::AlinjCase5:
            if (method == RegularityMethod::SturmExact)
                return undecided(RegularityMethod::SturmExact,
                                 "closure-level regularity is decided by sampling");
            return alinj5_sampling(tw, data, tol);
    }
    throw std::logic_error("unknown regularity case");
}

}  // namespace qmt
