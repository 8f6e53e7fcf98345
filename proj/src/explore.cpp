#include "qmt/explore.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace qmt {

PointCloud PointCloud::project(const std::vector<std::size_t>& coords) const {
    PointCloud out;
    out.dim = coords.size();
    out.label = label;
    out.seed = seed;
    out.data.reserve(size() * coords.size());
    for (std::size_t i = 0; i < size(); ++i) {
        auto p = point(i);
        for (std::size_t c : coords) out.data.push_back(p[c]);
    }
    return out;
}

std::string to_csv(const PointCloud& cloud, std::span<const std::string> names) {
    std::ostringstream out;
    for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
    out << "\n";
    char buf[64];
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        auto p = cloud.point(i);
        for (std::size_t j = 0; j < cloud.dim; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", p[j]);
            out << (j ? "," : "") << buf;
        }
        out << "\n";
    }
    return out.str();
}

std::vector<std::vector<double>> sample_domain(const DomainDescription& dom, int n,
                                               std::uint64_t seed) {
    dom.validate();
    if (!dom.box) throw std::runtime_error("sample_domain requires a bounding box");
    std::mt19937_64 rng(seed);
    std::vector<std::uniform_real_distribution<double>> dists;
    for (const auto& [lo, hi] : *dom.box)
        dists.emplace_back(to_double(lo), to_double(hi));

    std::vector<std::vector<double>> out;
    out.reserve(static_cast<std::size_t>(n));
    const long max_attempts = static_cast<long>(n) * 10000L;
    long attempts = 0;
    std::vector<double> x(dom.dim);
    // One-dimensional domains are sampled on a jittered grid: the maximal
    // gap then stays near range/n instead of the log(n)/n fluctuations of
    // plain uniform draws, which matters for coverage verdicts.
    const bool stratified = dom.dim == 1;
    const double lo = to_double((*dom.box)[0].first);
    const double range = to_double((*dom.box)[0].second) - lo;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    long cell = 0;
    while (static_cast<int>(out.size()) < n) {
        if (++attempts > max_attempts)
            throw std::runtime_error(
                "sample_domain: acceptance rate below 1e-4; the box is far larger than X");
        if (stratified) {
            x[0] = lo + range * (static_cast<double>(cell % n) + unit(rng)) / n;
            ++cell;
        } else {
            for (std::size_t i = 0; i < dom.dim; ++i) x[i] = dists[i](rng);
        }
        bool ok = true;
        for (const auto& g : dom.constraints)
            ok = ok && g.eval(std::span<const double>(x.data(), x.size())) >= 0;
        if (ok) out.push_back(x);
    }
    return out;
}

std::vector<double> scan_zeros(const std::function<double(double)>& F, double lo, double hi,
                               int grid, double zero_tol) {
    std::vector<double> zeros;
    auto push = [&](double t) {
        for (double z : zeros)
            if (std::abs(z - t) < 1e-7) return;
        zeros.push_back(t);
    };
    auto polish = [&](double t) {
        double best = t, fb = std::abs(F(t));
        for (int it = 0; it < 60; ++it) {
            double f = F(t);
            double h = 1e-7 * (1.0 + std::abs(t));
            double d = (F(t + h) - F(t - h)) / (2 * h);
            if (d == 0 || !std::isfinite(d)) break;
            double next = t - f / d;
            if (!std::isfinite(next) || std::abs(next - t) > 1.0) break;
            t = next;
            double ft = std::abs(F(t));
            if (ft < fb) {
                fb = ft;
                best = t;
            }
            if (ft < 1e-14) break;
        }
        return best;
    };
    double prev_t = lo, prev_f = F(lo);
    for (int i = 0; i <= grid; ++i) {
        double t = lo + (hi - lo) * i / grid;
        double f = F(t);
        if (std::abs(f) <= zero_tol) push(polish(t));
        if (i > 0 && prev_f * f < 0) {
            double a = prev_t, b = t, fa = prev_f;
            for (int it = 0; it < 80; ++it) {
                double m = 0.5 * (a + b), fm = F(m);
                if (fm == 0) {
                    a = b = m;
                    break;
                }
                if ((fm > 0) == (fa > 0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            double t0 = 0.5 * (a + b);
            if (std::abs(F(t0)) <= zero_tol) push(polish(t0));  // else: a jump
        }
        prev_t = t;
        prev_f = f;
    }
    std::sort(zeros.begin(), zeros.end());
    return zeros;
}

std::vector<std::vector<double>> sample_domain_with_switches(const TowerState& tw, int n,
                                                             std::uint64_t seed) {
    auto xs = sample_domain(tw.domain, n, seed);
    if (tw.domain.dim != 1 || !tw.domain.box) return xs;
    double lo = to_double((*tw.domain.box)[0].first);
    double hi = to_double((*tw.domain.box)[0].second);
    auto on_X = [&](double t) {
        for (const auto& g : tw.domain.constraints)
            if (g.eval(std::span<const double>(&t, 1)) < 0) return false;
        return true;
    };
    for (const auto& s : tw.symbols) {
        if (s.kind != SymbolKind::Piecewise && s.kind != SymbolKind::Characteristic) continue;
        auto F = [&](double t) {
            std::vector<double> vals = tw.eval_point(std::span<const double>(&t, 1));
            return s.q.eval(vals);
        };
        for (double z : scan_zeros(F, lo, hi, 4096, 1e-5))
            if (on_X(z)) xs.push_back({z});
    }
    return xs;
}

PointCloud image_points(const TowerState& tw, const std::vector<std::vector<double>>& xs) {
    Presentation pr = presentation(tw);
    PointCloud cloud;
    cloud.dim = pr.nvars;
    cloud.label = PointCloud::Label::ImageOfX;
    std::vector<double> row(pr.nvars);
    for (const auto& x : xs) {
        std::vector<double> vals = tw.eval_point(std::span<const double>(x.data(), x.size()));
        for (std::size_t k = 0; k < pr.nvars; ++k) row[k] = vals[pr.symbol_of[k]];
        cloud.push(row);
    }
    return cloud;
}

std::vector<std::pair<double, double>> derive_box(const TowerState& tw) {
    Presentation pr = presentation(tw);
    std::vector<std::pair<double, double>> box;
    box.reserve(pr.nvars);
    for (std::size_t k = 0; k < pr.nvars; ++k) {
        std::size_t i = pr.symbol_of[k];
        const VarStatus& st = tw.witness.vars[i];
        double lo, hi;
        bool window = st.window_only;
        if (st.range_known) {
            lo = st.lo;
            hi = st.hi;
        } else if (i < tw.domain.dim && tw.domain.box) {
            lo = to_double((*tw.domain.box)[i].first);
            hi = to_double((*tw.domain.box)[i].second);
            window = true;
        } else {
            throw std::runtime_error("no bound known for variable '" + tw.symbols[i].name +
                                     "'; provide an explicit sampling box");
        }
        // An unbounded coordinate gets no slack: its window must match the
        // image window, or the tails would read as spurious points.
        double slack = window ? 0.0 : 0.05 * (hi - lo) + 1e-3;
        box.emplace_back(lo - slack, hi + slack);
    }
    return box;
}

namespace {

struct GnSystem {
    std::vector<Polynomial> eqs;                    // zero targets
    std::vector<std::vector<Polynomial>> grads;     // per eq, per free coord
    std::vector<std::size_t> free_coords;
};

GnSystem make_system(const std::vector<Polynomial>& eqs, std::size_t nvars,
                     const std::vector<std::size_t>& binary_vars) {
    GnSystem sys;
    sys.eqs = eqs;
    std::vector<bool> is_binary(nvars, false);
    for (std::size_t b : binary_vars) is_binary[b] = true;
    for (std::size_t i = 0; i < nvars; ++i)
        if (!is_binary[i]) sys.free_coords.push_back(i);
    for (const auto& e : sys.eqs) {
        std::vector<Polynomial> row;
        for (std::size_t c : sys.free_coords) row.push_back(e.derivative(c));
        sys.grads.push_back(std::move(row));
    }
    return sys;
}

// Damped Gauss-Newton toward {eqs = 0}, moving only the free coordinates.
// Returns the final residual infinity norm.
double refine(const GnSystem& sys, std::vector<double>& v, int max_iters, double target) {
    const std::size_t m = sys.eqs.size(), k = sys.free_coords.size();
    if (m == 0) return 0.0;
    Eigen::MatrixXd J(m, k);
    Eigen::VectorXd r(m);
    double res = 0;
    for (int it = 0; it < max_iters; ++it) {
        res = 0;
        for (std::size_t e = 0; e < m; ++e) {
            r(e) = sys.eqs[e].eval(v);
            res = std::max(res, std::abs(r(e)));
        }
        if (res <= target) return res;
        for (std::size_t e = 0; e < m; ++e)
            for (std::size_t c = 0; c < k; ++c) J(e, c) = sys.grads[e][c].eval(v);
        Eigen::MatrixXd JtJ = J.transpose() * J;
        JtJ.diagonal().array() += 1e-12 + 1e-10 * JtJ.diagonal().maxCoeff();
        Eigen::VectorXd step = JtJ.ldlt().solve(-J.transpose() * r);
        if (!step.allFinite()) break;
        for (std::size_t c = 0; c < k; ++c) v[sys.free_coords[c]] += step(c);
    }
    res = 0;
    for (std::size_t e = 0; e < m; ++e) res = std::max(res, std::abs(sys.eqs[e].eval(v)));
    return res;
}

bool in_box(std::span<const double> v, const std::vector<std::pair<double, double>>& box) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        double slack = 1e-6 * (1.0 + std::abs(box[i].second - box[i].first));
        if (v[i] < box[i].first - slack || v[i] > box[i].second + slack) return false;
    }
    return true;
}

bool gens_ok(const std::vector<QmGenerator>& gens, std::span<const double> v, double pos_tol) {
    for (const auto& g : gens)
        if (g.poly.eval(v) < -pos_tol) return false;
    return true;
}

std::vector<std::vector<int>> binary_assignments(std::size_t k) {
    if (k > 12) throw std::runtime_error("too many binary variables to enumerate");
    std::vector<std::vector<int>> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
        std::vector<int> a(k);
        for (std::size_t i = 0; i < k; ++i) a[i] = (mask >> i) & 1 ? 1 : 0;
        out.push_back(std::move(a));
    }
    return out;
}

}  // namespace

PointCloud sample_variety(const TowerState& tw, const VarietyOptions& opts) {
    Presentation pr = presentation(tw);
    std::vector<std::pair<double, double>> box = opts.box.empty() ? derive_box(tw) : opts.box;
    if (box.size() != pr.nvars) throw std::invalid_argument("variety box has wrong dimension");

    PointCloud cloud;
    cloud.dim = pr.nvars;
    cloud.label = PointCloud::Label::VarietySample;
    cloud.seed = opts.seed;

    GnSystem sys = make_system(pr.ideal.gens, pr.nvars, pr.binary_vars);
    auto assignments = binary_assignments(pr.binary_vars.size());
    const int per_branch =
        std::max(32, static_cast<int>(opts.samples / static_cast<int>(assignments.size())));

    std::mt19937_64 rng(opts.seed);
    std::vector<std::uniform_real_distribution<double>> dists;
    for (const auto& [lo, hi] : box) dists.emplace_back(lo, hi);

    std::vector<std::vector<double>> enrich_seeds;
    std::vector<double> v(pr.nvars);
    for (const auto& assign : assignments) {
        for (int s = 0; s < per_branch; ++s) {
            for (std::size_t i = 0; i < pr.nvars; ++i) v[i] = dists[i](rng);
            for (std::size_t b = 0; b < pr.binary_vars.size(); ++b)
                v[pr.binary_vars[b]] = assign[b];
            double res = refine(sys, v, 50, 1e-10);
            if (res > opts.rel_tol) continue;
            if (!in_box(v, box)) continue;
            if (!gens_ok(pr.gens, v, opts.pos_tol)) {
                if (s % 8 == 0) enrich_seeds.push_back(v);  // keep some rejected seeds
                continue;
            }
            cloud.push(v);
            if (s % 16 == 0) enrich_seeds.push_back(v);
        }
    }

    if (opts.boundary_enrichment) {
        // Project onto each generator's zero set so that boundary pieces and
        // isolated points of K get sampled even when rejection misses them.
        for (const auto& gen : pr.gens) {
            if (gen.poly.is_constant()) continue;
            std::vector<Polynomial> eqs = pr.ideal.gens;
            eqs.push_back(gen.poly);
            GnSystem bsys = make_system(eqs, pr.nvars, pr.binary_vars);
            for (const auto& assign : assignments) {
                std::size_t used = 0;
                for (std::size_t s = 0; s < enrich_seeds.size() && used < 64; ++s) {
                    v = enrich_seeds[s];
                    for (std::size_t b = 0; b < pr.binary_vars.size(); ++b)
                        v[pr.binary_vars[b]] = assign[b];
                    ++used;
                    double res = refine(bsys, v, 50, 1e-10);
                    if (res > opts.rel_tol) continue;
                    if (!in_box(v, box)) continue;
                    if (!gens_ok(pr.gens, v, opts.pos_tol)) continue;
                    cloud.push(v);
                }
            }
        }
    }
    return cloud;
}

PointCloud project_to_zero_set(const TowerState& tw, const PointCloud& seeds,
                               const Polynomial& extra_visible, double rel_tol, double pos_tol) {
    Presentation pr = presentation(tw);
    std::vector<Polynomial> eqs = pr.ideal.gens;
    eqs.push_back(extra_visible);
    GnSystem sys = make_system(eqs, pr.nvars, pr.binary_vars);

    PointCloud out;
    out.dim = pr.nvars;
    out.label = PointCloud::Label::VarietySample;
    out.seed = seeds.seed;
    std::vector<double> v(pr.nvars);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        auto p = seeds.point(i);
        v.assign(p.begin(), p.end());
        double res = refine(sys, v, 50, 1e-10);
        if (res > rel_tol) continue;
        if (!gens_ok(pr.gens, v, pos_tol)) continue;
        bool dup = false;
        for (std::size_t j = 0; j < out.size() && !dup; ++j) {
            auto q = out.point(j);
            double d2 = 0;
            for (std::size_t k = 0; k < v.size(); ++k) d2 += (v[k] - q[k]) * (v[k] - q[k]);
            dup = d2 < 1e-12;
        }
        if (!dup) out.push(v);
    }
    return out;
}

GapReport compute_gap_report(const PointCloud& image, const PointCloud& variety, double delta) {
    if (image.size() == 0 || variety.size() == 0)
        throw std::invalid_argument("gap report requires nonempty clouds");
    if (image.dim != variety.dim)
        throw std::invalid_argument("gap report: dimension mismatch between clouds");

    GapReport rep;
    rep.delta = delta;
    rep.image_size = image.size();
    rep.variety_size = variety.size();
    rep.image_seed = image.seed;
    rep.variety_seed = variety.seed;

    const double d2max = delta * delta;
    const std::size_t dim = image.dim;
    for (std::size_t i = 0; i < variety.size(); ++i) {
        auto p = variety.point(i);
        double best = 1e300;
        for (std::size_t j = 0; j < image.size(); ++j) {
            const double* q = image.data.data() + j * dim;
            double d2 = 0;
            for (std::size_t k = 0; k < dim; ++k) {
                double dk = p[k] - q[k];
                d2 += dk * dk;
            }
            if (d2 < best) {
                best = d2;
                if (best <= d2max) break;  // already covered
            }
        }
        if (best > d2max)
            rep.spurious.emplace_back(std::vector<double>(p.begin(), p.end()), std::sqrt(best));
    }
    std::sort(rep.spurious.begin(), rep.spurious.end(),
              [](const auto& a, const auto& b) { return a.second > b.second; });
    rep.verdict =
        rep.spurious.empty() ? GapReport::Verdict::ImageEqualsVariety : GapReport::Verdict::GapDetected;
    return rep;
}

std::string GapReport::summary(std::span<const std::string> names) const {
    std::ostringstream out;
    out << "gap report: "
        << (verdict == Verdict::ImageEqualsVariety ? "ImageEqualsVariety" : "GapDetected");
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", delta);
    out << " delta=" << buf << " image=" << image_size << " variety=" << variety_size
        << " image_seed=" << image_seed << " variety_seed=" << variety_seed
        << " spurious=" << spurious.size();
    if (!names.empty()) {
        out << " coords=(";
        for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
        out << ")";
    }
    out << "\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(spurious.size(), 5); ++i) {
        out << "  spurious (";
        for (std::size_t k = 0; k < spurious[i].first.size(); ++k) {
            std::snprintf(buf, sizeof(buf), "%.6g", spurious[i].first[k]);
            out << (k ? ", " : "") << buf;
        }
        std::snprintf(buf, sizeof(buf), "%.6g", spurious[i].second);
        out << ") dist=" << buf << "\n";
    }
    return out.str();
}

TowerState exclude_point(const TowerState& tw, std::span<const Rational> y, const Rational& eps,
                         const Tolerances& tol) {
    Polynomial sep = separator_generator(tw, y, eps);
    if (tw.domain.box) {
        auto xs = sample_domain(tw.domain, tol.check_samples, tol.seed + 1);
        for (const auto& x : xs) {
            std::vector<double> vals = tw.eval_point(std::span<const double>(x.data(), x.size()));
            if (sep.eval(vals) <= 0)
                throw witness_error(
                    "separator is not positive on the sampled image; eps too large or the "
                    "target point is too close to the image",
                    x);
        }
    }
    return add_generator(tw, sep, false, Provenance::Separator, tw.mode, tol);
}

}  // namespace qmt
