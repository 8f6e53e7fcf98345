#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qmt/tower.hpp"

namespace qmt {

struct PointCloud {
    enum class Label { ImageOfX, VarietySample };

    std::size_t dim = 0;
    Label label = Label::ImageOfX;
    std::uint64_t seed = 0;
    std::vector<double> data;  // row-major

    std::size_t size() const { return dim == 0 ? 0 : data.size() / dim; }
    std::span<const double> point(std::size_t i) const {
        return std::span<const double>(data.data() + i * dim, dim);
    }
    void push(std::span<const double> p) { data.insert(data.end(), p.begin(), p.end()); }
    PointCloud project(const std::vector<std::size_t>& coords) const;
};

// CSV with one row per point, 17 significant digits.
std::string to_csv(const PointCloud& cloud, std::span<const std::string> names);

// n points of X, rejection-sampled against the domain constraints.
// Deterministic per seed; throws when the acceptance rate drops below 1e-4.
std::vector<std::vector<double>> sample_domain(const DomainDescription& dom, int n,
                                               std::uint64_t seed);

// Zeros of a scalar function on [lo, hi]: grid scan for near-zeros and
// sign changes, bisection, Newton polish. Jump crossings of discontinuous
// functions are filtered out (|F| stays large there).
std::vector<double> scan_zeros(const std::function<double(double)>& F, double lo, double hi,
                               int grid, double zero_tol);

// Domain samples enriched, on one-dimensional domains, with the branch
// switch points of every piecewise/indicator symbol, so that sampled
// images of discontinuous towers contain their isolated values.
std::vector<std::vector<double>> sample_domain_with_switches(const TowerState& tw, int n,
                                                             std::uint64_t seed);

// m(x) for each x, in the visible presentation coordinates.
PointCloud image_points(const TowerState& tw, const std::vector<std::vector<double>>& xs);

struct VarietyOptions {
    std::vector<std::pair<double, double>> box;  // empty: derive from the witness
    int samples = 10000;
    double rel_tol = 1e-7;
    double pos_tol = 1e-7;
    std::uint64_t seed = 20110614ULL;
    bool boundary_enrichment = true;  // project onto each generator's zero set too
};

// Samples K_{Q,Y} inside the box: rejection + Gauss-Newton refinement onto
// the relation variety, binary variables enumerated exactly.
PointCloud sample_variety(const TowerState& tw, const VarietyOptions& opts);

// Per-coordinate sampling box for the positivity set, from the archimedean
// witness ranges (with slack). Falls back to the domain box for base
// variables without a bound. Throws if some coordinate has no bound at all.
std::vector<std::pair<double, double>> derive_box(const TowerState& tw);

struct GapReport {
    enum class Verdict { ImageEqualsVariety, GapDetected };

    Verdict verdict = Verdict::ImageEqualsVariety;
    double delta = 0.05;
    // Variety points farther than delta from every image point, with their
    // distance, sorted by descending distance.
    std::vector<std::pair<std::vector<double>, double>> spurious;
    std::size_t image_size = 0, variety_size = 0;
    std::uint64_t image_seed = 0, variety_seed = 0;

    std::string summary(std::span<const std::string> names) const;
};

GapReport compute_gap_report(const PointCloud& image, const PointCloud& variety, double delta);

// Adds a separator generator for y (visible coordinates) after checking it
// is positive on a fresh image sample.
TowerState exclude_point(const TowerState& tw, std::span<const Rational> y, const Rational& eps,
                         const Tolerances& tol = {});

// Gauss-Newton projection of each seed point onto {relations = 0, extra = 0}
// within the presentation; keeps converged points that satisfy the
// generator inequalities. Used for zero-set regularity probes and
// boundary enrichment.
PointCloud project_to_zero_set(const TowerState& tw, const PointCloud& seeds,
                               const Polynomial& extra_visible, double rel_tol, double pos_tol);

}  // namespace qmt
