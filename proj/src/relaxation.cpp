#include "qmt/relaxation.hpp"
#include <limits>

#include <cmath>

namespace qmt {

RelaxationProblem build_relaxation(const TowerState& tw, const Polynomial& f, int d,
                                   const RelaxationOptions& opts) {
    if (d < 0) throw std::invalid_argument("relaxation degree must be nonnegative");
    RelaxationProblem rp;
    rp.degree = d;
    rp.pres = presentation(tw);
    const Presentation& pr = rp.pres;

    Polynomial fv = pr.compress(f.extended(tw.nvars()));
    rp.f_reduced = normal_form(fv, pr.ideal);
    if (rp.f_reduced.degree() > 2 * d)
        throw std::invalid_argument("relaxation degree too small: 2d < deg NF(f)");
    if (!tw.witness.archimedean)
        rp.warnings.push_back(
            "tower is not archimedean: the relaxation may be unbounded and representations "
            "are not guaranteed");

    rp.monomials = standard_monomials(pr.ideal, 2 * d);
    if (static_cast<int>(rp.monomials.size()) > opts.monomial_cap)
        throw std::runtime_error("standard monomial count " + std::to_string(rp.monomials.size()) +
                                 " exceeds the cap " + std::to_string(opts.monomial_cap));
    auto mono_index = [&](const Monomial& m) -> std::size_t {
        for (std::size_t k = 0; k < rp.monomials.size(); ++k)
            if (rp.monomials[k] == m) return k;
        throw std::logic_error("normal form left the standard monomial span");
    };

    // sigma_0 block, then one localizing block per usable generator.
    RelaxationBlock b0;
    b0.generator = Polynomial::constant(pr.nvars, Rational(1));
    b0.basis = standard_monomials(pr.ideal, d);
    rp.blocks.push_back(std::move(b0));
    for (std::size_t gi = 0; gi < pr.gens.size(); ++gi) {
        const Polynomial& g = pr.gens[gi].poly;
        Polynomial gnf = normal_form(g, pr.ideal);
        if (gnf.is_constant()) {
            rp.skipped_generators.push_back("constant generator skipped");
            continue;
        }
        int dg = d - (gnf.degree() + 1) / 2;
        if (dg < 0) {
            rp.skipped_generators.push_back("generator degree exceeds the relaxation order");
            continue;
        }
        RelaxationBlock blk;
        blk.generator = gnf;
        blk.basis = standard_monomials(pr.ideal, dg);
        blk.qmodule_index = static_cast<int>(gi);
        rp.blocks.push_back(std::move(blk));
    }

    // Exact coefficient matrices A_{block,u}: entry (i,j) carries the
    // u-coefficient of NF(basis_i * basis_j * g).
    const std::size_t nmono = rp.monomials.size();
    std::vector<int> dims;
    for (const auto& blk : rp.blocks) dims.push_back(static_cast<int>(blk.basis.size()));
    std::vector<BlockMatrix> coef(nmono, BlockMatrix::zeros_like(dims));
    for (std::size_t b = 0; b < rp.blocks.size(); ++b) {
        const auto& blk = rp.blocks[b];
        for (std::size_t i = 0; i < blk.basis.size(); ++i) {
            for (std::size_t j = i; j < blk.basis.size(); ++j) {
                Polynomial prod = Polynomial::term(pr.nvars, blk.basis[i] * blk.basis[j],
                                                   Rational(1)) *
                                  blk.generator;
                Polynomial nf = normal_form(prod, pr.ideal);
                for (const auto& [m, c] : nf.terms()) {
                    std::size_t u = mono_index(m);
                    double cd = to_double(c);
                    coef[u].blocks[b](i, j) += cd;
                    if (i != j) coef[u].blocks[b](j, i) += cd;
                }
            }
        }
    }

    // Objective = the constant-coefficient matrices; the other monomials
    // become equality rows (dependent rows dropped, inconsistency flagged).
    rp.sdp.block_dims = dims;
    rp.sdp.C = coef[0];
    if (!rp.monomials[0].is_one()) throw std::logic_error("standard monomials must start at 1");
    rp.f_constant = rp.f_reduced.constant_value();

    // Orthonormal row basis with the correspondingly transformed rhs, so
    // dependent rows are dropped and inconsistent ones flag the degree.
    std::vector<Eigen::VectorXd> ortho;
    std::vector<double> ortho_rhs;
    std::vector<double> kept_rhs;
    auto vectorize = [&](const BlockMatrix& m) {
        std::vector<double> flat;
        for (const auto& blk : m.blocks)
            for (int i = 0; i < blk.rows(); ++i)
                for (int j = 0; j <= i; ++j)
                    flat.push_back(blk(i, j) * (i == j ? 1.0 : std::sqrt(2.0)));
        return Eigen::Map<Eigen::VectorXd>(flat.data(), static_cast<long>(flat.size())).eval();
    };
    for (std::size_t u = 1; u < nmono; ++u) {
        Rational fu(0);
        auto it = rp.f_reduced.terms().find(rp.monomials[u]);
        if (it != rp.f_reduced.terms().end()) fu = it->second;
        double rhs = to_double(fu);
        Eigen::VectorXd res = vectorize(coef[u]);
        double norm0 = res.norm();
        double r = rhs;
        for (std::size_t k = 0; k < ortho.size(); ++k) {
            double alpha = res.dot(ortho[k]);
            res -= alpha * ortho[k];
            r -= alpha * ortho_rhs[k];
        }
        if (res.norm() <= 1e-12 * (1.0 + norm0)) {
            if (std::abs(r) > 1e-9) rp.infeasible_at_degree = true;
            continue;
        }
        double nn = res.norm();
        ortho.push_back(res / nn);
        ortho_rhs.push_back(r / nn);
        kept_rhs.push_back(rhs);
        rp.sdp.A.push_back(coef[u]);
        rp.row_monomials.push_back(rp.monomials[u]);
    }
    rp.sdp.b.resize(static_cast<long>(kept_rhs.size()));
    for (std::size_t k = 0; k < kept_rhs.size(); ++k) rp.sdp.b(static_cast<long>(k)) = kept_rhs[k];
    return rp;
}

LowerBoundResult lower_bound(const TowerState& tw, const Polynomial& f, int d,
                             const SDPOptions& sdp_opts, const RelaxationOptions& opts) {
    LowerBoundResult out;
    out.relaxation = build_relaxation(tw, f, d, opts);
    if (out.relaxation.infeasible_at_degree) {
        out.solution.status = SDPStatus::Infeasible;
        out.solution.detail = "objective monomial unreachable at this degree";
        out.value = -std::numeric_limits<double>::infinity();
        return out;
    }
    out.solution = solve_sdp(out.relaxation.sdp, sdp_opts);
    if (out.solution.status != SDPStatus::Optimal && sdp_opts.trace_reg == 0.0) {
        SDPOptions reg = sdp_opts;
        reg.trace_reg = 1e-8;
        SDPSolution retry = solve_sdp(out.relaxation.sdp, reg);
        if (retry.status == SDPStatus::Optimal) out.solution = retry;
    }
    out.value = to_double(out.relaxation.f_constant) - out.relaxation.sdp.C.inner(out.solution.X);
    return out;
}

}  // namespace qmt
