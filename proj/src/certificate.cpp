#include "qmt/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qmt/explore.hpp"

namespace qmt {

const char* to_string(VerificationLevel v) {
    switch (v) {
        case VerificationLevel::ExactVerified: return "ExactVerified";
        case VerificationLevel::NumericVerified: return "NumericVerified";
        case VerificationLevel::Refuted: return "Refuted";
    }
    return "?";
}

bool rational_psd(const std::vector<std::vector<Rational>>& g) {
    const std::size_t n = g.size();
    std::vector<std::vector<Rational>> a = g;
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < n; ++i) active.push_back(i);

    while (!active.empty()) {
        // Largest remaining diagonal as the pivot.
        std::size_t piv = 0;
        for (std::size_t k = 1; k < active.size(); ++k)
            if (a[active[k]][active[k]] > a[active[piv]][active[piv]]) piv = k;
        std::size_t p = active[piv];
        Rational d = a[p][p];
        if (d < 0) return false;
        if (d == 0) {
            // All remaining diagonals are <= 0, hence 0 or negative; PSD
            // forces the whole remaining submatrix to vanish.
            for (std::size_t i : active)
                for (std::size_t j : active)
                    if (a[i][j] != 0) return false;
            return true;
        }
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(piv));
        for (std::size_t i : active)
            for (std::size_t j : active) a[i][j] -= a[i][p] * a[j][p] / d;
    }
    return true;
}

namespace {

Polynomial gram_polynomial(const Presentation& pr, const CertificateBlock& blk) {
    Polynomial acc(pr.nvars);
    const std::size_t n = blk.basis.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (blk.gram[i][j] == 0) continue;
            acc.add_term(blk.basis[i] * blk.basis[j], blk.gram[i][j]);
        }
    return acc * blk.generator;
}

Polynomial residual_polynomial(const Presentation& pr, const Polynomial& f_visible,
                               const Rational& eps, const Certificate& cert) {
    Polynomial target = f_visible + Polynomial::constant(pr.nvars, eps);
    Polynomial sum(pr.nvars);
    for (const auto& blk : cert.blocks) sum += gram_polynomial(pr, blk);
    return normal_form(target - sum, pr.ideal);
}

}  // namespace

Certificate extract_certificate(const TowerState& tw, const Polynomial& f, const Rational& eps,
                                const RelaxationProblem& relax, const SDPSolution& sol) {
    if (sol.status != SDPStatus::Optimal && sol.status != SDPStatus::Inaccurate)
        throw std::runtime_error("certificate extraction needs an Optimal or Inaccurate solve");
    const Presentation& pr = relax.pres;
    Certificate cert;
    cert.f = pr.compress(f.extended(tw.nvars()));
    cert.eps = eps;
    cert.degree = relax.degree;

    for (std::size_t b = 0; b < relax.blocks.size(); ++b) {
        const auto& rb = relax.blocks[b];
        const Eigen::MatrixXd& X = sol.X.blocks[b];
        CertificateBlock blk;
        blk.generator = rb.generator;
        blk.basis = rb.basis;
        blk.gram.assign(rb.basis.size(), std::vector<Rational>(rb.basis.size(), Rational(0)));
        for (std::size_t i = 0; i < rb.basis.size(); ++i)
            for (std::size_t j = 0; j < rb.basis.size(); ++j)
                blk.gram[i][j] = rational_from_double(0.5 * (X(i, j) + X(j, i)));
        cert.blocks.push_back(std::move(blk));
    }

    // lambda* = f_1 - <C, X>; fold lambda* + eps into the constant entry of
    // sigma_0 so the blocks certify f + eps rather than f - lambda*.
    double lambda = to_double(relax.f_constant) - relax.sdp.C.inner(sol.X);
    Rational shift = rational_from_double(lambda) + eps;
    if (!cert.blocks.empty() && !cert.blocks[0].basis.empty() && cert.blocks[0].basis[0].is_one())
        cert.blocks[0].gram[0][0] += shift;
    else
        throw std::logic_error("sigma_0 basis does not start with the unit monomial");
    return cert;
}

Certificate rationalize_certificate(const TowerState& tw, const Certificate& cert,
                                    unsigned long denominator_bound) {
    Presentation pr = presentation(tw);
    Polynomial f_vis = cert.f.nvars() == pr.nvars ? cert.f : pr.compress(cert.f);

    std::vector<unsigned long> ladder;
    for (unsigned long d = 1;; d *= 4) {
        ladder.push_back(std::min(d, denominator_bound));
        if (d >= denominator_bound) break;
        if (d > denominator_bound / 4) {
            ladder.push_back(denominator_bound);
            break;
        }
    }

    for (unsigned long bound : ladder) {
        Certificate trial = cert;
        trial.rationalized = true;
        for (auto& blk : trial.blocks) {
            const std::size_t n = blk.basis.size();
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i; j < n; ++j) {
                    Rational r = round_to_denominator(blk.gram[i][j], bound);
                    blk.gram[i][j] = r;
                    blk.gram[j][i] = r;
                }
        }
        Polynomial r = residual_polynomial(pr, f_vis, trial.eps, trial);
        if (!r.is_zero()) {
            // Only a nonnegative constant can be repaired, into sigma_0's
            // constant diagonal entry.
            if (!r.is_constant() || r.constant_value() < 0) continue;
            if (trial.blocks.empty() || trial.blocks[0].basis.empty() ||
                !trial.blocks[0].basis[0].is_one() || !trial.blocks[0].generator.is_constant())
                continue;
            trial.blocks[0].gram[0][0] += r.constant_value();
            r = residual_polynomial(pr, f_vis, trial.eps, trial);
            if (!r.is_zero()) continue;
        }
        bool psd = true;
        for (const auto& blk : trial.blocks) psd = psd && rational_psd(blk.gram);
        if (!psd) continue;
        return trial;
    }
    throw std::runtime_error(
        "rationalization failed: positive semidefiniteness lost after rounding and repair");
}

VerificationReport verify_certificate(const TowerState& tw, const Polynomial& f,
                                      const Rational& eps, const Certificate& cert) {
    Presentation pr = presentation(tw);
    Polynomial f_vis = pr.compress(f.extended(tw.nvars()));
    for (const auto& blk : cert.blocks) {
        if (blk.generator.nvars() != pr.nvars)
            throw std::invalid_argument("certificate block is over a different presentation");
        if (blk.gram.size() != blk.basis.size())
            throw std::invalid_argument("certificate Gram size does not match its basis");
        for (const auto& row : blk.gram)
            if (row.size() != blk.basis.size())
                throw std::invalid_argument("certificate Gram is not square");
    }

    VerificationReport rep;
    Polynomial r = residual_polynomial(pr, f_vis, eps, cert);
    Rational l1(0);
    std::optional<std::pair<Monomial, Rational>> worst;
    for (const auto& [m, c] : r.terms()) {
        l1 += abs(c);
        if (!worst || abs(c) > abs(worst->second)) worst = {m, c};
    }
    rep.residual_norm = to_double(l1);

    bool psd = true;
    for (const auto& blk : cert.blocks) psd = psd && rational_psd(blk.gram);
    rep.grams_exactly_psd = psd;

    // A numeric certificate is only evidence if its Grams are PSD up to
    // solver tolerance; indefinite blocks invalidate it outright.
    double min_eig = 0.0, scale = 1.0;
    for (const auto& blk : cert.blocks) {
        const std::size_t n = blk.basis.size();
        if (n == 0) continue;
        Eigen::MatrixXd g(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) g(i, j) = to_double(blk.gram[i][j]);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g);
        min_eig = std::min(min_eig, eig.eigenvalues().minCoeff());
        scale = std::max(scale, g.cwiseAbs().maxCoeff());
    }
    bool numerically_psd = min_eig >= -1e-7 * scale;

    if (r.is_zero() && psd) {
        rep.level = VerificationLevel::ExactVerified;
        rep.detail = "rational identity holds and all Gram matrices are exactly PSD";
    } else if (rep.residual_norm > 1e-3 || !numerically_psd) {
        rep.level = VerificationLevel::Refuted;
        if (rep.residual_norm > 1e-3) {
            rep.witness_term = worst;
            auto nm = pr.names;
            rep.detail = "residual term " +
                         to_string(Polynomial::term(pr.nvars, worst->first, worst->second), nm);
        } else {
            rep.detail = "indefinite Gram block (min eigenvalue " + std::to_string(min_eig) + ")";
        }
    } else {
        rep.level = VerificationLevel::NumericVerified;
        rep.detail = psd ? "nonzero residual below the refutation threshold"
                         : "Gram matrices PSD to numeric tolerance only";
    }
    return rep;
}

CertifyResult certify_positivity(const TowerState& tw, const Polynomial& f, const Rational& eps,
                                 int d_max, const CertifyOptions& opts) {
    if (!tw.witness.archimedean)
        throw std::runtime_error(
            "certify_positivity requires an archimedean quadratic module (add bounds)");
    if (eps < 0) throw std::invalid_argument("eps must be nonnegative");

    CertifyResult out;

    // Cheap refutation: f + eps must be nonnegative on the sampled image.
    if (tw.domain.box) {
        Polynomial fw = f.extended(tw.nvars());
        auto xs = sample_domain(tw.domain, opts.tol.check_samples, opts.tol.seed + 7);
        for (const auto& x : xs) {
            std::vector<double> vals = tw.eval_point(std::span<const double>(x.data(), x.size()));
            if (fw.eval(vals) + to_double(eps) < -opts.tol.pos_tol) {
                out.detail = "refuted by a sampled image point: f + eps < 0 at x";
                out.report.level = VerificationLevel::Refuted;
                return out;
            }
        }
    }

    Presentation pr = presentation(tw);
    Polynomial f_nf = normal_form(pr.compress(f.extended(tw.nvars())), pr.ideal);
    int d0 = std::max(1, (std::max(f_nf.degree(), 0) + 1) / 2);
    for (int d = d0; d <= d_max; ++d) {
        RelaxationProblem relax;
        try {
            relax = build_relaxation(tw, f, d, opts.relax);
        } catch (const std::exception& e) {
            out.detail = e.what();
            break;
        }
        if (relax.infeasible_at_degree) {
            out.degree_reached = d;
            continue;
        }
        out.degree_reached = d;

        auto attempt = [&](const SDPSolution& sol) -> bool {
            if (sol.status != SDPStatus::Optimal && sol.status != SDPStatus::Inaccurate)
                return false;
            Certificate cert = extract_certificate(tw, f, eps, relax, sol);
            VerificationReport rep = verify_certificate(tw, f, eps, cert);
            out.best_residual = std::min(out.best_residual, rep.residual_norm);
            if (rep.level == VerificationLevel::Refuted ||
                rep.residual_norm > opts.accept_residual)
                return false;
            try {
                Certificate exact = rationalize_certificate(tw, cert);
                VerificationReport exact_rep = verify_certificate(tw, f, eps, exact);
                if (exact_rep.level == VerificationLevel::ExactVerified) {
                    out.certificate = std::move(exact);
                    out.report = exact_rep;
                    return true;
                }
            } catch (const std::exception&) {
                // fall through to the numeric certificate
            }
            out.certificate = std::move(cert);
            out.report = rep;
            return true;
        };

        SDPSolution sol = solve_sdp(relax.sdp, opts.sdp);
        if (sol.status == SDPStatus::Optimal || sol.status == SDPStatus::Inaccurate)
            out.bound_trajectory.emplace_back(
                d, to_double(relax.f_constant) - relax.sdp.C.inner(sol.X));
        bool ok = attempt(sol);
        if (!ok && sol.status != SDPStatus::Optimal) {
            // Structurally singular localizing blocks leave the plain solve
            // without a central path; retry with a small trace penalty.
            SDPOptions reg = opts.sdp;
            reg.trace_reg = 1e-8;
            SDPSolution sol2 = solve_sdp(relax.sdp, reg);
            if (sol2.status == SDPStatus::Optimal || sol2.status == SDPStatus::Inaccurate)
                out.bound_trajectory.emplace_back(
                    d, to_double(relax.f_constant) - relax.sdp.C.inner(sol2.X));
            ok = attempt(sol2);
        }
        if (ok) {
            out.success = true;
            return out;
        }
    }
    if (out.detail.empty())
        out.detail = "no certificate found up to degree " + std::to_string(d_max) +
                     "; best residual " + std::to_string(out.best_residual);
    return out;
}

std::string certificate_to_text(const Certificate& cert, std::span<const std::string> names) {
    std::ostringstream out;
    out << "qmtower certificate v1\n";
    out << "vars";
    for (const auto& n : names) out << " " << n;
    out << "\n";
    out << "f {" << to_string(cert.f, names) << "}\n";
    out << "eps " << to_string(cert.eps) << "\n";
    out << "degree " << cert.degree << "\n";
    out << "rationalized " << (cert.rationalized ? 1 : 0) << "\n";
    for (const auto& blk : cert.blocks) {
        out << "block gen={" << to_string(blk.generator, names) << "} basis={";
        for (std::size_t i = 0; i < blk.basis.size(); ++i) {
            out << (i ? " ; " : " ")
                << to_string(Polynomial::term(blk.generator.nvars(), blk.basis[i], Rational(1)),
                             names);
        }
        out << " }\n";
        for (const auto& row : blk.gram) {
            out << "row";
            for (const auto& v : row) out << " " << to_string(v);
            out << "\n";
        }
    }
    out << "end\n";
    return out.str();
}

Certificate certificate_from_text(const std::string& text, std::span<const std::string> names) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "qmtower certificate v1")
        throw std::runtime_error("not a qmtower certificate file");
    Certificate cert;
    std::vector<std::string> nm(names.begin(), names.end());

    auto read_braced = [](const std::string& s, std::size_t pos) {
        std::size_t b = s.find('{', pos), e = s.find('}', b);
        if (b == std::string::npos || e == std::string::npos)
            throw std::runtime_error("malformed certificate line: " + s);
        return s.substr(b + 1, e - b - 1);
    };

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "end") break;
        if (tag == "vars") {
            std::vector<std::string> file_names;
            std::string n;
            while (ls >> n) file_names.push_back(n);
            if (!nm.empty() && file_names != nm)
                throw std::runtime_error("certificate variable list does not match the tower");
            nm = file_names;
        } else if (tag == "f") {
            cert.f = parse_polynomial(read_braced(line, 0), nm);
        } else if (tag == "eps") {
            std::string v;
            ls >> v;
            cert.eps = *parse_rational(v);
        } else if (tag == "degree") {
            ls >> cert.degree;
        } else if (tag == "rationalized") {
            int v;
            ls >> v;
            cert.rationalized = v != 0;
        } else if (tag == "block") {
            CertificateBlock blk;
            blk.generator = parse_polynomial(read_braced(line, line.find("gen=")), nm);
            std::string basis_text = read_braced(line, line.find("basis="));
            CertificateBlock parsed = blk;
            std::istringstream bs(basis_text);
            std::string mono_text;
            while (std::getline(bs, mono_text, ';')) {
                Polynomial m = parse_polynomial(mono_text, nm);
                if (m.nterms() != 1 || m.terms().begin()->second != 1)
                    throw std::runtime_error("certificate basis entries must be unit monomials");
                parsed.basis.push_back(m.terms().begin()->first);
            }
            cert.blocks.push_back(std::move(parsed));
        } else if (tag == "row") {
            if (cert.blocks.empty()) throw std::runtime_error("certificate row before any block");
            std::vector<Rational> row;
            std::string v;
            while (ls >> v) {
                auto q = parse_rational(v);
                if (!q) throw std::runtime_error("bad rational in certificate row: " + v);
                row.push_back(*q);
            }
            cert.blocks.back().gram.push_back(std::move(row));
        } else {
            throw std::runtime_error("unknown certificate line: " + line);
        }
    }
    for (const auto& blk : cert.blocks)
        if (blk.gram.size() != blk.basis.size())
            throw std::runtime_error("certificate Gram rows do not match the basis size");
    return cert;
}

}  // namespace qmt
