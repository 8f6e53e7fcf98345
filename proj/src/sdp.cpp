#include "qmt/sdp.hpp"

#include <cmath>
#include <stdexcept>

namespace qmt {

const char* to_string(SDPStatus s) {
    switch (s) {
        case SDPStatus::Optimal: return "Optimal";
        case SDPStatus::Inaccurate: return "Inaccurate";
        case SDPStatus::Infeasible: return "Infeasible";
        case SDPStatus::Unbounded: return "Unbounded";
    }
    return "?";
}

void SDPProblem::validate() const {
    for (int d : block_dims)
        if (d <= 0) throw std::invalid_argument("SDP block dimension must be positive");
    if (C.blocks.size() != block_dims.size())
        throw std::invalid_argument("SDP objective block count mismatch");
    if (static_cast<std::size_t>(b.size()) != A.size())
        throw std::invalid_argument("SDP constraint count mismatch");
    for (const auto& Ai : A)
        if (Ai.blocks.size() != block_dims.size())
            throw std::invalid_argument("SDP constraint block count mismatch");
    for (std::size_t k = 0; k < block_dims.size(); ++k) {
        if (C.blocks[k].rows() != block_dims[k] || C.blocks[k].cols() != block_dims[k])
            throw std::invalid_argument("SDP objective block size mismatch");
        if (block_dims[k] > 200)
            throw std::invalid_argument("SDP block size exceeds the 200 cap");
    }
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd sym_sqrt(const MatrixXd& m, bool inverse = false) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(m);
    VectorXd d = eig.eigenvalues().cwiseMax(1e-300);
    VectorXd s = d.array().sqrt();
    if (inverse) s = s.cwiseInverse();
    return eig.eigenvectors() * s.asDiagonal() * eig.eigenvectors().transpose();
}

// Largest step alpha in [0, cap] keeping M + alpha*D positive definite.
double max_step(const MatrixXd& M, const MatrixXd& D, double cap) {
    Eigen::LLT<MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) {
        // Nearly singular iterate: factor a jittered copy.
        MatrixXd Mj = M + (1e-14 * (1.0 + M.trace())) * MatrixXd::Identity(M.rows(), M.cols());
        llt.compute(Mj);
        if (llt.info() != Eigen::Success) return 0.0;
    }
    MatrixXd L = llt.matrixL();
    MatrixXd S = L.triangularView<Eigen::Lower>().solve(D);
    S = L.triangularView<Eigen::Lower>().solve(S.transpose()).transpose();
    S = 0.5 * (S + S.transpose());
    double lmin = Eigen::SelfAdjointEigenSolver<MatrixXd>(S).eigenvalues().minCoeff();
    if (lmin >= 0) return cap;
    return std::min(cap, -1.0 / lmin);
}

struct State {
    BlockMatrix X, Z;
    VectorXd y;
};

BlockMatrix apply_adjoint(const SDPProblem& p, const VectorXd& y) {
    BlockMatrix out = BlockMatrix::zeros_like(p.block_dims);
    for (std::size_t i = 0; i < p.A.size(); ++i)
        for (std::size_t b = 0; b < out.blocks.size(); ++b)
            out.blocks[b] += y(i) * p.A[i].blocks[b];
    return out;
}

VectorXd apply_map(const SDPProblem& p, const BlockMatrix& X) {
    VectorXd out(p.A.size());
    for (std::size_t i = 0; i < p.A.size(); ++i) out(i) = p.A[i].inner(X);
    return out;
}

// End-game cleanup: restore exact primal/dual feasibility and walk both
// objectives to the boundary along cheap feasible directions. Brings
// residuals from solver-floor level down to linear-algebra level.
void polish(const SDPProblem& p, State& st) {
    const std::size_t m = p.A.size();
    auto clip_psd = [](MatrixXd& blk) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(blk);
        VectorXd d = eig.eigenvalues().cwiseMax(0.0);
        blk = eig.eigenvectors() * d.asDiagonal() * eig.eigenvectors().transpose();
    };
    auto dual_slack = [&](const VectorXd& y) {
        BlockMatrix Z = p.C;
        BlockMatrix ay = apply_adjoint(p, y);
        for (std::size_t b = 0; b < Z.blocks.size(); ++b) Z.blocks[b] -= ay.blocks[b];
        return Z;
    };
    if (m == 0) {
        st.Z = p.C;
        return;
    }

    MatrixXd M0(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) M0(i, j) = M0(j, i) = p.A[i].inner(p.A[j]);
    M0.diagonal().array() += 1e-14 * (1.0 + M0.diagonal().maxCoeff());
    Eigen::LDLT<MatrixXd> M0solve(M0);

    auto project_feasible = [&]() {
        for (int round = 0; round < 2; ++round) {
            for (auto& blk : st.X.blocks) clip_psd(blk);
            VectorXd rp = p.b - apply_map(p, st.X);
            if (rp.norm() <= 1e-14 * (1.0 + p.b.norm())) break;
            VectorXd lam = M0solve.solve(rp);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t b = 0; b < st.X.blocks.size(); ++b)
                    st.X.blocks[b] += lam(i) * p.A[i].blocks[b];
        }
    };
    project_feasible();

    // Dual ascent direction and projected primal descent direction.
    VectorXd d_dir = M0solve.solve(p.b);
    BlockMatrix Zdir = apply_adjoint(p, d_dir);
    for (auto& blk : Zdir.blocks) blk = -blk;
    VectorXd w = M0solve.solve(apply_map(p, p.C));
    BlockMatrix Ddir = apply_adjoint(p, w);
    for (std::size_t b = 0; b < Ddir.blocks.size(); ++b) Ddir.blocks[b] -= p.C.blocks[b];

    for (int round = 0; round < 4; ++round) {
        bool moved = false;
        if (p.b.dot(d_dir) > 0) {
            BlockMatrix Z = dual_slack(st.y);
            double tau = 1e300;
            for (std::size_t b = 0; b < Z.blocks.size(); ++b) {
                MatrixXd zb = Z.blocks[b] +
                              (1e-12 * (1.0 + Z.blocks[b].trace())) *
                                  MatrixXd::Identity(Z.blocks[b].rows(), Z.blocks[b].cols());
                tau = std::min(tau, max_step(zb, Zdir.blocks[b], 1e300));
            }
            if (tau > 1e-14 && tau < 1e300) {
                st.y += tau * d_dir;
                moved = true;
            }
        }
        double descent = 0;
        for (std::size_t b = 0; b < Ddir.blocks.size(); ++b)
            descent += (p.C.blocks[b].array() * Ddir.blocks[b].array()).sum();
        if (descent < -1e-14 * (1.0 + p.C.norm())) {
            double tau = 1e300;
            for (std::size_t b = 0; b < st.X.blocks.size(); ++b) {
                MatrixXd xb = st.X.blocks[b] +
                              (1e-12 * (1.0 + st.X.blocks[b].trace())) *
                                  MatrixXd::Identity(st.X.blocks[b].rows(), st.X.blocks[b].cols());
                tau = std::min(tau, max_step(xb, Ddir.blocks[b], 1e300));
            }
            if (tau > 1e-14 && tau < 1e300) {
                for (std::size_t b = 0; b < st.X.blocks.size(); ++b)
                    st.X.blocks[b] += tau * Ddir.blocks[b];
                project_feasible();
                moved = true;
            }
        }
        if (!moved) break;
    }

    BlockMatrix Z = dual_slack(st.y);
    for (auto& blk : Z.blocks) clip_psd(blk);
    st.Z = std::move(Z);
}

SDPSolution finish(const SDPProblem& p, const State& st, SDPStatus status, int iters,
                   std::string detail) {
    SDPSolution sol;
    sol.status = status;
    sol.X = st.X;
    sol.Z = st.Z;
    sol.y = st.y;
    sol.primal_obj = p.C.inner(st.X);
    sol.dual_obj = p.b.size() ? p.b.dot(st.y) : 0.0;
    VectorXd rp = p.b - apply_map(p, st.X);
    BlockMatrix rd = p.C;
    BlockMatrix ay = apply_adjoint(p, st.y);
    for (std::size_t b = 0; b < rd.blocks.size(); ++b)
        rd.blocks[b] -= ay.blocks[b] + st.Z.blocks[b];
    sol.primal_residual = p.b.size() ? rp.norm() / (1.0 + p.b.norm()) : 0.0;
    sol.dual_residual = rd.norm() / (1.0 + p.C.norm());
    sol.duality_gap = std::abs(sol.primal_obj - sol.dual_obj) /
                      (1.0 + std::max(std::abs(sol.primal_obj), std::abs(sol.dual_obj)));
    sol.iterations = iters;
    sol.detail = std::move(detail);
    return sol;
}

}  // namespace

SDPSolution solve_sdp(const SDPProblem& p, const SDPOptions& opts) {
    if (opts.trace_reg > 0.0) {
        SDPProblem reg = p;
        for (std::size_t b = 0; b < reg.C.blocks.size(); ++b)
            reg.C.blocks[b].diagonal().array() += opts.trace_reg;
        SDPOptions plain = opts;
        plain.trace_reg = 0.0;
        SDPSolution sol = solve_sdp(reg, plain);
        // Report objective and residuals against the unregularized data.
        SDPSolution out = sol;
        out.primal_obj = p.C.inner(sol.X);
        out.detail += (out.detail.empty() ? "" : "; ") + std::string("trace-regularized");
        return out;
    }
    p.validate();
    const std::size_t m = p.A.size();
    const int n = BlockMatrix::identity(p.block_dims).total_dim();

    // Unconstrained: X = 0 is optimal iff C is PSD.
    if (m == 0) {
        State st{BlockMatrix::zeros_like(p.block_dims), p.C, VectorXd(0)};
        double lmin = 0;
        for (const auto& cb : p.C.blocks)
            lmin = std::min(lmin,
                            Eigen::SelfAdjointEigenSolver<MatrixXd>(cb).eigenvalues().minCoeff());
        if (lmin < -opts.tol)
            return finish(p, st, SDPStatus::Unbounded, 0, "objective not bounded below on the cone");
        return finish(p, st, SDPStatus::Optimal, 0, "");
    }

    // Initial iterates scaled to the data.
    double amax = 1.0, bmax = p.b.size() ? p.b.lpNorm<Eigen::Infinity>() : 0.0;
    for (const auto& Ai : p.A) amax = std::max(amax, Ai.norm());
    double xi = std::max({10.0, std::sqrt(static_cast<double>(n)), bmax / amax * std::sqrt(static_cast<double>(n))});
    double eta = std::max({10.0, std::sqrt(static_cast<double>(n)), p.C.norm(), amax});
    State st{BlockMatrix::identity(p.block_dims, xi), BlockMatrix::identity(p.block_dims, eta),
             VectorXd::Zero(m)};

    MatrixXd M(m, m);
    VectorXd rhs(m);
    State best = st;
    double best_err = 1e300;
    std::string stop_reason = "iteration limit reached";
    int stalled = 0;

    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        double mu = st.X.inner(st.Z) / n;
        VectorXd rp = p.b - apply_map(p, st.X);
        BlockMatrix ay = apply_adjoint(p, st.y);
        BlockMatrix Rd = p.C;
        for (std::size_t b = 0; b < Rd.blocks.size(); ++b)
            Rd.blocks[b] -= ay.blocks[b] + st.Z.blocks[b];

        double rel_p = rp.norm() / (1.0 + p.b.norm());
        double rel_d = Rd.norm() / (1.0 + p.C.norm());
        double pobj = p.C.inner(st.X), dobj = p.b.dot(st.y);
        double gap = std::abs(pobj - dobj) / (1.0 + std::max(std::abs(pobj), std::abs(dobj)));
        double err = std::max({rel_p, rel_d, gap});
        if (err < best_err) {
            best_err = err;
            best = st;
        }
        if (rel_p <= opts.tol && rel_d <= opts.tol && gap <= opts.tol)
            return finish(p, st, SDPStatus::Optimal, iter - 1, "");

        // Infeasibility certificates from diverging iterates.
        double ynorm = st.y.norm();
        if (ynorm > 1e7) {
            VectorXd yh = st.y / ynorm;
            BlockMatrix ah = apply_adjoint(p, yh);
            double lmin = 0;
            for (auto& blk : ah.blocks)
                lmin = std::min(lmin,
                                Eigen::SelfAdjointEigenSolver<MatrixXd>(MatrixXd(-blk))
                                    .eigenvalues()
                                    .minCoeff());
            if (p.b.dot(yh) > 1e-6 && lmin > -1e-6)
                return finish(p, st, SDPStatus::Infeasible, iter, "Farkas ray found");
        }
        if (st.X.norm() > 1e9)
            return finish(p, st, SDPStatus::Unbounded, iter, "primal iterates diverge");

        // Nesterov-Todd scaling point per block.
        std::vector<MatrixXd> W(p.block_dims.size()), Zinv(p.block_dims.size());
        for (std::size_t b = 0; b < W.size(); ++b) {
            MatrixXd zs = sym_sqrt(st.Z.blocks[b]);
            MatrixXd zsi = sym_sqrt(st.Z.blocks[b], true);
            MatrixXd mid = sym_sqrt(zs * st.X.blocks[b] * zs);
            W[b] = zsi * mid * zsi;
            W[b] = 0.5 * (W[b] + W[b].transpose());
            Zinv[b] = zsi * zsi;
        }

        // Schur complement M_ij = <A_i, W A_j W>.
        std::vector<std::vector<MatrixXd>> WAW(m);
        for (std::size_t i = 0; i < m; ++i) {
            WAW[i].resize(p.block_dims.size());
            for (std::size_t b = 0; b < p.block_dims.size(); ++b)
                WAW[i][b] = W[b] * p.A[i].blocks[b] * W[b];
        }
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i; j < m; ++j) {
                double s = 0;
                for (std::size_t b = 0; b < p.block_dims.size(); ++b)
                    s += (p.A[j].blocks[b].array() * WAW[i][b].array()).sum();
                M(i, j) = M(j, i) = s;
            }
        M.diagonal().array() += 1e-13 * (1.0 + M.diagonal().maxCoeff());
        Eigen::LDLT<MatrixXd> Msolve(M);

        auto solve_direction = [&](const BlockMatrix& Rc, VectorXd& dy, BlockMatrix& dX,
                                   BlockMatrix& dZ) {
            // A(W (A*(dy) - Rd) W) = rp - A(Rc)
            for (std::size_t i = 0; i < m; ++i) {
                double s = 0;
                for (std::size_t b = 0; b < p.block_dims.size(); ++b) {
                    s += (p.A[i].blocks[b].array() * Rc.blocks[b].array()).sum();
                    s -= (WAW[i][b].array() * Rd.blocks[b].array()).sum();
                }
                rhs(i) = rp(i) - s;
            }
            dy = Msolve.solve(rhs);
            dy += Msolve.solve(rhs - M * dy);  // one refinement pass
            dZ = Rd;
            BlockMatrix ady = apply_adjoint(p, dy);
            for (std::size_t b = 0; b < dZ.blocks.size(); ++b) dZ.blocks[b] -= ady.blocks[b];
            dX = Rc;
            for (std::size_t b = 0; b < dX.blocks.size(); ++b) {
                dX.blocks[b] -= W[b] * dZ.blocks[b] * W[b];
                dX.blocks[b] = 0.5 * (dX.blocks[b] + dX.blocks[b].transpose());
            }
        };

        // Affine predictor: Rc = -X.
        BlockMatrix Rc = st.X;
        for (auto& blk : Rc.blocks) blk = -blk;
        VectorXd dy_aff;
        BlockMatrix dX_aff, dZ_aff;
        solve_direction(Rc, dy_aff, dX_aff, dZ_aff);

        double ap = 1.0, ad = 1.0;
        for (std::size_t b = 0; b < p.block_dims.size(); ++b) {
            ap = std::min(ap, max_step(st.X.blocks[b], dX_aff.blocks[b], 1.0));
            ad = std::min(ad, max_step(st.Z.blocks[b], dZ_aff.blocks[b], 1.0));
        }
        double mu_aff = 0;
        {
            BlockMatrix Xa = st.X, Za = st.Z;
            for (std::size_t b = 0; b < Xa.blocks.size(); ++b) {
                Xa.blocks[b] += ap * dX_aff.blocks[b];
                Za.blocks[b] += ad * dZ_aff.blocks[b];
            }
            mu_aff = Xa.inner(Za) / n;
        }
        double sigma = std::pow(std::max(0.0, std::min(1.0, mu_aff / mu)), 3);
        if (std::min(ap, ad) < 0.2) sigma = std::max(sigma, 0.5);

        // Corrector: Rc = sigma*mu*Z^{-1} - X - sym(dX_aff dZ_aff Z^{-1}).
        for (std::size_t b = 0; b < Rc.blocks.size(); ++b) {
            MatrixXd second = dX_aff.blocks[b] * dZ_aff.blocks[b] * Zinv[b];
            Rc.blocks[b] = sigma * mu * Zinv[b] - st.X.blocks[b] - 0.5 * (second + second.transpose());
        }
        VectorXd dy;
        BlockMatrix dX, dZ;
        solve_direction(Rc, dy, dX, dZ);

        ap = ad = 1.0;
        for (std::size_t b = 0; b < p.block_dims.size(); ++b) {
            ap = std::min(ap, 0.98 * max_step(st.X.blocks[b], dX.blocks[b], 1.0 / 0.98));
            ad = std::min(ad, 0.98 * max_step(st.Z.blocks[b], dZ.blocks[b], 1.0 / 0.98));
        }
        if (std::min(ap, ad) < 0.1) {
            // The second-order term hurt; retry with pure centering.
            for (std::size_t b = 0; b < Rc.blocks.size(); ++b)
                Rc.blocks[b] = sigma * mu * Zinv[b] - st.X.blocks[b];
            VectorXd dy2;
            BlockMatrix dX2, dZ2;
            solve_direction(Rc, dy2, dX2, dZ2);
            double ap2 = 1.0, ad2 = 1.0;
            for (std::size_t b = 0; b < p.block_dims.size(); ++b) {
                ap2 = std::min(ap2, 0.98 * max_step(st.X.blocks[b], dX2.blocks[b], 1.0 / 0.98));
                ad2 = std::min(ad2, 0.98 * max_step(st.Z.blocks[b], dZ2.blocks[b], 1.0 / 0.98));
            }
            if (std::min(ap2, ad2) > std::min(ap, ad)) {
                dy = dy2;
                dX = dX2;
                dZ = dZ2;
                ap = ap2;
                ad = ad2;
            }
        }
#ifdef QMT_SDP_TRACE
        fprintf(stderr, "it=%d mu=%.3e sigma=%.3f ap=%.3f ad=%.3f err=%.3e\n", iter, mu, sigma, ap, ad, err);
#endif
        if (ap < 1e-10 && ad < 1e-10) {
            stop_reason = "step length collapsed";
            break;
        }
        stalled = std::min(ap, ad) < 1e-3 ? stalled + 1 : 0;
        if (stalled >= 8) {
            stop_reason = "progress stalled";
            break;
        }
        for (std::size_t b = 0; b < p.block_dims.size(); ++b) {
            st.X.blocks[b] += ap * dX.blocks[b];
            st.Z.blocks[b] += ad * dZ.blocks[b];
        }
        st.y += ad * dy;
    }

    // The loop ran out; polish the best iterate and re-judge.
    polish(p, best);
    SDPSolution sol = finish(p, best, SDPStatus::Inaccurate, opts.max_iter, stop_reason);
    if (sol.primal_residual <= opts.tol && sol.dual_residual <= opts.tol &&
        sol.duality_gap <= opts.tol) {
        sol.status = SDPStatus::Optimal;
        sol.detail = "converged after final polish";
    }
    return sol;
}

}  // namespace qmt
