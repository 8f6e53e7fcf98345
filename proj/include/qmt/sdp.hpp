#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace qmt {

// Block-diagonal symmetric matrix.
struct BlockMatrix {
    std::vector<Eigen::MatrixXd> blocks;

    static BlockMatrix zeros_like(const std::vector<int>& dims) {
        BlockMatrix m;
        for (int d : dims) m.blocks.push_back(Eigen::MatrixXd::Zero(d, d));
        return m;
    }
    static BlockMatrix identity(const std::vector<int>& dims, double scale = 1.0) {
        BlockMatrix m;
        for (int d : dims) m.blocks.push_back(scale * Eigen::MatrixXd::Identity(d, d));
        return m;
    }
    double inner(const BlockMatrix& o) const {
        double s = 0;
        for (std::size_t b = 0; b < blocks.size(); ++b)
            s += (blocks[b].array() * o.blocks[b].array()).sum();
        return s;
    }
    double norm() const {
        double s = 0;
        for (const auto& m : blocks) s += m.squaredNorm();
        return std::sqrt(s);
    }
    int total_dim() const {
        int n = 0;
        for (const auto& m : blocks) n += static_cast<int>(m.rows());
        return n;
    }
};

// Standard primal/dual pair over PSD block matrices:
//   (P) min <C,X>  s.t.  <A_i,X> = b_i,  X >= 0
//   (D) max b'y    s.t.  C - sum_i y_i A_i = Z >= 0
struct SDPProblem {
    std::vector<int> block_dims;
    BlockMatrix C;
    std::vector<BlockMatrix> A;
    Eigen::VectorXd b;

    void validate() const;
};

enum class SDPStatus { Optimal, Inaccurate, Infeasible, Unbounded };
const char* to_string(SDPStatus s);

struct SDPSolution {
    SDPStatus status = SDPStatus::Inaccurate;
    BlockMatrix X, Z;
    Eigen::VectorXd y;
    double primal_obj = 0, dual_obj = 0;
    // Residuals recomputed from the returned iterates.
    double primal_residual = 0, dual_residual = 0, duality_gap = 0;
    int iterations = 0;
    std::string detail;
};

struct SDPOptions {
    double tol = 1e-7;
    int max_iter = 100;
    // Adds trace_reg * tr(X) to the objective. Restores a strictly
    // feasible dual when localizing blocks are structurally singular;
    // biases the optimum by at most trace_reg * tr(X*).
    double trace_reg = 0.0;
};

// Dense primal-dual path-following interior-point solver with
// Nesterov-Todd scaling and a Mehrotra predictor-corrector step.
SDPSolution solve_sdp(const SDPProblem& p, const SDPOptions& opts = {});

}  // namespace qmt
