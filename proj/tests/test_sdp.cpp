#include <doctest.h>

#include <random>

#include "qmt/sdp.hpp"

using namespace qmt;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Instance with a known optimum: pick complementary X*, Z* (orthogonal
// eigenspaces), random A_i, then set b = A(X*) and C = A*(y*) + Z*.
SDPProblem constructed_instance(std::mt19937_64& rng, int dim, int m, double& opt_out) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto rand_sym = [&](int d) {
        MatrixXd a(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) a(i, j) = gauss(rng);
        return MatrixXd(0.5 * (a + a.transpose()));
    };

    // Orthogonal basis; first r columns span range(X*), rest span range(Z*).
    MatrixXd q = rand_sym(dim);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(q);
    MatrixXd U = eig.eigenvectors();
    int r = std::max(1, dim / 2);
    MatrixXd Xs = MatrixXd::Zero(dim, dim), Zs = MatrixXd::Zero(dim, dim);
    for (int i = 0; i < r; ++i) Xs += (1.0 + std::abs(gauss(rng))) * U.col(i) * U.col(i).transpose();
    for (int i = r; i < dim; ++i)
        Zs += (1.0 + std::abs(gauss(rng))) * U.col(i) * U.col(i).transpose();

    SDPProblem p;
    p.block_dims = {dim};
    p.b.resize(m);
    VectorXd ys(m);
    for (int i = 0; i < m; ++i) {
        BlockMatrix Ai;
        Ai.blocks.push_back(rand_sym(dim));
        p.A.push_back(Ai);
        p.b(i) = (Ai.blocks[0].array() * Xs.array()).sum();
        ys(i) = gauss(rng);
    }
    BlockMatrix C;
    C.blocks.push_back(Zs);
    for (int i = 0; i < m; ++i) C.blocks[0] += ys(i) * p.A[i].blocks[0];
    p.C = C;
    opt_out = (p.C.blocks[0].array() * Xs.array()).sum();
    return p;
}

}  // namespace

TEST_CASE("scalar psd minimum") {
    SDPProblem p;
    p.block_dims = {1};
    p.C.blocks.push_back(MatrixXd::Ones(1, 1));
    p.b.resize(0);
    SDPSolution sol = solve_sdp(p);
    CHECK(sol.status == SDPStatus::Optimal);
    CHECK(sol.primal_obj == doctest::Approx(0.0));
}

TEST_CASE("trace-one eigenvalue problem") {
    // min tr(diag(1,2) X), tr X = 1, X >= 0  ->  1 at X = diag(1,0).
    SDPProblem p;
    p.block_dims = {2};
    p.C.blocks.push_back(Eigen::Vector2d(1, 2).asDiagonal());
    BlockMatrix A1;
    A1.blocks.push_back(MatrixXd::Identity(2, 2));
    p.A.push_back(A1);
    p.b = VectorXd::Ones(1);
    SDPSolution sol = solve_sdp(p);
    REQUIRE(sol.status == SDPStatus::Optimal);
    CHECK(sol.primal_obj == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sol.X.blocks[0](0, 0) == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(sol.primal_residual <= 1e-7);
    CHECK(sol.dual_residual <= 1e-7);
}

TEST_CASE("infeasible toy problem") {
    // x >= 0 (1x1) with x = -1.
    SDPProblem p;
    p.block_dims = {1};
    p.C.blocks.push_back(MatrixXd::Zero(1, 1));
    BlockMatrix A1;
    A1.blocks.push_back(MatrixXd::Ones(1, 1));
    p.A.push_back(A1);
    p.b = -VectorXd::Ones(1);
    SDPSolution sol = solve_sdp(p, {1e-7, 200});
    CHECK(sol.status == SDPStatus::Infeasible);
}

TEST_CASE("unbounded objective without constraints") {
    SDPProblem p;
    p.block_dims = {2};
    p.C.blocks.push_back(Eigen::Vector2d(1, -1).asDiagonal());
    p.b.resize(0);
    SDPSolution sol = solve_sdp(p);
    CHECK(sol.status == SDPStatus::Unbounded);
}

TEST_CASE("twenty constructed instances against the analytic optimum") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        int dim = 2 + trial % 6;
        int m = 1 + trial % 4;
        double opt = 0;
        SDPProblem p = constructed_instance(rng, dim, m, opt);
        SDPSolution sol = solve_sdp(p);
        REQUIRE(sol.status == SDPStatus::Optimal);
        CHECK(sol.primal_residual <= 1e-7);
        CHECK(sol.dual_residual <= 1e-7);
        CHECK(sol.duality_gap <= 1e-7);
        CHECK(std::abs(sol.primal_obj - opt) <= 1e-5 * (1.0 + std::abs(opt)));
    }
}

TEST_CASE("block-diagonal instance") {
    // Two blocks sharing one trace constraint.
    SDPProblem p;
    p.block_dims = {2, 1};
    BlockMatrix C;
    C.blocks.push_back(Eigen::Vector2d(2, 3).asDiagonal());
    C.blocks.push_back(MatrixXd::Ones(1, 1));
    p.C = C;
    BlockMatrix A1 = BlockMatrix::identity(p.block_dims);
    p.A.push_back(A1);
    p.b = VectorXd::Ones(1);
    SDPSolution sol = solve_sdp(p);
    REQUIRE(sol.status == SDPStatus::Optimal);
    CHECK(sol.primal_obj == doctest::Approx(1.0).epsilon(1e-6));  // all mass on the 1x1 block
}

TEST_CASE("solver rejects malformed problems") {
    SDPProblem p;
    p.block_dims = {0};
    CHECK_THROWS(solve_sdp(p));
    SDPProblem q;
    q.block_dims = {300};
    q.C.blocks.push_back(MatrixXd::Zero(300, 300));
    q.b.resize(0);
    CHECK_THROWS(solve_sdp(q));
}
