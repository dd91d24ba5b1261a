#pragma once

// Log-barrier Newton solver for the finite QCQP built by problem.hpp, with a
// closed-form path for the unconstrained case.

#include <Eigen/Dense>

#include <vector>

#include "fdid/problem.hpp"

namespace fdid {

struct SolverConfig {
    double theta0 = 1.0;        // first barrier weight
    double theta_decay = 10.0;  // theta_{n+1} = theta_n / theta_decay
    double barrier_tol = 1e-8;  // stop once theta_n * n_constraints < barrier_tol
    double newton_tol = 1e-10;  // gradient-norm tolerance, relative to 1 + ||A'y||
    int max_newton = 100;       // Newton iterations per barrier stage
    double ls_slope = 1e-4;
    double ls_shrink = 0.5;

    void validate() const;
};

struct SolveReport {
    Eigen::VectorXd x;
    double objective = 0.0;      // ||A x - y||^2 + lambda x' Phi x
    std::vector<double> slacks;  // 1 - eps - (b_j'x)^2 - (c_j'x)^2
    std::vector<double> stage_objectives;
    int stages = 0;
    int newton_iterations = 0;
    double rkhs_norm_sq = 0.0;  // x' Phi x
    double duality_gap = 0.0;   // bound on objective - optimum at exit
    double cutoff = 0.0;        // eigenvalues of Phi at or below this are treated as zero
    int rank = 0;               // retained eigen-directions of Phi
    bool feasible = true;
};

SolveReport solve_ridge(const GramProblem& p);

// 1/2 ||Ax-y||^2 + lambda/2 x'Phi x - theta sum_j ln(-p_j(x)),
// p_j(x) = 1/2 (b_j'x)^2 + 1/2 (c_j'x)^2 - 1/2 (1 - eps).
double barrier_objective(const GramProblem& p, const Eigen::VectorXd& x, double theta);

struct GradHess {
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
};
GradHess barrier_grad_hess(const GramProblem& p, const Eigen::VectorXd& x, double theta);

// Central-path loop from x = 0. Newton runs in whitened coordinates w with
// x'Phi x = ||w||^2, where the Hessian is bounded below by lambda I
// regardless of the conditioning of Phi.
SolveReport solve_qcqp(const GramProblem& p, const SolverConfig& cfg = {});

}  // namespace fdid
