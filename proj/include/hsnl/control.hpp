#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hsnl/fem1d.hpp"
#include "hsnl/kernels.hpp"

namespace hsnl {

// min  int F(x, u) + lam/2 int Gamma g^2   s.t.  B(u, v) = (g, v),  alpha <= g <= beta.
// State P1 on interior nodes, control P0 on cells.
struct ControlProblem {
    Mesh1D mesh;
    std::optional<Kernel> kernel;  // empty: local H^1 state equation
    int nu = 1;
    Fn A = [](double) { return 1.0; };
    Fn alpha = [](double) { return -1.0; };
    Fn beta = [](double) { return 1.0; };
    Fn gamma = [](double) { return 1.0; };
    Fn u_des = [](double) { return 0.0; };
    double lam = 1.0;
    // Custom integrand F(x, u) and its u-derivative; both empty means (u - u_des)^2.
    std::function<double(double, double)> F;
    std::function<double(double, double)> F_u;
};

struct OptimalTriple {
    Eigen::VectorXd u;  // interior node values
    Eigen::VectorXd g;  // cell values
    Eigen::VectorXd p;  // interior node values
    double residual = 0.0;
    double objective_value = 0.0;
    int iterations = 0;
    std::vector<double> history;  // objective after each accepted step
};

// Per-cell data: clipped bounds sup_T alpha, inf_T beta and the cell average of Gamma.
struct CellData {
    Eigen::VectorXd lo, hi, gamma;
};
CellData cell_data(const ControlProblem& P);

// Cellwise min(max(average of q, sup_T alpha), inf_T beta).
Eigen::VectorXd control_to_Zh(const Fn& q, const Mesh1D& mesh, const Fn& alpha, const Fn& beta);

// Stiffness of the state equation (nonlocal when a kernel is set).
FemSystem control_system(const ControlProblem& P);
// C(i, T) = int_T phi_i  (dense, interior nodes x cells)
Eigen::MatrixXd coupling_matrix(const Mesh1D& mesh);

// Adjoint: K p = (F_u(., u_h), phi_i).
Eigen::VectorXd solve_adjoint(const FemSystem& sys, const Eigen::VectorXd& u, const ControlProblem& P);
double objective(const Eigen::VectorXd& u, const Eigen::VectorXd& g, const ControlProblem& P);
// || g - clip(-avg p / (lam Gamma)) ||_{L2}
double optimality_residual(const Eigen::VectorXd& g, const Eigen::VectorXd& p, const ControlProblem& P);

// Projected gradient with Armijo backtracking (initial step 1/lam, shrink 0.5, slope 1e-4).
// Throws NonConvergence when max_iter is reached.
OptimalTriple solve_optimal(const ControlProblem& P, double tol = 1e-10, int max_iter = 1000,
                            const std::optional<Eigen::VectorXd>& g0 = std::nullopt);

// Direct solve of the optimality system ignoring the bounds (quadratic tracking only).
OptimalTriple kkt_reference(const ControlProblem& P);

struct ControlSweepRow {
    double delta = 0.0;
    double h = 0.0;
    double state_vs_fine = 0.0;       // || u_{delta,h} - u_fine_local ||
    double state_vs_local_h = 0.0;    // || u_{delta,h} - u_h ||   (same mesh, local state)
    double control_vs_local_h = 0.0;  // || g_{delta,h} - g_h ||
    double moment_error = 0.0;        // max_m |int (g - g_fine) phi_m|, phi_m in {1, x, sin(pi x)}
    int iterations = 0;
    bool failed = false;
};

struct ControlSweepTable {
    std::vector<ControlSweepRow> rows;  // deltas outer, hs inner
};

// The problem's mesh is replaced per h; its kernel by family(delta).
ControlSweepTable control_ac_sweep(const ControlProblem& base, const std::function<Kernel(double)>& family,
                                   const std::vector<double>& deltas, const std::vector<double>& hs,
                                   double tol = 1e-10, int reference_factor = 4);

// Cellwise moments int g phi_m for phi_m in {1, x, sin(pi x)}.
std::vector<double> control_moments(const Mesh1D& mesh, const Eigen::VectorXd& g);
// || g_a - g_b ||_{L2} for P0 fields on two uniform meshes of the same domain.
double p0_difference(const Mesh1D& ma, const Eigen::VectorXd& ga, const Mesh1D& mb, const Eigen::VectorXd& gb);

}  // namespace hsnl
