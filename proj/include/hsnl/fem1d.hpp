#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hsnl/kernels.hpp"

namespace hsnl {

using Fn = std::function<double(double)>;

// Uniform mesh of (0, length).
struct Mesh1D {
    double length = 1.0;
    int cells = 0;
    double h = 0.0;
    std::vector<double> nodes;

    int unknowns() const { return cells - 1; }  // interior nodes 1..cells-1
};

Mesh1D make_mesh(double length, int cells);

// Hat function of mesh node i (0..cells).
double hat(const Mesh1D& mesh, int i, double x);

// Dense P1 system over interior-node hats (zero volume constraint outside the domain).
struct FemSystem {
    Mesh1D mesh;
    Eigen::MatrixXd stiffness;
    Eigen::MatrixXd mass;
    Eigen::VectorXd load;
    std::string meta;
};

// Half-space gradient of the hat of interior node i at x, from exact radial integrals.
double hat_gradient(const Kernel& w, int nu, const Mesh1D& mesh, int i, double x);

struct AssemblyOptions {
    int gauss_points = 8;
    int grading_levels = 24;     // geometric refinement toward nodes for kernels singular at 0
    double grading_ratio = 0.3;
    int block = 2048;            // quadrature points per accumulation block
};

// B_ij = int A G phi_i G phi_j over the extended support; load_i = int f phi_i.
// Kernel support must be finite (apply cutoff first).
FemSystem assemble(const Kernel& w, int nu, const Fn& A, const Fn& f, const Mesh1D& mesh,
                   const AssemblyOptions& opt = {});
// Straightforward single-threaded reference of the same assembly.
FemSystem assemble_serial(const Kernel& w, int nu, const Fn& A, const Fn& f, const Mesh1D& mesh,
                          const AssemblyOptions& opt = {});
// Classical P1 stiffness int A phi_i' phi_j'.
FemSystem assemble_local(const Fn& A, const Fn& f, const Mesh1D& mesh);

Eigen::MatrixXd mass_matrix(const Mesh1D& mesh);
Eigen::VectorXd load_vector(const Fn& f, const Mesh1D& mesh);

// Quadrature points of the nonlocal assembly (exposed for tests and benchmarks).
struct QuadratureSet {
    std::vector<double> x;
    std::vector<double> w;
};
QuadratureSet assembly_quadrature(const Kernel& w, int nu, const Mesh1D& mesh, const AssemblyOptions& opt = {});

// Cholesky solve; throws NumericalFailure if factorization fails or the relative residual > 1e-10.
Eigen::VectorXd solve_state(const FemSystem& sys);
Eigen::VectorXd solve_state(const FemSystem& sys, const Eigen::VectorXd& rhs);
// max_i |(K u - F)_i| / max_i |F_i|
double galerkin_residual(const FemSystem& sys, const Eigen::VectorXd& u);

// C_P = lambda_min^{-1/2} of K v = lambda M v by inverse power iteration.
double poincare_constant(const FemSystem& sys, double tol = 1e-10, int max_iter = 2000);
double poincare_constant(const Kernel& w, int nu, const Mesh1D& mesh);
double poincare_constant_local(const Mesh1D& mesh);

// P1 interpolant from interior coefficients.
double evaluate(const Mesh1D& mesh, const Eigen::VectorXd& coeffs, double x);
// || u_h - exact ||_{L2(0, length)}, 8-point Gauss per cell
double l2_error(const Mesh1D& mesh, const Eigen::VectorXd& coeffs, const Fn& exact);
// || u_a - u_b ||_{L2} over the merged node set of two meshes
double l2_difference(const Mesh1D& ma, const Eigen::VectorXd& ua, const Mesh1D& mb, const Eigen::VectorXd& ub);

}  // namespace hsnl
