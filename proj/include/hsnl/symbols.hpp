#pragma once

#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hsnl/kernels.hpp"

namespace hsnl {

using cplx = std::complex<double>;
using Freq = std::vector<double>;

struct SymbolSample {
    std::vector<double> xi;
    std::vector<cplx> value;

    std::vector<double> re_part() const;
    std::vector<double> im_part() const;
};

// One-sided radial transform  int_0^inf r^k0 w(r) (e^{i a r} - 1) dr  for a >= 0.
cplx radial_transform(const Kernel& w, int k0, double a);

// Fourier symbol of the half-space gradient (d = 1 or 2). In d = 1, nu is {+1} or {-1}.
SymbolSample symbol(const Kernel& w, std::span<const double> nu, std::span<const double> xi);
// d = 1 shorthand, nu = +1 or -1.
cplx symbol_1d(const Kernel& w, int nu, double xi);

// Parallel and serial grid evaluation (identical results).
std::vector<SymbolSample> symbol_grid(const Kernel& w, std::span<const double> nu, const std::vector<Freq>& grid);
std::vector<SymbolSample> symbol_grid_serial(const Kernel& w, std::span<const double> nu,
                                             const std::vector<Freq>& grid);

// Symbol of the averaged-difference operator over H_nu intersected with the unit ball.
std::vector<cplx> symbol_eta(double tau, std::span<const double> nu, std::span<const double> xi, int d);

// ---- bound verification ------------------------------------------------------
struct BoundReport {
    std::string name;
    std::vector<Freq> grid;
    std::vector<double> lhs;
    std::vector<double> rhs;
    double margin = 0.0;
    bool pass = false;
    bool report_only = false;
    double fitted_lo = 0.0;  // fitted constants where the check estimates them
    double fitted_hi = 0.0;
};

constexpr double kBoundTol = 1e-8;

// Log-spaced magnitudes in [lo, hi] along direction dir.
std::vector<Freq> log_grid(double lo, double hi, int n, std::span<const double> dir);

// |lambda| <= 2 sqrt2 pi M1 |xi| + sqrt2 M2
BoundReport check_linear_bound(const Kernel& w, std::span<const double> nu, const std::vector<Freq>& grid);
// |lambda| <= 2 ||w||_1 (reported only when w is not integrable)
BoundReport check_l1_bound(const Kernel& w, std::span<const double> nu, const std::vector<Freq>& grid);
// |eta_tau| <= V_d min(sqrt2 pi tau |xi|, 1)
BoundReport check_eta_bound(double tau, std::span<const double> nu, const std::vector<Freq>& grid, int d);
// |lambda_w - lambda_{w cut at R}| <= 2 M2  (R = 1)
BoundReport check_cutoff_perturbation(const Kernel& w, std::span<const double> nu, const std::vector<Freq>& grid);
// lambda(-xi) = conj(lambda(xi))
BoundReport check_hermitian(const Kernel& w, std::span<const double> nu, const std::vector<Freq>& grid);
// Fitted C1 = min |lambda|/|xi| over |xi| = 2^-k, k = 0..kmax (cut off at 1 if the first moment diverges).
BoundReport check_lower_bound_small_xi(const Kernel& w, std::span<const double> nu, int kmax = 20);
// inf over |xi| in [N, 1e3 N] of |Re lambda| / int_{|z| > N eps/|xi|} w
BoundReport check_lower_bound_large_xi(const Kernel& w, std::span<const double> nu, double N, double eps,
                                       int points = 61);
// c <= |lambda|/|xi|^{1-delta} <= C for the raw 2 d delta |z|^{delta-d-1}; pass when C/c <= cap
BoundReport check_fractional_sandwich(double delta, int d, const std::vector<Freq>& grid, double cap = 25.0);
// lambda_{w_delta}(xi) = delta^{-1} lambda_w(delta xi) to 1e-6 relative
BoundReport scaling_identity_check(const Kernel& base, const std::vector<double>& deltas,
                                   const std::vector<Freq>& grid);

struct CompactnessRow {
    double param = 0.0;
    double tau = 0.0;
    double sup_ratio = 0.0;  // sup_xi |eta_tau| / |lambda_{w^c}|, +inf if lambda vanishes
};
std::vector<CompactnessRow> compactness_ratio_scan(const std::function<Kernel(double)>& family,
                                                   const std::vector<double>& params,
                                                   const std::vector<double>& taus, const std::vector<Freq>& grid);

struct AppendixRow {
    double delta = 0.0;
    double cos_integral = 0.0;       // int_0^inf delta z^{delta-2} (cos 2 pi z - 1) dz
    double sin_integral = 0.0;       // int_0^inf delta z^{delta-2} sin 2 pi z dz
    double cos_integral_unit = 0.0;  // same over (0, 1)
    double sin_integral_unit = 0.0;
};
std::vector<AppendixRow> appendix_limit_table(const std::vector<double>& deltas);

// ---- orthonormal completion ------------------------------------------------------
struct OrthoBasis {
    Eigen::VectorXd mu;
    Eigen::MatrixXd matrix;  // columns v_1..v_{d-1}, mu

    double orthonormality_defect() const;  // max |M^T M - I|
    // closed-form first entry of v_k (k = 1..d-1)
    static double first_row_formula(const Eigen::VectorXd& mu, int k);
};

OrthoBasis ortho_basis(const Eigen::VectorXd& mu);

}  // namespace hsnl
