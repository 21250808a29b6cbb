#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hsnl/kernels.hpp"
#include "hsnl/quadrature.hpp"

namespace hsnl {

// Scalar field handle. The metadata bounds the near-origin remainder and the far tail
// of the difference integral; "kinks" lists (d = 1) points where u is not smooth.
struct ScalarField {
    int dim = 1;
    std::function<double(std::span<const double>)> value;
    std::function<std::vector<double>(std::span<const double>)> gradient;  // optional, exact
    double lipschitz = std::numeric_limits<double>::quiet_NaN();
    double sup_norm = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> center;                                      // support ball center
    double support_radius = std::numeric_limits<double>::infinity();  // u = 0 outside the ball
    std::vector<double> kinks;
};

// Vector field handle (components = dim).
struct VectorField {
    int dim = 1;
    std::function<std::vector<double>(std::span<const double>)> value;
    double lipschitz = std::numeric_limits<double>::quiet_NaN();
    double sup_norm = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> center;
    double support_radius = std::numeric_limits<double>::infinity();
    std::vector<double> kinks;
};

// Pointwise half-space gradient / divergence (d = 1, 2). nu = {+-1} in d = 1.
std::vector<double> gradient_pointwise(const Kernel& w, std::span<const double> nu, const ScalarField& u,
                                       std::span<const double> x, const quad::Spec& spec = {});
double divergence_pointwise(const Kernel& w, std::span<const double> nu, const VectorField& v,
                            std::span<const double> x, const quad::Spec& spec = {});

// Uniform periodic samples on a box [0, L_1) x ... ; values stored row-major, components interleaved.
struct SampledField {
    std::vector<double> box;
    std::vector<int> shape;
    int components = 1;
    std::vector<double> values;
    bool aliasing_warning = false;

    std::size_t points() const;
    std::vector<double> point(std::size_t flat) const;
};

// Multiply the DFT of a periodic scalar field by lambda(k/L) (d = 1, 2; sizes powers of two).
SampledField gradient_spectral(const Kernel& w, std::span<const double> nu, const SampledField& field);

// Discrete Parseval energy  cell * sum |lambda(k/L) u_hat_k|^2 / N, equal to the box integral of |G u|^2
// (cell volume times the sum of squared spectral-gradient samples).
double spectral_energy(const Kernel& w, std::span<const double> nu, const SampledField& field);

struct RateRow {
    double param = 0.0;
    double h = 0.0;
    double error = 0.0;
};

struct RateTable {
    std::vector<RateRow> rows;
    double fitted_rate = 0.0;
};

enum class Norm { l2, linf };

// Errors of G_delta u - u' on a uniform sampling grid for kernels rescaled(base, delta) (d = 1).
RateTable localization_study(const Kernel& base, const ScalarField& u, const std::vector<double>& deltas, Norm p,
                             int samples = 801);

// int_{H_nu} |z| w (z/|z| (x) z/|z|) dz as a d x d matrix (row-major) by polar quadrature.
std::vector<double> radial_tensor(const Kernel& w, std::span<const double> nu);

}  // namespace hsnl
