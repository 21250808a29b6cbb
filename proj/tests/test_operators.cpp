#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "hsnl/errors.hpp"
#include "hsnl/kernels.hpp"
#include "hsnl/operators.hpp"
#include "hsnl/quadrature.hpp"
#include "hsnl/symbols.hpp"

using namespace hsnl;

namespace {
const double pi = std::numbers::pi;
const double plus[1] = {1.0};
const double minus[1] = {-1.0};

// (1 - x^2)^2 on [-1, 1], shifted to center c
ScalarField bump(double c = 0.0) {
    ScalarField u;
    u.value = [c](std::span<const double> x) {
        const double t = x[0] - c;
        return std::abs(t) < 1.0 ? (1 - t * t) * (1 - t * t) : 0.0;
    };
    u.gradient = [c](std::span<const double> x) {
        const double t = x[0] - c;
        return std::vector<double>{std::abs(t) < 1.0 ? -4.0 * t * (1 - t * t) : 0.0};
    };
    u.lipschitz = 8.0 / (3.0 * std::sqrt(3.0));
    u.sup_norm = 1.0;
    u.center = {c};
    u.support_radius = 1.0;
    u.kinks = {c - 1.0, c + 1.0};
    return u;
}

ScalarField wave(double L, int k, double phase = 0.0) {
    ScalarField u;
    u.value = [=](std::span<const double> x) { return std::sin(2 * pi * k * x[0] / L + phase); };
    u.lipschitz = 2 * pi * k / L;
    u.sup_norm = 1.0;
    return u;
}

SampledField sample(const ScalarField& u, double L, int n) {
    SampledField f;
    f.box = {L};
    f.shape = {n};
    for (int i = 0; i < n; ++i) {
        const double x[1] = {L * i / n};
        f.values.push_back(u.value(x));
    }
    return f;
}

double gp(const Kernel& w, std::span<const double> nu, const ScalarField& u, double x) {
    const double p[1] = {x};
    return gradient_pointwise(w, nu, u, p)[0];
}
}  // namespace

TEST(Pointwise, LinearFunctionHasUnitGradient) {
    ScalarField u;
    u.value = [](std::span<const double> x) { return x[0]; };
    u.lipschitz = 1.0;
    u.sup_norm = 10.0;
    u.center = {0.0};
    u.support_radius = 10.0;
    EXPECT_NEAR(gp(normalize_first_moment(constant_ball(1)), plus, u, 0.3), 1.0, 1e-10);
}

TEST(Pointwise, ConstantHasZeroGradient) {
    ScalarField u;
    u.value = [](std::span<const double>) { return 3.0; };
    u.lipschitz = 0.0;
    u.sup_norm = 3.0;
    EXPECT_EQ(gp(riesz_truncated(1, 0.5), plus, u, 0.2), 0.0);
}

TEST(Pointwise, BumpNearDerivative) {
    const double delta = 0.05;
    const double g = gp(constant_kernel(1, delta), plus, bump(), 0.3);
    // |G_delta u - u'| <= (1/2) sup|u''| * (int |z|^2 w_delta) / 1 = O(delta)
    EXPECT_NEAR(g, -1.092, 4.0 * delta);
}

TEST(Pointwise, SingularKernelNeedsLipschitzMetadata) {
    ScalarField u = bump();
    u.lipschitz = std::numeric_limits<double>::quiet_NaN();
    const double x[1] = {0.0};
    EXPECT_THROW(gradient_pointwise(riesz_truncated(1, 0.5), plus, u, x), AssumptionViolation);
}

TEST(Pointwise, Linearity) {
    const auto w = riesz_truncated(1, 0.5);
    const auto u = bump(0.0), v = bump(0.4);
    ScalarField comb = u;
    comb.value = [&](std::span<const double> x) { return 2.0 * u.value(x) - 3.0 * v.value(x); };
    comb.gradient = [&](std::span<const double> x) {
        return std::vector<double>{2.0 * u.gradient(x)[0] - 3.0 * v.gradient(x)[0]};
    };
    comb.lipschitz = 5.0 * u.lipschitz;
    comb.sup_norm = 5.0;
    comb.support_radius = 1.4;
    comb.kinks = {-1.0, 1.0, -0.6, 1.4};
    for (double x : {-0.5, 0.1, 0.7}) {
        const double lhs = gp(w, plus, comb, x);
        const double rhs = 2.0 * gp(w, plus, u, x) - 3.0 * gp(w, plus, v, x);
        EXPECT_NEAR(lhs, rhs, 1e-8);
    }
}

TEST(Divergence, ConstantFieldAndOneDimensionalIdentity) {
    const auto w = constant_kernel(1, 0.2);
    VectorField c;
    c.value = [](std::span<const double>) { return std::vector<double>{2.0}; };
    c.lipschitz = 0.0;
    c.sup_norm = 2.0;
    const double x[1] = {0.1};
    EXPECT_EQ(divergence_pointwise(w, plus, c, x), 0.0);

    const auto u = bump();
    VectorField v;
    v.value = [&](std::span<const double> p) { return std::vector<double>{u.value(p)}; };
    v.lipschitz = u.lipschitz;
    v.sup_norm = 1.0;
    v.center = u.center;
    v.support_radius = 1.0;
    v.kinks = u.kinks;
    EXPECT_NEAR(divergence_pointwise(w, plus, v, x), gp(w, plus, u, 0.1), 1e-12);
}

TEST(Divergence, IntegrationByParts) {
    // <G^nu u, v> = -<u, D^{-nu} v>
    const auto w = constant_kernel(1, 0.3);
    const auto u = bump(0.0), vs = bump(0.5);
    VectorField v;
    v.value = [&](std::span<const double> p) { return std::vector<double>{vs.value(p)}; };
    v.lipschitz = vs.lipschitz;
    v.sup_norm = 1.0;
    v.center = vs.center;
    v.support_radius = 1.0;
    v.kinks = vs.kinks;
    const quad::Spec spec{1e-10, 1e-12, 1 << 12};
    auto lhs = quad::adaptive(
        [&](double x) {
            const double p[1] = {x};
            return gp(w, plus, u, x) * vs.value(p);
        },
        -0.5, 1.5, spec);
    auto rhs = quad::adaptive(
        [&](double x) {
            const double p[1] = {x};
            return u.value(p) * divergence_pointwise(w, minus, v, p);
        },
        -1.0, 1.0, spec);
    EXPECT_NEAR(lhs.value, -rhs.value, 1e-6);
}

TEST(Spectral, SineMatchesSymbolAndPointwise) {
    const double L = 2.0;
    const int n = 64;
    const auto w = constant_kernel(1, 0.1);
    const auto u = wave(L, 1);
    const auto f = sample(u, L, n);
    const auto g = gradient_spectral(w, plus, f);
    ASSERT_EQ(g.values.size(), static_cast<std::size_t>(n));
    const cplx lam = symbol_1d(w, 1, 1.0 / L);
    for (int i = 0; i < n; i += n / 16) {
        const double th = 2 * pi * i / n;
        const double expect = lam.real() * std::sin(th) + lam.imag() * std::cos(th);
        EXPECT_NEAR(g.values[i], expect, 1e-10);
        EXPECT_NEAR(g.values[i], gp(w, plus, u, L * i / n), 1e-6);
    }
    EXPECT_FALSE(g.aliasing_warning);
}

TEST(Spectral, ConstantFieldMapsToZero) {
    SampledField f;
    f.box = {1.0};
    f.shape = {32};
    f.values.assign(32, 4.0);
    for (double v : gradient_spectral(riesz_truncated(1, 0.5), plus, f).values) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Spectral, ParsevalEnergy) {
    const double L = 4.0;
    const int n = 128;
    const auto w = riesz_truncated(1, 0.5);
    SampledField f;
    f.box = {L};
    f.shape = {n};
    for (int i = 0; i < n; ++i) {
        const double x = L * i / n;
        f.values.push_back(std::sin(2 * pi * x / L) + 0.5 * std::cos(6 * pi * x / L) + 0.25);
    }
    const auto g = gradient_spectral(w, plus, f);
    double direct = 0.0;
    for (double v : g.values) direct += v * v;
    direct *= L / n;
    EXPECT_NEAR(spectral_energy(w, plus, f), direct, 1e-8 * direct);
}

TEST(Spectral, TranslationEquivariance) {
    const double L = 2.0;
    const int n = 64;
    const auto w = constant_kernel(1, 0.2);
    SampledField f;
    f.box = {L};
    f.shape = {n};
    for (int i = 0; i < n; ++i) f.values.push_back(std::exp(std::sin(2 * pi * i / n)));
    SampledField s = f;
    for (int i = 0; i < n; ++i) s.values[i] = f.values[(i + n - 1) % n];
    const auto a = gradient_spectral(w, plus, f), b = gradient_spectral(w, plus, s);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(b.values[i], a.values[(i + n - 1) % n], 1e-13);
}

TEST(Spectral, AliasingWarningOnRoughData) {
    SampledField f;
    f.box = {1.0};
    f.shape = {32};
    for (int i = 0; i < 32; ++i) f.values.push_back(i % 2 ? 1.0 : -1.0);
    EXPECT_TRUE(gradient_spectral(constant_kernel(1, 0.1), plus, f).aliasing_warning);
}

TEST(Spectral, RejectsNonPowerOfTwo) {
    SampledField f;
    f.box = {1.0};
    f.shape = {30};
    f.values.assign(30, 0.0);
    EXPECT_THROW(gradient_spectral(constant_kernel(1, 0.1), plus, f), DomainError);
}

TEST(Spectral, TwoDimensionalPlaneWave) {
    const double L = 1.0;
    const int n = 16;
    const auto w = constant_kernel(2, 0.2);
    const double nu[2] = {1.0, 0.0};
    SampledField f;
    f.box = {L, L};
    f.shape = {n, n};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) f.values.push_back(std::cos(2 * pi * (i + 2 * j) / n));
    const auto g = gradient_spectral(w, nu, f);
    ASSERT_EQ(g.components, 2);
    const double xi[2] = {1.0, 2.0};
    const auto lam = symbol(w, nu, xi).value;
    for (int i = 0; i < n; i += 5)
        for (int j = 0; j < n; j += 3) {
            const double th = 2 * pi * (i + 2 * j) / n;
            for (int c = 0; c < 2; ++c) {
                // G cos = Re(lambda e^{i th})
                const double expect = lam[c].real() * std::cos(th) - lam[c].imag() * std::sin(th);
                EXPECT_NEAR(g.values[2 * (i * n + j) + c], expect, 1e-9);
            }
        }
}

TEST(Localization, ConstantKernelRateNearOne) {
    const auto t = localization_study(normalize_first_moment(constant_ball(1)), bump(), {0.2, 0.1, 0.05, 0.025}, Norm::linf);
    ASSERT_EQ(t.rows.size(), 4u);
    for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_LT(t.rows[i].error, t.rows[i - 1].error);
    EXPECT_GE(t.fitted_rate, 0.8);
    EXPECT_LE(t.fitted_rate, 1.2);
}

TEST(Localization, L2NormAlsoConverges) {
    const auto t = localization_study(normalize_first_moment(constant_ball(1)), bump(), {0.2, 0.1, 0.05}, Norm::l2);
    EXPECT_GT(t.fitted_rate, 0.8);
}

TEST(Localization, LinearFunctionIsExact) {
    ScalarField u;
    u.value = [](std::span<const double> x) { return 2.0 * x[0]; };
    u.gradient = [](std::span<const double>) { return std::vector<double>{2.0}; };
    u.lipschitz = 2.0;
    u.sup_norm = 20.0;
    const auto w = constant_kernel(1, 0.1);
    EXPECT_NEAR(gp(w, plus, u, 0.0), 2.0, 1e-10);
    EXPECT_NEAR(gp(w, minus, u, 0.0), 2.0, 1e-10);
}

TEST(RadialTensor, IsotropicInTwoDimensions) {
    const auto w = constant_kernel(2, 0.1);
    const double nu[2] = {0.6, 0.8};
    const auto T = radial_tensor(w, nu);
    const double full = partial_moments(w, 0.0, 1.0, 1);
    EXPECT_NEAR(T[0], full / 4.0, 1e-8);
    EXPECT_NEAR(T[3], full / 4.0, 1e-8);
    EXPECT_NEAR(T[1], 0.0, 1e-8);
    EXPECT_NEAR(T[2], 0.0, 1e-8);
    const auto t1 = radial_tensor(w, nu);
    EXPECT_EQ(t1, T);
    const auto T1 = radial_tensor(constant_kernel(1, 0.1), plus);
    EXPECT_NEAR(T1[0], 1.0, 1e-8);
}
