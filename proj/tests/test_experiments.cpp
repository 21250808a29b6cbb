#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "hsnl/errors.hpp"
#include "hsnl/experiments.hpp"
#include "hsnl/kernels.hpp"

using namespace hsnl;

namespace {
const double pi = std::numbers::pi;
const Fn u0 = [](double x) { return 0.5 * x * (1 - x); };

SweepConfig local_diagonal() {
    SweepConfig c;
    c.family = [](double d) { return constant_kernel(1, d); };
    c.params = {0.2, 0.1, 0.05, 0.025};
    c.hs = {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
    c.exact = u0;
    c.diagonal_only = true;
    return c;
}
}  // namespace

TEST(Rate, ExactPowers) {
    for (double p : {1.0, 2.0}) {
        std::vector<double> e, h;
        for (double x : {0.1, 0.05, 0.025, 0.0125}) {
            h.push_back(x);
            e.push_back(3.0 * std::pow(x, p));
        }
        EXPECT_NEAR(estimate_rate(e, h), p, 1e-12);
    }
}

TEST(Rate, NoisySlope) {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> noise(0.0, 0.02);
    std::vector<double> e, h;
    for (int k = 0; k < 8; ++k) {
        const double x = std::ldexp(1.0, -k);
        h.push_back(x);
        e.push_back(std::pow(x, 1.5) * std::exp(noise(rng)));
    }
    EXPECT_NEAR(estimate_rate(e, h), 1.5, 0.05);
}

TEST(Rate, ConstantErrorsGiveZero) {
    EXPECT_NEAR(estimate_rate({0.3, 0.3, 0.3}, {0.1, 0.01, 0.001}), 0.0, 1e-14);
}

TEST(Rate, RejectsBadInput) {
    EXPECT_THROW(estimate_rate({1.0}, {1.0}), DomainError);
    EXPECT_THROW(estimate_rate({1.0, 0.0}, {1.0, 0.5}), DomainError);
    EXPECT_THROW(estimate_rate({1.0, 2.0}, {0.5, 0.5}), DomainError);
}

TEST(Trend, Classification) {
    EXPECT_EQ(trend_of({3, 2, 1}), "decreasing");
    EXPECT_EQ(trend_of({1, 2, 3}), "increasing");
    EXPECT_EQ(trend_of({1, 1, 0.5}), "flat");
    EXPECT_EQ(trend_of({1}), "flat");
}

TEST(LocalSweep, DiagonalMatchesPreRun) {
    const auto t = ac_local_sweep(local_diagonal());
    ASSERT_EQ(t.diagonal.size(), 4u);
    // frozen from an independent run of the same ladder
    const double frozen[] = {2.8138e-2, 1.3309e-2, 6.4694e-3, 3.1891e-3};
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(t.diagonal[k], frozen[k], 1e-3 * frozen[k]);
    EXPECT_EQ(t.diagonal_trend, "decreasing");
    EXPECT_LE(t.diagonal.back(), 0.25 * t.diagonal.front());
    EXPECT_LE(t.max_residual, 1e-9);
    for (const auto& r : t.rows) EXPECT_GE(r.l2_error, 0.0);
}

TEST(LocalSweep, ReferenceNormOfExactSolution) {
    // a zero-solution mesh measures || u0 || = 1/sqrt(120)
    const auto m = make_mesh(1.0, 4);
    EXPECT_NEAR(l2_error(m, Eigen::VectorXd::Zero(3), u0), 1.0 / std::sqrt(120.0), 1e-13);
}

TEST(LocalSweep, FixedDeltaRowReachesModelErrorPlateau) {
    SweepConfig c;
    c.family = [](double d) { return constant_kernel(1, d); };
    c.params = {0.1};
    c.hs = {1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256};
    c.exact = u0;
    const auto t = ac_local_sweep(c);
    ASSERT_EQ(t.rows.size(), 4u);
    // successive changes shrink as h -> 0 while the delta = 0.1 model error remains; on coarse meshes the
    // discretization error partly cancels the model error, so the row is not monotone from above
    for (std::size_t k = 2; k < t.rows.size(); ++k)
        EXPECT_LT(std::abs(t.rows[k].l2_error - t.rows[k - 1].l2_error),
                  std::abs(t.rows[k - 1].l2_error - t.rows[k - 2].l2_error));
    EXPECT_GT(t.rows.back().l2_error, 0.01);
    // a single-parameter sweep runs along h
    EXPECT_EQ(t.diagonal.size(), 4u);
    ASSERT_EQ(t.row_rates.size(), 1u);
}

TEST(NonlocalSweep, FixedKernelErrorDecreasesInH) {
    // against the fine solve of the same kernel only the discretization error remains
    SweepConfig c;
    c.family = [](double d) { return constant_kernel(1, d); };
    c.params = {0.1};
    c.hs = {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
    c.reference = Reference::fine_nonlocal_fem;
    c.limit = constant_kernel(1, 0.1);
    const auto t = ac_nonlocal_sweep(c);
    EXPECT_EQ(t.diagonal_trend, "decreasing");
    // the nonlocal solution is not smooth up to the boundary, so the L2 order stays below 2
    EXPECT_GT(t.row_rates[0], 0.5);
}

TEST(LocalSweep, FineReferenceIndependentOfResolution) {
    SweepConfig c = local_diagonal();
    c.params = {0.2, 0.1};
    c.hs = {1.0 / 16, 1.0 / 32};
    c.reference = Reference::fine_local_fem;
    const auto a = ac_local_sweep(c);
    c.reference_factor = 8;
    const auto b = ac_local_sweep(c);
    for (std::size_t k = 0; k < a.rows.size(); ++k)
        EXPECT_LT(std::abs(a.rows[k].l2_error - b.rows[k].l2_error), 0.05 * b.rows[k].l2_error);
}

TEST(LocalSweep, RejectsBadConfig) {
    SweepConfig c = local_diagonal();
    c.params = {0.1, 0.2, 0.05, 0.025};
    EXPECT_THROW(ac_local_sweep(c), ConfigError);
    c = local_diagonal();
    c.reference_factor = 2;
    EXPECT_THROW(ac_local_sweep(c), ConfigError);
    c = local_diagonal();
    c.hs.pop_back();
    EXPECT_THROW(ac_local_sweep(c), ConfigError);
    c = local_diagonal();
    c.exact = nullptr;
    EXPECT_THROW(ac_local_sweep(c), ConfigError);
}

TEST(NonlocalSweep, LimitKernelRowIsDirectSolve) {
    const auto w = riesz_truncated(1, 0.5);
    SweepConfig c;
    c.family = [w](double) { return w; };
    c.params = {1.0};
    c.hs = {1.0 / 16};
    c.reference = Reference::fine_nonlocal_fem;
    c.limit = w;
    const auto t = ac_nonlocal_sweep(c);
    const auto m = make_mesh(1.0, 16), mf = make_mesh(1.0, 64);
    const Fn one = [](double) { return 1.0; };
    const double direct = l2_difference(m, solve_state(assemble(w, 1, one, one, m)), mf,
                                        solve_state(assemble(w, 1, one, one, mf)));
    EXPECT_NEAR(t.rows[0].l2_error, direct, 1e-14);
}

TEST(NonlocalSweep, MinLevelDiagonalDecreases) {
    const auto w = riesz_truncated(1, 0.5);
    SweepConfig c;
    c.family = [w](double n) { return min_level(w, n); };
    c.params = {4, 16, 64};
    c.hs = {1.0 / 32, 1.0 / 32, 1.0 / 32};
    c.reference = Reference::fine_nonlocal_fem;
    c.limit = w;
    EXPECT_THROW(ac_nonlocal_sweep(c), ConfigError);  // h ladder must be strictly monotone
    c.hs = {1.0 / 32};
    const auto t = ac_nonlocal_sweep(c);
    EXPECT_EQ(t.diagonal_trend, "decreasing");
}

TEST(NonlocalSweep, FractionalOrderLadder) {
    SweepConfig c;
    c.family = [](double s) { return riesz_truncated(1, s); };
    c.params = {0.3, 0.4, 0.45};
    c.hs = {1.0 / 32};
    c.reference = Reference::fine_nonlocal_fem;
    c.limit = riesz_truncated(1, 0.5);
    const auto t = ac_nonlocal_sweep(c);
    EXPECT_EQ(t.diagonal_trend, "decreasing");
}

TEST(PoincareSweep, ConstantKernelBoundedAndStable) {
    const auto t = poincare_sweep([](double d) { return constant_kernel(1, d); }, {0.2, 0.1, 0.05}, 1.0 / 64, 0.5);
    EXPECT_TRUE(t.pass);
    EXPECT_LE(t.max_cp, 0.5);
    double prev = 1.0;
    for (const auto& r : t.rows) {
        const double gap = std::abs(r.cp - 1.0 / pi);
        EXPECT_LT(gap, prev);
        prev = gap;
    }
}

TEST(PoincareSweep, MinLevelLadderBounded) {
    const auto w = riesz_truncated(1, 0.5);
    const auto t = poincare_sweep([w](double n) { return min_level(w, n); }, {16, 64, 256, 1024}, 1.0 / 32, 1.0);
    EXPECT_TRUE(t.pass);
    EXPECT_TRUE(t.stabilizes);
    // raising the level strengthens the seminorm, so C_P decreases toward the limit-kernel constant
    const double limit = poincare_constant(w, 1, make_mesh(1.0, 32));
    for (std::size_t k = 1; k < t.rows.size(); ++k) EXPECT_LT(t.rows[k].cp, t.rows[k - 1].cp);
    EXPECT_GT(t.rows.back().cp, limit);
}

TEST(PoincareSweep, LocalOrderTwo) {
    const auto t = local_poincare_sweep({1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128}, 1.0 / pi);
    EXPECT_TRUE(t.pass);
    EXPECT_NEAR(t.fitted_order, 2.0, 0.5);
}
