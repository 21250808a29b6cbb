#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "hsnl/control.hpp"
#include "hsnl/errors.hpp"
#include "hsnl/kernels.hpp"

using namespace hsnl;

namespace {
const double pi = std::numbers::pi;

ControlProblem base(int n, std::optional<Kernel> w = std::nullopt) {
    ControlProblem P;
    P.mesh = make_mesh(1.0, n);
    P.kernel = std::move(w);
    return P;
}

// reduced objective j(g) = I(S g, g)
double reduced(const ControlProblem& P, const Eigen::VectorXd& g) {
    const auto sys = control_system(P);
    const Eigen::VectorXd u = solve_state(sys, coupling_matrix(P.mesh) * g);
    return objective(u, g, P);
}

double p0_norm(const Mesh1D& m, const Eigen::VectorXd& g) { return std::sqrt(m.h) * g.norm(); }
}  // namespace

TEST(ToZh, ConstantInsideBounds) {
    const auto m = make_mesh(1.0, 8);
    const auto g = control_to_Zh([](double) { return 0.3; }, m, [](double) { return -1.0; }, [](double) { return 1.0; });
    for (int c = 0; c < g.size(); ++c) EXPECT_NEAR(g[c], 0.3, 1e-15);
}

TEST(ToZh, CellAveragesOfLinear) {
    const auto m = make_mesh(1.0, 4);
    const auto g = control_to_Zh([](double x) { return x; }, m, [](double) { return -1.0; }, [](double) { return 1.0; });
    const double expect[] = {0.125, 0.375, 0.625, 0.875};
    for (int c = 0; c < 4; ++c) EXPECT_NEAR(g[c], expect[c], 1e-15);
}

TEST(ToZh, ClipsToInfOfUpperBound) {
    const auto m = make_mesh(1.0, 4);
    const Fn beta = [](double x) { return 1.0 + x; };
    const auto g = control_to_Zh(beta, m, [](double) { return -1.0; }, beta);
    for (int c = 0; c < 4; ++c) EXPECT_NEAR(g[c], 1.0 + m.nodes[c], 1e-14);
}

TEST(ToZh, CoarseCellWithCrossingBoundsThrows) {
    const auto m = make_mesh(1.0, 2);
    EXPECT_THROW(control_to_Zh([](double) { return 0.0; }, m, [](double x) { return x - 0.1; },
                               [](double x) { return x + 0.1; }),
                 AssumptionViolation);
}

TEST(Problem, RejectsInvalidData) {
    auto P = base(8);
    P.lam = 0.0;
    EXPECT_THROW(solve_optimal(P), AssumptionViolation);
    P = base(8);
    P.alpha = [](double) { return 1.0; };
    EXPECT_THROW(solve_optimal(P), AssumptionViolation);
    P = base(8);
    P.gamma = [](double) { return -1.0; };
    EXPECT_THROW(solve_optimal(P), AssumptionViolation);
}

TEST(Adjoint, VanishesAtTarget) {
    auto P = base(8, constant_kernel(1, 0.1));
    P.u_des = [](double x) { return std::sin(pi * x); };
    const auto sys = control_system(P);
    Eigen::VectorXd u(7);
    for (int i = 1; i < 8; ++i) u[i - 1] = std::sin(pi * P.mesh.nodes[i]);
    // u_h interpolates u_des only at nodes, so p is small but not zero; with u_des piecewise linear it is zero
    P.u_des = [&](double x) { return evaluate(P.mesh, u, x); };
    EXPECT_LE(solve_adjoint(sys, u, P).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Adjoint, LinearAndMatchesTransposeOracle) {
    auto P = base(8, riesz_truncated(1, 0.5));
    const auto sys = control_system(P);
    Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(7, -1.0, 2.0);
    const auto p1 = solve_adjoint(sys, u, P);
    const auto p2 = solve_adjoint(sys, 3.0 * u, P);
    EXPECT_LE((p2 - 3.0 * p1).cwiseAbs().maxCoeff(), 1e-12 * p1.cwiseAbs().maxCoeff());
    // tracking with u_des = 0: K^T p = 2 M u
    const Eigen::VectorXd ref = sys.stiffness.transpose().fullPivLu().solve(2.0 * sys.mass * u);
    EXPECT_LE((p1 - ref).cwiseAbs().maxCoeff(), 1e-10 * ref.cwiseAbs().maxCoeff());
}

TEST(Objective, TrivialValues) {
    auto P = base(4);
    EXPECT_EQ(objective(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(4), P), 0.0);
    P.u_des = [&](double x) { return hat(P.mesh, 2, x); };
    Eigen::VectorXd u = Eigen::VectorXd::Zero(3);
    u[1] = 1.0;
    EXPECT_NEAR(objective(u, Eigen::VectorXd::Zero(4), P), 0.0, 1e-16);
}

TEST(Objective, HandValueOnTwoCells) {
    // u = 3 * hat at x = 1/2, g = (1, 2), lam = 1/2:  9 * int hat^2 + lam/2 * h * (1 + 4) = 3 + 0.625
    auto P = base(2);
    P.lam = 0.5;
    Eigen::VectorXd u(1), g(2);
    u << 3.0;
    g << 1.0, 2.0;
    EXPECT_NEAR(objective(u, g, P), 3.625, 1e-14);
}

TEST(Optimal, TrivialCaseIsZeroTriple) {
    const auto T = solve_optimal(base(16, constant_kernel(1, 0.1)));
    EXPECT_EQ(T.u.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(T.g.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(T.p.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(T.objective_value, 0.0);
    EXPECT_LE(T.residual, 1e-12);
}

TEST(Optimal, InactiveBoundsMatchKkt) {
    auto P = base(16, constant_kernel(1, 0.1));
    P.u_des = [](double x) { return std::sin(pi * x); };
    P.lam = 0.01;
    P.alpha = [](double) { return -100.0; };
    P.beta = [](double) { return 100.0; };
    const auto T = solve_optimal(P, 1e-12, 5000);
    const auto K = kkt_reference(P);
    EXPECT_LE((T.u - K.u).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LE((T.g - K.g).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LE((T.p - K.p).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Optimal, FeasibleMonotoneAndResidualConsistent) {
    auto P = base(32, constant_kernel(1, 0.05));
    P.u_des = [](double x) { return 2.0 * std::sin(pi * x); };
    P.lam = 0.001;
    P.alpha = [](double) { return 0.0; };
    P.beta = [](double x) { return 1.0 + x; };
    const auto T = solve_optimal(P, 1e-10, 5000);
    const auto cd = cell_data(P);
    int active = 0;
    for (int c = 0; c < T.g.size(); ++c) {
        EXPECT_GE(T.g[c], cd.lo[c]);
        EXPECT_LE(T.g[c], cd.hi[c]);
        active += T.g[c] == cd.hi[c] || T.g[c] == cd.lo[c];
    }
    EXPECT_GT(active, 0);
    // accepted steps never increase j; recomputing it from scratch adds round-off only
    for (std::size_t k = 1; k < T.history.size(); ++k) EXPECT_LE(T.history[k], T.history[k - 1] * (1 + 1e-14));
    EXPECT_NEAR(optimality_residual(T.g, T.p, P), T.residual, 1e-12);
    EXPECT_LE(T.residual, 1e-10);
}

TEST(Optimal, VariationalInequality) {
    auto P = base(16, constant_kernel(1, 0.1));
    P.u_des = [](double x) { return std::sin(pi * x); };
    P.lam = 0.01;
    P.alpha = [](double) { return -0.5; };
    P.beta = [](double) { return 0.5; };
    const auto T = solve_optimal(P, 1e-11, 5000);
    const double j0 = reduced(P, T.g);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int k = 0; k < 50; ++k) {
        Eigen::VectorXd q(T.g.size());
        for (int c = 0; c < q.size(); ++c) q[c] = u(rng);
        const Eigen::VectorXd dir = q - T.g;
        EXPECT_GE(reduced(P, T.g + 1e-4 * dir) - j0, -1e-8 * p0_norm(P.mesh, dir));
    }
}

TEST(Optimal, GammaScalingCovariance) {
    auto P = base(16, constant_kernel(1, 0.1));
    P.u_des = [](double x) { return std::sin(pi * x); };
    P.lam = 0.01;
    const auto a = solve_optimal(P, 1e-11, 5000);
    P.gamma = [](double) { return 4.0; };
    P.lam = 0.0025;
    const auto b = solve_optimal(P, 1e-11, 5000);
    EXPECT_LE(p0_norm(P.mesh, a.g - b.g), 1e-8);
}

TEST(Optimal, UniqueFromRandomStarts) {
    auto P = base(16, constant_kernel(1, 0.1));
    P.u_des = [](double x) { return std::sin(pi * x); };
    P.lam = 0.01;
    P.alpha = [](double) { return -0.5; };
    P.beta = [](double) { return 0.5; };
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    Eigen::VectorXd g1(16), g2(16);
    for (int c = 0; c < 16; ++c) {
        g1[c] = u(rng);
        g2[c] = u(rng);
    }
    const double tol = 1e-10;
    const auto a = solve_optimal(P, tol, 5000, g1), b = solve_optimal(P, tol, 5000, g2);
    EXPECT_LE(p0_norm(P.mesh, a.g - b.g), 10 * tol);
}

TEST(Optimal, CustomIntegrandMatchesTracking) {
    auto P = base(16, constant_kernel(1, 0.1));
    P.u_des = [](double x) { return std::sin(pi * x); };
    P.lam = 0.05;
    const auto a = solve_optimal(P);
    P.F = [](double x, double v) { return (v - std::sin(pi * x)) * (v - std::sin(pi * x)); };
    P.F_u = [](double x, double v) { return 2.0 * (v - std::sin(pi * x)); };
    const auto b = solve_optimal(P);
    EXPECT_LE(p0_norm(P.mesh, a.g - b.g), 1e-8);
    P.F_u = nullptr;
    EXPECT_THROW(solve_optimal(P), ConfigError);
}

TEST(Optimal, IterationCapReportsResidual) {
    auto P = base(16, constant_kernel(1, 0.1));
    P.u_des = [](double x) { return std::sin(pi * x); };
    P.lam = 1.0;
    P.alpha = [](double) { return -100.0; };
    P.beta = [](double) { return 100.0; };
    try {
        solve_optimal(P, 1e-14, 1);
        FAIL() << "expected NonConvergence";
    } catch (const NonConvergence& e) {
        EXPECT_GT(e.last_residual, 0.0);
    }
}

TEST(Optimal, SmallHorizonApproachesLocalPair) {
    auto P = base(32);
    P.u_des = [](double x) { return 0.5 * x * (1 - x); };
    P.lam = 0.1;
    const auto loc = solve_optimal(P);
    double prev_u = 1.0, prev_g = 1.0;
    for (double delta : {0.01, 0.001}) {
        P.kernel = constant_kernel(1, delta);
        const auto T = solve_optimal(P);
        const double du = l2_difference(P.mesh, T.u, P.mesh, loc.u), dg = p0_norm(P.mesh, T.g - loc.g);
        EXPECT_LT(du, prev_u);
        EXPECT_LT(dg, prev_g);
        prev_u = du;
        prev_g = dg;
    }
    EXPECT_LT(prev_u, 1e-4);
    EXPECT_LT(prev_g, 1e-4);
}

TEST(Moments, ExactCellIntegrals) {
    const auto m = make_mesh(1.0, 4);
    const Eigen::VectorXd g = Eigen::VectorXd::Ones(4);
    const auto mo = control_moments(m, g);
    ASSERT_EQ(mo.size(), 3u);
    EXPECT_NEAR(mo[0], 1.0, 1e-15);
    EXPECT_NEAR(mo[1], 0.5, 1e-15);
    EXPECT_NEAR(mo[2], 2.0 / pi, 1e-15);
}

TEST(Moments, P0DifferenceAcrossMeshes) {
    const auto a = make_mesh(1.0, 2), b = make_mesh(1.0, 4);
    Eigen::VectorXd ga(2), gb(4);
    ga << 1.0, 2.0;
    gb << 1.0, 1.0, 2.0, 3.0;
    // differs by 1 on the last quarter
    EXPECT_NEAR(p0_difference(a, ga, b, gb), 0.5, 1e-15);
}

TEST(Sweep, DeltaLadderAtFixedH) {
    auto P = base(16);
    P.u_des = [](double x) { return 0.5 * x * (1 - x); };
    P.lam = 0.1;
    const auto t = control_ac_sweep(P, [](double d) { return constant_kernel(1, d); }, {0.1, 0.05, 0.025}, {1.0 / 16});
    ASSERT_EQ(t.rows.size(), 3u);
    for (std::size_t k = 1; k < t.rows.size(); ++k) {
        EXPECT_FALSE(t.rows[k].failed);
        EXPECT_LT(t.rows[k].state_vs_local_h, t.rows[k - 1].state_vs_local_h);
        EXPECT_LT(t.rows[k].control_vs_local_h, t.rows[k - 1].control_vs_local_h);
    }
    EXPECT_THROW(control_ac_sweep(P, [](double d) { return constant_kernel(1, d); }, {}, {0.1}), ConfigError);
}
