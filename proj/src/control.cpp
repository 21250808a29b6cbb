#include "hsnl/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hsnl/errors.hpp"
#include "hsnl/parallel.hpp"
#include "hsnl/quadrature.hpp"

namespace hsnl {

namespace {

void check_problem(const ControlProblem& P) {
    if (!(P.lam > 0.0)) throw AssumptionViolation("regularization weight must be positive");
    if (P.F && !P.F_u) throw ConfigError("custom objective needs its derivative");
}

double F_value(const ControlProblem& P, double x, double u) {
    if (P.F) return P.F(x, u);
    const double d = u - P.u_des(x);
    return d * d;
}

double F_deriv(const ControlProblem& P, double x, double u) {
    if (P.F_u) return P.F_u(x, u);
    return 2.0 * (u - P.u_des(x));
}

// (C g)_i for interior node i: half a cell on each side.
Eigen::VectorXd apply_coupling(const Mesh1D& m, const Eigen::VectorXd& g) {
    Eigen::VectorXd r(m.unknowns());
    for (int i = 1; i < m.cells; ++i) r[i - 1] = 0.5 * m.h * (g[i - 1] + g[i]);
    return r;
}

// Cell average of a P1 field with zero boundary values.
Eigen::VectorXd cell_average(const Mesh1D& m, const Eigen::VectorXd& p) {
    Eigen::VectorXd a(m.cells);
    for (int c = 0; c < m.cells; ++c) {
        const double left = c >= 1 ? p[c - 1] : 0.0;
        const double right = c + 1 <= m.cells - 1 ? p[c] : 0.0;
        a[c] = 0.5 * (left + right);
    }
    return a;
}

Eigen::VectorXd clip(const Eigen::VectorXd& v, const CellData& cd) {
    return v.cwiseMax(cd.lo).cwiseMin(cd.hi);
}

// Preassembled state operator shared by every iteration.
struct Reduced {
    const ControlProblem& P;
    FemSystem sys;
    Eigen::LLT<Eigen::MatrixXd> llt;
    CellData cd;

    explicit Reduced(const ControlProblem& prob) : P(prob), sys(control_system(prob)), llt(sys.stiffness), cd(cell_data(prob)) {
        if (llt.info() != Eigen::Success) throw NumericalFailure("state stiffness is not positive definite");
    }
    Eigen::VectorXd state(const Eigen::VectorXd& g) const { return llt.solve(apply_coupling(P.mesh, g)); }
    Eigen::VectorXd adjoint(const Eigen::VectorXd& u) const { return solve_adjoint(sys, u, P); }
    Eigen::VectorXd target(const Eigen::VectorXd& p) const {
        Eigen::VectorXd t = -cell_average(P.mesh, p);
        for (int c = 0; c < t.size(); ++c) t[c] /= P.lam * cd.gamma[c];
        return clip(t, cd);
    }
    double residual(const Eigen::VectorXd& g, const Eigen::VectorXd& p) const {
        return std::sqrt(P.mesh.h * (g - target(p)).squaredNorm());
    }
};

// J(g + dg) - J(g) with u + du the perturbed state, evaluated without cancellation
// against J itself so that the line search stays meaningful near the optimum.
double objective_change(const Eigen::VectorXd& u, const Eigen::VectorXd& du, const Eigen::VectorXd& g,
                        const Eigen::VectorXd& dg, const ControlProblem& P, const CellData& cd) {
    const Mesh1D& m = P.mesh;
    const auto& gl = quad::gauss_legendre(8);
    double change = 0.0;
    for (int c = 0; c < m.cells; ++c) {
        for (std::size_t k = 0; k < gl.x.size(); ++k) {
            const double x = m.nodes[c] + 0.5 * m.h * (1.0 + gl.x[k]);
            const double u0 = evaluate(m, u, x), d = evaluate(m, du, x);
            const double dF = P.F ? P.F(x, u0 + d) - P.F(x, u0) : d * (2.0 * (u0 - P.u_des(x)) + d);
            change += 0.5 * m.h * gl.w[k] * dF;
        }
        change += 0.5 * P.lam * cd.gamma[c] * m.h * (2.0 * g[c] + dg[c]) * dg[c];
    }
    return change;
}

template <class G>
double cell_gauss(const Mesh1D& m, int c, const G& fn) {
    const auto& gl = quad::gauss_legendre(8);
    const double a = m.nodes[c], b = m.nodes[c + 1];
    double s = 0.0;
    for (std::size_t k = 0; k < gl.x.size(); ++k) s += 0.5 * (b - a) * gl.w[k] * fn(0.5 * (a + b) + 0.5 * (b - a) * gl.x[k]);
    return s;
}

}  // namespace

CellData cell_data(const ControlProblem& P) {
    const Mesh1D& m = P.mesh;
    const auto& gl = quad::gauss_legendre(8);
    CellData cd;
    cd.lo.resize(m.cells);
    cd.hi.resize(m.cells);
    cd.gamma.resize(m.cells);
    for (int c = 0; c < m.cells; ++c) {
        const double a = m.nodes[c], b = m.nodes[c + 1];
        double lo = std::max(P.alpha(a), P.alpha(b)), hi = std::min(P.beta(a), P.beta(b));
        for (double t : gl.x) {
            const double x = 0.5 * (a + b) + 0.5 * (b - a) * t;
            const double al = P.alpha(x), be = P.beta(x);
            if (!(al < be)) throw AssumptionViolation("bounds need alpha < beta everywhere");
            lo = std::max(lo, al);
            hi = std::min(hi, be);
        }
        if (lo > hi) throw AssumptionViolation("sup alpha exceeds inf beta on a cell; refine the mesh");
        cd.lo[c] = lo;
        cd.hi[c] = hi;
        cd.gamma[c] = cell_gauss(m, c, P.gamma) / m.h;
        if (!(cd.gamma[c] > 0.0)) throw AssumptionViolation("Gamma must have a positive lower bound");
    }
    return cd;
}

Eigen::VectorXd control_to_Zh(const Fn& q, const Mesh1D& mesh, const Fn& alpha, const Fn& beta) {
    ControlProblem P;
    P.mesh = mesh;
    P.alpha = alpha;
    P.beta = beta;
    const CellData cd = cell_data(P);
    Eigen::VectorXd g(mesh.cells);
    for (int c = 0; c < mesh.cells; ++c) g[c] = cell_gauss(mesh, c, q) / mesh.h;
    return clip(g, cd);
}

FemSystem control_system(const ControlProblem& P) {
    const Fn zero = [](double) { return 0.0; };
    if (P.kernel) return assemble(*P.kernel, P.nu, P.A, zero, P.mesh);
    return assemble_local(P.A, zero, P.mesh);
}

Eigen::MatrixXd coupling_matrix(const Mesh1D& m) {
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(m.unknowns(), m.cells);
    for (int i = 1; i < m.cells; ++i) C(i - 1, i - 1) = C(i - 1, i) = 0.5 * m.h;
    return C;
}

Eigen::VectorXd solve_adjoint(const FemSystem& sys, const Eigen::VectorXd& u, const ControlProblem& P) {
    const Mesh1D& m = sys.mesh;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m.unknowns());
    for (int c = 0; c < m.cells; ++c) {
        const double a = m.nodes[c];
        const auto& gl = quad::gauss_legendre(8);
        for (std::size_t k = 0; k < gl.x.size(); ++k) {
            const double x = a + 0.5 * m.h * (1.0 + gl.x[k]);
            const double wf = 0.5 * m.h * gl.w[k] * F_deriv(P, x, evaluate(m, u, x));
            const double t = (x - a) / m.h;
            if (c >= 1) b[c - 1] += wf * (1.0 - t);
            if (c + 1 <= m.cells - 1) b[c] += wf * t;
        }
    }
    if (b.cwiseAbs().maxCoeff() == 0.0) return Eigen::VectorXd::Zero(m.unknowns());
    return solve_state(sys, b);
}

double objective(const Eigen::VectorXd& u, const Eigen::VectorXd& g, const ControlProblem& P) {
    const Mesh1D& m = P.mesh;
    double J = 0.0;
    for (int c = 0; c < m.cells; ++c) {
        J += cell_gauss(m, c, [&](double x) { return F_value(P, x, evaluate(m, u, x)); });
        J += 0.5 * P.lam * g[c] * g[c] * cell_gauss(m, c, P.gamma);
    }
    return J;
}

double optimality_residual(const Eigen::VectorXd& g, const Eigen::VectorXd& p, const ControlProblem& P) {
    const CellData cd = cell_data(P);
    Eigen::VectorXd t = -cell_average(P.mesh, p);
    for (int c = 0; c < t.size(); ++c) t[c] /= P.lam * cd.gamma[c];
    return std::sqrt(P.mesh.h * (g - clip(t, cd)).squaredNorm());
}

OptimalTriple solve_optimal(const ControlProblem& P, double tol, int max_iter, const std::optional<Eigen::VectorXd>& g0) {
    check_problem(P);
    const Reduced R(P);
    const Mesh1D& m = P.mesh;
    if (g0 && g0->size() != m.cells) throw ConfigError("initial control has the wrong size");
    OptimalTriple T;
    T.g = g0 ? clip(*g0, R.cd) : clip(Eigen::VectorXd::Zero(m.cells), R.cd);
    T.u = R.state(T.g);
    T.p = R.adjoint(T.u);
    T.history.push_back(objective(T.u, T.g, P));
    for (int it = 0;; ++it) {
        T.residual = R.residual(T.g, T.p);
        T.iterations = it;
        if (T.residual <= tol) break;
        if (it >= max_iter) throw NonConvergence("projected gradient hit the iteration cap", T.residual);

        Eigen::VectorXd grad = cell_average(m, T.p);
        for (int c = 0; c < m.cells; ++c) grad[c] += P.lam * R.cd.gamma[c] * T.g[c];
        double step = 1.0 / P.lam;
        bool accepted = false;
        for (int k = 0; k < 60; ++k, step *= 0.5) {
            const Eigen::VectorXd g_new = clip(T.g - step * grad, R.cd);
            const Eigen::VectorXd dir = g_new - T.g;
            const double slope = m.h * grad.dot(dir);
            const Eigen::VectorXd du = R.state(dir);
            if (objective_change(T.u, du, T.g, dir, P, R.cd) <= 1e-4 * slope) {
                T.g = g_new;
                T.u += du;
                T.p = R.adjoint(T.u);
                T.history.push_back(objective(T.u, T.g, P));
                accepted = true;
                break;
            }
        }
        if (!accepted) throw NonConvergence("Armijo backtracking failed", T.residual);
    }
    T.objective_value = objective(T.u, T.g, P);
    return T;
}

OptimalTriple kkt_reference(const ControlProblem& P) {
    check_problem(P);
    if (P.F) throw ConfigError("KKT reference covers quadratic tracking only");
    const Mesh1D& m = P.mesh;
    const FemSystem sys = control_system(P);
    const CellData cd = cell_data(P);
    const int n = m.unknowns(), c = m.cells;
    const Eigen::MatrixXd C = coupling_matrix(m);
    const Eigen::VectorXd bdes = load_vector(P.u_des, m);
    // unknowns (u, g, p)
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(2 * n + c, 2 * n + c);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * n + c);
    K.block(0, 0, n, n) = sys.stiffness;
    K.block(0, n, n, c) = -C;
    K.block(n, 0, n, n) = -2.0 * sys.mass;
    K.block(n, n + c, n, n) = sys.stiffness;
    rhs.segment(n, n) = -2.0 * bdes;
    K.block(n + n, n, c, c) = (P.lam * m.h * cd.gamma).asDiagonal();
    K.block(n + n, n + c, c, n) = C.transpose();
    // row order: state, adjoint, gradient
    const Eigen::VectorXd sol = K.fullPivLu().solve(rhs);
    OptimalTriple T;
    T.u = sol.segment(0, n);
    T.g = sol.segment(n, c);
    T.p = sol.segment(n + c, n);
    T.residual = optimality_residual(T.g, T.p, P);
    T.objective_value = objective(T.u, T.g, P);
    return T;
}

std::vector<double> control_moments(const Mesh1D& m, const Eigen::VectorXd& g) {
    std::vector<double> out(3, 0.0);
    for (int c = 0; c < m.cells; ++c) {
        const double a = m.nodes[c], b = m.nodes[c + 1];
        out[0] += g[c] * (b - a);
        out[1] += g[c] * 0.5 * (b * b - a * a);
        out[2] += g[c] * (std::cos(std::numbers::pi * a) - std::cos(std::numbers::pi * b)) / std::numbers::pi;
    }
    return out;
}

double p0_difference(const Mesh1D& ma, const Eigen::VectorXd& ga, const Mesh1D& mb, const Eigen::VectorXd& gb) {
    std::vector<double> pts = ma.nodes;
    pts.insert(pts.end(), mb.nodes.begin(), mb.nodes.end());
    std::sort(pts.begin(), pts.end());
    auto cell = [](const Mesh1D& m, double x) { return std::min(m.cells - 1, static_cast<int>(std::floor(x / m.h))); };
    double e = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const double a = pts[k], b = pts[k + 1];
        if (b - a < 1e-14) continue;
        const double mid = 0.5 * (a + b);
        const double d = ga[cell(ma, mid)] - gb[cell(mb, mid)];
        e += (b - a) * d * d;
    }
    return std::sqrt(e);
}

ControlSweepTable control_ac_sweep(const ControlProblem& base, const std::function<Kernel(double)>& family,
                                   const std::vector<double>& deltas, const std::vector<double>& hs, double tol,
                                   int reference_factor) {
    if (deltas.empty() || hs.empty()) throw ConfigError("control sweep needs nonempty ladders");
    if (reference_factor < 4) throw ConfigError("reference resolution must be at least 4x the finest h");
    const double L = base.mesh.length;
    auto mesh_for = [L](double h) { return make_mesh(L, static_cast<int>(std::lround(L / h))); };

    ControlProblem fine = base;
    fine.kernel.reset();
    fine.mesh = mesh_for(*std::min_element(hs.begin(), hs.end()) / reference_factor);
    const OptimalTriple ref = solve_optimal(fine, tol);
    const auto ref_moments = control_moments(fine.mesh, ref.g);

    // local discrete pairs at each h
    std::vector<OptimalTriple> local(hs.size());
    std::vector<Mesh1D> meshes(hs.size());
    for (std::size_t b = 0; b < hs.size(); ++b) {
        ControlProblem lp = base;
        lp.kernel.reset();
        lp.mesh = meshes[b] = mesh_for(hs[b]);
        local[b] = solve_optimal(lp, tol);
    }

    ControlSweepTable t;
    t.rows.resize(deltas.size() * hs.size());
    parallel_for(static_cast<std::ptrdiff_t>(t.rows.size()), [&](std::ptrdiff_t k) {
        const std::size_t a = k / hs.size(), b = k % hs.size();
        ControlSweepRow& row = t.rows[k];
        row.delta = deltas[a];
        row.h = hs[b];
        ControlProblem p = base;
        p.mesh = meshes[b];
        p.kernel = family(deltas[a]);
        try {
            const OptimalTriple s = solve_optimal(p, tol);
            row.iterations = s.iterations;
            row.state_vs_fine = l2_difference(p.mesh, s.u, fine.mesh, ref.u);
            row.state_vs_local_h = l2_difference(p.mesh, s.u, p.mesh, local[b].u);
            row.control_vs_local_h = p0_difference(p.mesh, s.g, p.mesh, local[b].g);
            const auto mom = control_moments(p.mesh, s.g);
            for (int j = 0; j < 3; ++j) row.moment_error = std::max(row.moment_error, std::abs(mom[j] - ref_moments[j]));
        } catch (const NonConvergence&) {
            row.failed = true;
        } catch (const NumericalFailure&) {
            row.failed = true;
        }
    });
    return t;
}

}  // namespace hsnl
