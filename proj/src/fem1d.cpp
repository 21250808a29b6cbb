#include "hsnl/fem1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hsnl/errors.hpp"
#include "hsnl/parallel.hpp"
#include "hsnl/quadrature.hpp"

namespace hsnl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Interior-node range whose G phi_i can be nonzero at x.
std::pair<int, int> active_range(const Mesh1D& m, int s, double R, double x) {
    const double t = (x - m.nodes.front()) / m.h;
    int lo, hi;
    if (s > 0) {
        lo = static_cast<int>(std::floor(t)) - 1;
        hi = static_cast<int>(std::ceil(t + R / m.h)) + 1;
    } else {
        lo = static_cast<int>(std::floor(t - R / m.h)) - 1;
        hi = static_cast<int>(std::ceil(t)) + 1;
    }
    return {std::max(1, lo), std::min(m.cells - 1, hi)};
}

void check_assembly_kernel(const Kernel& w) {
    if (w.dim() != 1) throw DomainError("1-D assembly needs a d = 1 kernel");
    if (!std::isfinite(w.support_radius()))
        throw AssumptionViolation("assembly needs a finite kernel support; apply kernel.cutoff first");
}

std::string describe_system(const Kernel& w, int nu, const Mesh1D& m) {
    std::ostringstream os;
    os << w.describe() << " nu=" << nu << " cells=" << m.cells;
    return os.str();
}

struct Block {
    std::vector<double> g;   // row-major: point q, column i-1
    std::vector<int> lo, hi;
};

}  // namespace

Mesh1D make_mesh(double length, int cells) {
    if (!(length > 0.0) || cells < 2) throw DomainError("mesh needs length > 0 and at least 2 cells");
    Mesh1D m;
    m.length = length;
    m.cells = cells;
    m.h = length / cells;
    m.nodes.resize(cells + 1);
    for (int j = 0; j <= cells; ++j) m.nodes[j] = length * j / cells;
    return m;
}

double hat(const Mesh1D& m, int i, double x) {
    const double xc = m.nodes[i];
    if (i > 0 && x > m.nodes[i - 1] && x <= xc) return (x - m.nodes[i - 1]) / m.h;
    if (i < m.cells && x >= xc && x < m.nodes[i + 1]) return (m.nodes[i + 1] - x) / m.h;
    return x == xc ? 1.0 : 0.0;
}

double hat_gradient(const Kernel& w, int nu, const Mesh1D& m, int i, double x) {
    if (i < 1 || i > m.cells - 1) throw DomainError("hat_gradient takes an interior node index");
    const double s = nu > 0 ? 1.0 : -1.0;
    const double node_x[3] = {m.nodes[i - 1], m.nodes[i], m.nodes[i + 1]};
    const double node_v[3] = {0.0, 1.0, 0.0};
    const double phix = hat(m, i, x);

    // z-offsets (ahead in direction s) at which x + s z crosses a node of the hat
    double zs[3], vs[3];
    int nz = 0;
    for (int k = 0; k < 3; ++k) {
        const int kk = s > 0 ? k : 2 - k;
        const double z = s * (node_x[kk] - x);
        if (z > 0.0) {
            zs[nz] = z;
            vs[nz] = node_v[kk];
            ++nz;
        }
    }
    double total = 0.0;
    double za = 0.0, fa = phix;
    for (int k = 0; k < nz; ++k) {
        const double zb = zs[k], fb = vs[k];
        const double beta = (fb - fa) / (zb - za);
        const double c0 = fa - phix;  // exactly zero on the first segment
        const double p1 = w.radial_integral(za, zb, 1);
        if (za == 0.0) {
            total += beta * p1;
        } else {
            const double p0 = w.radial_integral(za, zb, 0);
            total += c0 * p0 + beta * (p1 - za * p0);
        }
        za = zb;
        fa = fb;
    }
    if (phix != 0.0 && nz > 0) {
        const double tail = w.radial_integral(za, kInf, 0);
        if (!std::isfinite(tail)) throw AssumptionViolation("kernel tail is not summable; apply a cutoff");
        total -= phix * tail;
    }
    return s * total;
}

QuadratureSet assembly_quadrature(const Kernel& w, int nu, const Mesh1D& m, const AssemblyOptions& opt) {
    check_assembly_kernel(w);
    const double s = nu > 0 ? 1.0 : -1.0;
    const double R = w.support_radius();
    const double lo = s > 0 ? m.nodes.front() - R : m.nodes.front();
    const double hi = s > 0 ? m.nodes.back() : m.nodes.back() + R;
    std::vector<double> radii{0.0, R};
    for (double r : w.breakpoints())
        if (r < R) radii.push_back(r);

    std::vector<double> pts;
    for (double x : m.nodes)
        for (double r : radii) {
            const double p = x - s * r;
            if (p >= lo && p <= hi) pts.push_back(p);
        }
    pts.push_back(lo);
    pts.push_back(hi);
    std::sort(pts.begin(), pts.end());
    const double merge = 1e-13 * (hi - lo);
    std::vector<double> uniq;
    for (double p : pts)
        if (uniq.empty() || p - uniq.back() > merge) uniq.push_back(p);

    const bool graded = w.singular_at_origin();
    auto is_node = [&](double p) {
        const double t = (p - m.nodes.front()) / m.h;
        const double r = std::round(t);
        return r >= 0 && r <= m.cells && std::abs(t - r) < 1e-9;
    };
    const auto& gl = quad::gauss_legendre(opt.gauss_points);
    QuadratureSet out;
    auto add_panel = [&](double a, double b) {
        const double c = 0.5 * (a + b), h = 0.5 * std::abs(b - a);
        for (std::size_t k = 0; k < gl.x.size(); ++k) {
            out.x.push_back(c + h * gl.x[k]);
            out.w.push_back(h * gl.w[k]);
        }
    };
    // geometric panels from a (the singular end) toward b; b may lie on either side
    auto graded_half = [&](double a, double b) {
        std::vector<double> t{0.0};
        for (int k = opt.grading_levels; k >= 1; --k) t.push_back(std::pow(opt.grading_ratio, k));
        t.push_back(1.0);
        for (std::size_t k = 0; k + 1 < t.size(); ++k) add_panel(a + (b - a) * t[k], a + (b - a) * t[k + 1]);
    };
    for (std::size_t k = 0; k + 1 < uniq.size(); ++k) {
        const double a = uniq[k], b = uniq[k + 1];
        const bool la = graded && is_node(a), lb = graded && is_node(b);
        if (la && lb) {
            const double mid = 0.5 * (a + b);
            graded_half(a, mid);
            graded_half(b, mid);
        } else if (la) {
            graded_half(a, b);
        } else if (lb) {
            graded_half(b, a);
        } else {
            add_panel(a, b);
        }
    }
    return out;
}

Eigen::MatrixXd mass_matrix(const Mesh1D& m) {
    const int n = m.unknowns();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        M(i, i) = 2.0 * m.h / 3.0;
        if (i + 1 < n) M(i, i + 1) = M(i + 1, i) = m.h / 6.0;
    }
    return M;
}

Eigen::VectorXd load_vector(const Fn& f, const Mesh1D& m) {
    const auto& gl = quad::gauss_legendre(8);
    Eigen::VectorXd F = Eigen::VectorXd::Zero(m.unknowns());
    for (int c = 0; c < m.cells; ++c) {
        const double a = m.nodes[c], b = m.nodes[c + 1];
        for (std::size_t k = 0; k < gl.x.size(); ++k) {
            const double x = 0.5 * (a + b) + 0.5 * (b - a) * gl.x[k];
            const double wf = 0.5 * (b - a) * gl.w[k] * f(x);
            if (c >= 1) F[c - 1] += wf * (b - x) / m.h;       // hat of node c
            if (c + 1 <= m.cells - 1) F[c] += wf * (x - a) / m.h;  // hat of node c+1
        }
    }
    return F;
}

FemSystem assemble(const Kernel& w, int nu, const Fn& A, const Fn& f, const Mesh1D& m, const AssemblyOptions& opt) {
    const auto qs = assembly_quadrature(w, nu, m, opt);
    const int n = m.unknowns();
    const int s = nu > 0 ? 1 : -1;
    const double R = w.support_radius();
    std::vector<double> upper(static_cast<std::size_t>(n) * n, 0.0);
    const std::size_t nq = qs.x.size();
    for (std::size_t start = 0; start < nq; start += opt.block) {
        const std::size_t count = std::min<std::size_t>(opt.block, nq - start);
        Block blk;
        blk.g.assign(count * n, 0.0);
        blk.lo.resize(count);
        blk.hi.resize(count);
        std::vector<double> wa(count);
        // columns of G per quadrature point
        parallel_for(static_cast<std::ptrdiff_t>(count), [&](std::ptrdiff_t q) {
            const double x = qs.x[start + q];
            const auto [lo, hi] = active_range(m, s, R, x);
            blk.lo[q] = lo;
            blk.hi[q] = hi;
            wa[q] = qs.w[start + q] * A(x);
            for (int i = lo; i <= hi; ++i) blk.g[q * n + (i - 1)] = hat_gradient(w, s, m, i, x);
        });
        // rows of B: each row owned by one thread, summed in point order
#pragma omp parallel for schedule(dynamic, 4)
        for (int i = 1; i <= n; ++i) {
            double* row = upper.data() + static_cast<std::size_t>(i - 1) * n;
            for (std::size_t q = 0; q < count; ++q) {
                if (i < blk.lo[q] || i > blk.hi[q]) continue;
                const double* gq = blk.g.data() + q * n;
                const double c = wa[q] * gq[i - 1];
                if (c == 0.0) continue;
                for (int j = i; j <= blk.hi[q]; ++j) row[j - 1] += c * gq[j - 1];
            }
        }
    }
    FemSystem sys;
    sys.mesh = m;
    sys.stiffness.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) sys.stiffness(i, j) = sys.stiffness(j, i) = upper[static_cast<std::size_t>(i) * n + j];
    sys.mass = mass_matrix(m);
    sys.load = load_vector(f, m);
    sys.meta = describe_system(w, nu, m);
    return sys;
}

FemSystem assemble_serial(const Kernel& w, int nu, const Fn& A, const Fn& f, const Mesh1D& m,
                          const AssemblyOptions& opt) {
    const auto qs = assembly_quadrature(w, nu, m, opt);
    const int n = m.unknowns();
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    std::vector<double> g(n);
    for (std::size_t q = 0; q < qs.x.size(); ++q) {
        const double x = qs.x[q];
        const double wa = qs.w[q] * A(x);
        for (int i = 1; i <= n; ++i) g[i - 1] = hat_gradient(w, nu, m, i, x);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) K(i, j) += wa * g[i] * g[j];
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) K(i, j) = K(j, i);
    FemSystem sys;
    sys.mesh = m;
    sys.stiffness = K;
    sys.mass = mass_matrix(m);
    sys.load = load_vector(f, m);
    sys.meta = describe_system(w, nu, m);
    return sys;
}

FemSystem assemble_local(const Fn& A, const Fn& f, const Mesh1D& m) {
    const int n = m.unknowns();
    const auto& gl = quad::gauss_legendre(8);
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    for (int c = 0; c < m.cells; ++c) {
        const double a = m.nodes[c], b = m.nodes[c + 1];
        double ka = 0.0;
        for (std::size_t k = 0; k < gl.x.size(); ++k) ka += 0.5 * (b - a) * gl.w[k] * A(0.5 * (a + b) + 0.5 * (b - a) * gl.x[k]);
        ka /= m.h * m.h;
        // cell nodes c (slope -1/h on its hat) and c+1 (slope +1/h)
        const int i0 = c - 1, i1 = c;
        if (c >= 1) K(i0, i0) += ka;
        if (c + 1 <= m.cells - 1) K(i1, i1) += ka;
        if (c >= 1 && c + 1 <= m.cells - 1) {
            K(i0, i1) -= ka;
            K(i1, i0) -= ka;
        }
    }
    FemSystem sys;
    sys.mesh = m;
    sys.stiffness = K;
    sys.mass = mass_matrix(m);
    sys.load = load_vector(f, m);
    sys.meta = "local cells=" + std::to_string(m.cells);
    return sys;
}

Eigen::VectorXd solve_state(const FemSystem& sys) { return solve_state(sys, sys.load); }

Eigen::VectorXd solve_state(const FemSystem& sys, const Eigen::VectorXd& rhs) {
    Eigen::LLT<Eigen::MatrixXd> llt(sys.stiffness);
    if (llt.info() != Eigen::Success) throw NumericalFailure("stiffness is not positive definite: " + sys.meta);
    Eigen::VectorXd u = llt.solve(rhs);
    const double scale = rhs.cwiseAbs().maxCoeff();
    if (scale > 0.0) {
        const double res = (sys.stiffness * u - rhs).cwiseAbs().maxCoeff() / scale;
        if (res > 1e-10) throw NumericalFailure("Cholesky residual too large: " + sys.meta);
    }
    return u;
}

double galerkin_residual(const FemSystem& sys, const Eigen::VectorXd& u) {
    const double scale = sys.load.cwiseAbs().maxCoeff();
    const double res = (sys.stiffness * u - sys.load).cwiseAbs().maxCoeff();
    return scale > 0.0 ? res / scale : res;
}

double poincare_constant(const FemSystem& sys, double tol, int max_iter) {
    Eigen::LLT<Eigen::MatrixXd> llt(sys.stiffness);
    if (llt.info() != Eigen::Success) throw AssumptionViolation("stiffness is not positive definite (coercivity fails)");
    const Eigen::MatrixXd& M = sys.mass;
    Eigen::VectorXd x = Eigen::VectorXd::Ones(M.rows());
    x /= std::sqrt(x.dot(M * x));
    double lambda = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::VectorXd mx = M * x;
        Eigen::VectorXd y = llt.solve(mx);
        // Rayleigh quotient y^T K y / y^T M y with K y = M x
        const double next = y.dot(mx) / y.dot(M * y);
        y /= std::sqrt(y.dot(M * y));
        x = y;
        if (it > 0 && std::abs(next - lambda) <= tol * std::abs(next)) {
            lambda = next;
            if (!(lambda > 0.0)) throw AssumptionViolation("smallest generalized eigenvalue is not positive");
            return 1.0 / std::sqrt(lambda);
        }
        lambda = next;
    }
    throw NonConvergence("inverse power iteration did not converge", lambda);
}

double poincare_constant(const Kernel& w, int nu, const Mesh1D& mesh) {
    const auto sys = assemble(w, nu, [](double) { return 1.0; }, [](double) { return 0.0; }, mesh);
    return poincare_constant(sys);
}

double poincare_constant_local(const Mesh1D& mesh) {
    return poincare_constant(assemble_local([](double) { return 1.0; }, [](double) { return 0.0; }, mesh));
}

double evaluate(const Mesh1D& m, const Eigen::VectorXd& u, double x) {
    if (x <= 0.0 || x >= m.length) return 0.0;
    const int c = std::min(m.cells - 1, static_cast<int>(std::floor(x / m.h)));
    const double t = (x - m.nodes[c]) / m.h;
    const double left = c >= 1 ? u[c - 1] : 0.0;
    const double right = c + 1 <= m.cells - 1 ? u[c] : 0.0;
    return (1.0 - t) * left + t * right;
}

double l2_error(const Mesh1D& m, const Eigen::VectorXd& u, const Fn& exact) {
    const auto& gl = quad::gauss_legendre(8);
    double e = 0.0;
    for (int c = 0; c < m.cells; ++c) {
        const double a = m.nodes[c], b = m.nodes[c + 1];
        for (std::size_t k = 0; k < gl.x.size(); ++k) {
            const double x = 0.5 * (a + b) + 0.5 * (b - a) * gl.x[k];
            const double d = evaluate(m, u, x) - exact(x);
            e += 0.5 * (b - a) * gl.w[k] * d * d;
        }
    }
    return std::sqrt(e);
}

double l2_difference(const Mesh1D& ma, const Eigen::VectorXd& ua, const Mesh1D& mb, const Eigen::VectorXd& ub) {
    std::vector<double> pts = ma.nodes;
    pts.insert(pts.end(), mb.nodes.begin(), mb.nodes.end());
    std::sort(pts.begin(), pts.end());
    const auto& gl = quad::gauss_legendre(8);
    double e = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const double a = pts[k], b = pts[k + 1];
        if (b - a < 1e-14) continue;
        for (std::size_t q = 0; q < gl.x.size(); ++q) {
            const double x = 0.5 * (a + b) + 0.5 * (b - a) * gl.x[q];
            const double d = evaluate(ma, ua, x) - evaluate(mb, ub, x);
            e += 0.5 * (b - a) * gl.w[q] * d * d;
        }
    }
    return std::sqrt(e);
}

}  // namespace hsnl
