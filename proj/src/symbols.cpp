#include "hsnl/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hsnl/errors.hpp"
#include "hsnl/parallel.hpp"
#include "hsnl/quadrature.hpp"

namespace hsnl {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
using Vec2c = Eigen::Vector2cd;

// e^{ix} - 1 without cancellation for small x
cplx expm1i(double x) {
    const double sh = std::sin(0.5 * x);
    return {-2.0 * sh * sh, std::sin(x)};
}

double ipow(double r, int k) {
    double v = 1.0;
    for (int i = 0; i < k; ++i) v *= r;
    return v;
}

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double norm(const std::vector<cplx>& v) {
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    return std::sqrt(s);
}

void check_dim12(int d) {
    if (d != 1 && d != 2) throw DomainError("symbols are implemented for d = 1 and d = 2 only");
}

int sign_of(std::span<const double> nu) {
    if (nu.size() != 1 || std::abs(std::abs(nu[0]) - 1.0) > 1e-12) throw DomainError("d = 1 requires nu = +1 or -1");
    return nu[0] > 0 ? 1 : -1;
}

// angle of a unit 2-vector
double angle_of(std::span<const double> nu) {
    if (nu.size() != 2 || std::abs(norm(nu) - 1.0) > 1e-10) throw DomainError("d = 2 requires a unit vector nu");
    return std::atan2(nu[1], nu[0]);
}

// Integrate an angular profile h(theta) e_theta over (-pi/2, pi/2), split where the
// projected frequency vanishes (the radial transform is not smooth there).
template <class H>
Vec2c half_circle(const H& h, double phi_xi, bool split_at_zero_projection) {
    std::vector<double> cuts{-kPi / 2, 0.0, kPi / 2};
    if (split_at_zero_projection) {
        for (double t : {phi_xi - kPi / 2, phi_xi + kPi / 2, phi_xi - 1.5 * kPi, phi_xi + 1.5 * kPi})
            if (t > -kPi / 2 && t < kPi / 2) cuts.push_back(t);
    }
    std::sort(cuts.begin(), cuts.end());
    auto integrand = [&](double th) -> Vec2c {
        const cplx v = h(th);
        return Vec2c(v * std::cos(th), v * std::sin(th));
    };
    Vec2c total = Vec2c::Zero();
    const quad::Spec spec{1e-11, 1e-14, 4000};
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] - cuts[i] < 1e-15) continue;
        auto r = quad::adaptive(integrand, cuts[i], cuts[i + 1], spec);
        total += r.value;
    }
    return total;
}

// apply the rotation taking e1 to nu (angle psi)
std::vector<cplx> rotate(const Vec2c& v, double psi) {
    const double c = std::cos(psi), s = std::sin(psi);
    return {c * v[0] - s * v[1], s * v[0] + c * v[1]};
}

SymbolSample make_sample(std::span<const double> xi, std::vector<cplx> value) {
    SymbolSample out;
    out.xi.assign(xi.begin(), xi.end());
    out.value = std::move(value);
    return out;
}

}  // namespace

std::vector<double> SymbolSample::re_part() const {
    std::vector<double> r;
    for (const auto& v : value) r.push_back(v.real());
    return r;
}

std::vector<double> SymbolSample::im_part() const {
    std::vector<double> r;
    for (const auto& v : value) r.push_back(v.imag());
    return r;
}

cplx radial_transform(const Kernel& w, int k0, double a) {
    if (a < 0.0) throw DomainError("radial transform needs a >= 0");
    if (a == 0.0) return 0.0;
    const auto& gl = quad::gauss_legendre(16);
    const double support = w.support_radius();
    auto breaks = w.breakpoints();
    std::sort(breaks.begin(), breaks.end());
    double r_first = 1.0;
    for (double b : breaks)
        if (b > 0.0) r_first = std::min(r_first, b);
    if (std::isfinite(support)) r_first = std::min(r_first, support);

    const double quarter = kPi / (2.0 * a);
    const double rho = std::min(r_first, quarter);
    int levels = 0;
    double eps = rho;
    while (a * eps > std::ldexp(1.0, -12)) {
        eps *= 0.5;
        ++levels;
    }

    // Taylor expansion of e^{iar} - 1 on (0, eps); error ~ (a eps)^4 relative.
    cplx total = 0.0;
    cplx term = 1.0;
    for (int m = 1; m <= 3; ++m) {
        term *= cplx(0.0, a) / double(m);
        const double P = w.radial_integral(0.0, eps, k0 + m);
        if (!std::isfinite(P)) throw AssumptionViolation("first moment diverges near the origin: " + w.describe());
        total += term * P;
    }

    auto f = [&](double r) { return ipow(r, k0) * w.eval(r); };
    auto g = [&](double r) { return f(r) * expm1i(a * r); };

    // dyadic panels (eps, rho]
    double hi = rho;
    for (int j = 0; j < levels; ++j) {
        const double lo = 0.5 * hi;
        total += quad::gauss(g, lo, hi, gl);
        hi = lo;
    }

    double r_end = support;
    if (!std::isfinite(support)) {
        r_end = std::max({1.0, 200.0 / a, 2.0 * rho});
        if (!breaks.empty()) r_end = std::max(r_end, 1.01 * breaks.back());
    }
    std::vector<double> cuts{rho};
    for (double b : breaks)
        if (b > rho && b < r_end) cuts.push_back(b);
    cuts.push_back(r_end);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double r = cuts[i];
        const double q = cuts[i + 1];
        while (r < q) {
            const double r1 = std::min(q, r + std::min(quarter, r));
            total += quad::gauss(g, r, r1, gl);
            r = r1;
        }
    }

    if (!std::isfinite(support)) {
        const double mass = w.radial_integral(r_end, kInf, k0);
        if (!std::isfinite(mass)) throw AssumptionViolation("kernel tail is not summable: " + w.describe());
        // asymptotic expansion of int_R^inf f e^{iar}
        const double R = r_end, h = 1e-3 * R;
        const double f0 = f(R), fp = f(R + h), fm = f(R - h);
        const double d1 = (fp - fm) / (2.0 * h), d2 = (fp - 2.0 * f0 + fm) / (h * h);
        const cplx ia(0.0, a);
        const cplx series = f0 / ia - d1 / (ia * ia) + d2 / (ia * ia * ia);
        total += -std::exp(cplx(0.0, a * R)) * series - mass;
    }
    return total;
}

cplx symbol_1d(const Kernel& w, int nu, double xi) {
    if (w.dim() != 1) throw DomainError("symbol_1d needs a d = 1 kernel");
    if (xi == 0.0) return 0.0;
    cplx plus = radial_transform(w, 0, 2.0 * kPi * std::abs(xi));
    if (xi < 0.0) plus = std::conj(plus);
    return nu > 0 ? plus : -std::conj(plus);
}

SymbolSample symbol(const Kernel& w, std::span<const double> nu, std::span<const double> xi) {
    const int d = w.dim();
    check_dim12(d);
    if (static_cast<int>(xi.size()) != d) throw DomainError("frequency dimension does not match kernel");
    if (d == 1) return make_sample(xi, {symbol_1d(w, sign_of(nu), xi[0])});

    const double psi = angle_of(nu);
    if (norm(xi) == 0.0) return make_sample(xi, {0.0, 0.0});
    // frequency in the frame where nu = e1
    const double c = std::cos(psi), s = std::sin(psi);
    const double e0 = c * xi[0] + s * xi[1], e1 = -s * xi[0] + c * xi[1];
    const double mag = std::hypot(e0, e1), phi = std::atan2(e1, e0);
    auto inner = [&](double th) -> cplx {
        const double proj = mag * std::cos(th - phi);
        if (proj == 0.0) return 0.0;
        const cplx v = radial_transform(w, 1, 2.0 * kPi * std::abs(proj));
        return proj > 0 ? v : std::conj(v);
    };
    return make_sample(xi, rotate(half_circle(inner, phi, true), psi));
}

std::vector<SymbolSample> symbol_grid(const Kernel& w, std::span<const double> nu, const std::vector<Freq>& grid) {
    std::vector<SymbolSample> out(grid.size());
    parallel_for(static_cast<std::ptrdiff_t>(grid.size()), [&](std::ptrdiff_t i) { out[i] = symbol(w, nu, grid[i]); });
    return out;
}

std::vector<SymbolSample> symbol_grid_serial(const Kernel& w, std::span<const double> nu,
                                             const std::vector<Freq>& grid) {
    std::vector<SymbolSample> out;
    out.reserve(grid.size());
    for (const auto& xi : grid) out.push_back(symbol(w, nu, xi));
    return out;
}

std::vector<cplx> symbol_eta(double tau, std::span<const double> nu, std::span<const double> xi, int d) {
    check_dim12(d);
    if (!(tau > 0.0)) throw DomainError("tau must be positive");
    if (static_cast<int>(xi.size()) != d) throw DomainError("frequency dimension mismatch");
    if (d == 1) {
        const int sg = sign_of(nu);
        const double th = 2.0 * kPi * tau * xi[0];
        cplx plus;
        if (std::abs(th) < 1e-2) {
            // (e^x - 1)/x - 1 = sum_{m>=1} x^m/(m+1)!, x = -i th
            const cplx x(0.0, -th);
            cplx term = 1.0;
            plus = 0.0;
            for (int m = 1; m <= 8; ++m) {
                term *= x / double(m + 1);
                plus += term;
            }
        } else {
            const cplx x(0.0, -th);
            plus = (std::exp(x) - 1.0) / x - 1.0;
        }
        return {sg > 0 ? plus : -std::conj(plus)};
    }
    const double psi = angle_of(nu);
    if (norm(xi) == 0.0) return {0.0, 0.0};
    const double c = std::cos(psi), s = std::sin(psi);
    const double e0 = c * xi[0] + s * xi[1], e1 = -s * xi[0] + c * xi[1];
    const double mag = std::hypot(e0, e1), phi = std::atan2(e1, e0);
    // int_0^1 r (e^{ibr} - 1) dr
    auto J = [](double b) -> cplx {
        if (std::abs(b) < 1e-2) {
            cplx term = 1.0, sum = 0.0;
            for (int m = 1; m <= 10; ++m) {
                term *= cplx(0.0, b) / double(m);
                sum += term / double(m + 2);
            }
            return sum;
        }
        const cplx e = std::exp(cplx(0.0, b));
        return e / cplx(0.0, b) + (e - 1.0) / (b * b) - 0.5;
    };
    auto inner = [&](double th) -> cplx { return J(-2.0 * kPi * tau * mag * std::cos(th - phi)); };
    return rotate(half_circle(inner, phi, false), psi);
}

// ---- bounds -------------------------------------------------------------------

namespace {

void finalize(BoundReport& rep, double tol = kBoundTol) {
    rep.margin = kInf;
    rep.pass = true;
    for (std::size_t i = 0; i < rep.lhs.size(); ++i) {
        rep.margin = std::min(rep.margin, rep.rhs[i] - rep.lhs[i]);
        if (!(rep.lhs[i] <= rep.rhs[i] + tol)) rep.pass = false;
    }
}

std::vector<double> unit_direction(std::span<const double> nu) { return {nu.begin(), nu.end()}; }

Freq scaled(std::span<const double> dir, double t) {
    Freq out(dir.begin(), dir.end());
    for (auto& x : out) x *= t;
    return out;
}

}  // namespace

std::vector<Freq> log_grid(double lo, double hi, int n, std::span<const double> dir) {
    std::vector<Freq> out;
    const double nd = norm(dir);
    for (int i = 0; i < n; ++i) {
        const double t = n == 1 ? lo : std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1.0));
        out.push_back(scaled(dir, t / nd));
    }
    return out;
}

BoundReport check_linear_bound(const Kernel& w, std::span<const double> nu, const std::vector<Freq>& grid) {
    BoundReport rep;
    rep.name = "linear_bound";
    rep.grid = grid;
    const auto m = moments(w);
    const auto vals = symbol_grid(w, nu, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        rep.lhs.push_back(norm(vals[i].value));
        rep.rhs.push_back(2.0 * std::sqrt(2.0) * kPi * m.m1 * norm(grid[i]) + std::sqrt(2.0) * m.m2);
    }
    finalize(rep);
    return rep;
}

BoundReport check_l1_bound(const Kernel& w, std::span<const double> nu, const std::vector<Freq>& grid) {
    BoundReport rep;
    rep.name = "l1_bound";
    rep.grid = grid;
    const double mass = partial_moments(w, 0.0, kInf, 0);
    if (!std::isfinite(mass)) {
        rep.report_only = true;
        rep.margin = kInf;
        rep.pass = true;
        return rep;
    }
    const auto vals = symbol_grid(w, nu, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        rep.lhs.push_back(norm(vals[i].value));
        rep.rhs.push_back(2.0 * mass);
    }
    finalize(rep);
    return rep;
}

BoundReport check_eta_bound(double tau, std::span<const double> nu, const std::vector<Freq>& grid, int d) {
    BoundReport rep;
    rep.name = "eta_bound";
    rep.grid = grid;
    std::vector<std::vector<cplx>> vals(grid.size());
    parallel_for(static_cast<std::ptrdiff_t>(grid.size()),
                 [&](std::ptrdiff_t i) { vals[i] = symbol_eta(tau, nu, grid[i], d); });
    for (std::size_t i = 0; i < grid.size(); ++i) {
        rep.lhs.push_back(norm(vals[i]));
        rep.rhs.push_back(ball_volume(d) * std::min(std::sqrt(2.0) * kPi * tau * norm(grid[i]), 1.0));
    }
    finalize(rep);
    return rep;
}

BoundReport check_cutoff_perturbation(const Kernel& w, std::span<const double> nu, const std::vector<Freq>& grid) {
    BoundReport rep;
    rep.name = "cutoff_perturbation";
    rep.grid = grid;
    const double m2 = moments(w).m2;
    const Kernel wc = cutoff(w, 1.0);
    const auto a = symbol_grid(w, nu, grid);
    const auto b = symbol_grid(wc, nu, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<cplx> diff(a[i].value.size());
        for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = a[i].value[j] - b[i].value[j];
        rep.lhs.push_back(norm(diff));
        rep.rhs.push_back(2.0 * m2);
    }
    finalize(rep);
    return rep;
}

BoundReport check_hermitian(const Kernel& w, std::span<const double> nu, const std::vector<Freq>& grid) {
    BoundReport rep;
    rep.name = "hermitian";
    rep.grid = grid;
    std::vector<Freq> neg;
    for (const auto& xi : grid) neg.push_back(scaled(xi, -1.0));
    const auto a = symbol_grid(w, nu, grid);
    const auto b = symbol_grid(w, nu, neg);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<cplx> diff(a[i].value.size());
        for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = b[i].value[j] - std::conj(a[i].value[j]);
        rep.lhs.push_back(norm(diff));
        rep.rhs.push_back(1e-10 * (1.0 + norm(a[i].value)));
    }
    finalize(rep, 0.0);
    return rep;
}

BoundReport check_lower_bound_small_xi(const Kernel& w, std::span<const double> nu, int kmax) {
    BoundReport rep;
    rep.name = "lower_bound_small_xi";
    const bool finite_first = std::isfinite(partial_moments(w, 0.0, kInf, 1));
    const Kernel wc = finite_first ? w : cutoff(w, 1.0);
    if (!finite_first) rep.name += "(cutoff)";
    const auto dir = unit_direction(nu);
    for (int k = 0; k <= kmax; ++k) rep.grid.push_back(scaled(dir, std::ldexp(1.0, -k)));
    const auto vals = symbol_grid(wc, nu, rep.grid);
    double c1 = kInf;
    for (std::size_t i = 0; i < rep.grid.size(); ++i) {
        const double ratio = norm(vals[i].value) / norm(rep.grid[i]);
        rep.lhs.push_back(ratio);
        c1 = std::min(c1, ratio);
    }
    rep.rhs.assign(rep.lhs.size(), c1);
    rep.fitted_lo = c1;
    rep.fitted_hi = 1.0;  // N1
    rep.margin = c1;
    rep.pass = std::isfinite(c1) && c1 > 0.0;
    return rep;
}

BoundReport check_lower_bound_large_xi(const Kernel& w, std::span<const double> nu, double N, double eps,
                                       int points) {
    BoundReport rep;
    rep.name = "lower_bound_large_xi";
    rep.grid = log_grid(N, 1e3 * N, points, nu);
    const auto vals = symbol_grid(w, nu, rep.grid);
    double inf_ratio = kInf;
    for (std::size_t i = 0; i < rep.grid.size(); ++i) {
        const double mass = partial_moments(w, N * eps / norm(rep.grid[i]), kInf, 0);
        double re = 0.0;
        for (const auto& v : vals[i].value) re += v.real() * v.real();
        re = std::sqrt(re);
        const double ratio = mass > 0.0 ? re / mass : kInf;
        rep.lhs.push_back(ratio);
        inf_ratio = std::min(inf_ratio, ratio);
    }
    rep.rhs.assign(rep.lhs.size(), inf_ratio);
    rep.fitted_lo = inf_ratio;
    rep.margin = inf_ratio;
    rep.pass = std::isfinite(inf_ratio) && inf_ratio > 0.0;
    Family f = w.family();
    for (const Kernel* b = &w; b; b = b->base())
        if (b->family() == Family::log_truncated) f = Family::log_truncated;
    if (f == Family::log_truncated) {
        rep.report_only = true;
        rep.name += "(report_only)";
    }
    return rep;
}

BoundReport check_fractional_sandwich(double delta, int d, const std::vector<Freq>& grid, double cap) {
    BoundReport rep;
    rep.name = "fractional_sandwich";
    rep.grid = grid;
    const Kernel w = fractional_vanishing(d, delta, false);
    std::vector<double> nu(d, 0.0);
    nu[0] = 1.0;
    const auto vals = symbol_grid(w, nu, grid);
    double lo = kInf, hi = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double ratio = norm(vals[i].value) / std::pow(norm(grid[i]), 1.0 - delta);
        rep.lhs.push_back(ratio);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    rep.rhs.assign(rep.lhs.size(), hi);
    rep.fitted_lo = lo;
    rep.fitted_hi = hi;
    rep.margin = cap - hi / lo;
    rep.pass = lo > 0.0 && hi / lo <= cap;
    return rep;
}

BoundReport scaling_identity_check(const Kernel& base, const std::vector<double>& deltas,
                                   const std::vector<Freq>& grid) {
    BoundReport rep;
    rep.name = "scaling_identity";
    std::vector<double> nu(base.dim(), 0.0);
    nu[0] = 1.0;
    for (double delta : deltas) {
        const Kernel wd = rescaled(base, delta);
        std::vector<Freq> shrunk;
        for (const auto& xi : grid) shrunk.push_back(scaled(xi, delta));
        const auto a = symbol_grid(wd, nu, grid);
        const auto b = symbol_grid(base, nu, shrunk);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            std::vector<cplx> diff(a[i].value.size());
            for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = a[i].value[j] - b[i].value[j] / delta;
            const double scale = std::max(norm(a[i].value), 1e-300);
            rep.grid.push_back(grid[i]);
            rep.lhs.push_back(norm(diff) / scale);
            rep.rhs.push_back(1e-6);
        }
    }
    finalize(rep, 0.0);
    return rep;
}

std::vector<CompactnessRow> compactness_ratio_scan(const std::function<Kernel(double)>& family,
                                                   const std::vector<double>& params,
                                                   const std::vector<double>& taus, const std::vector<Freq>& grid) {
    std::vector<CompactnessRow> rows;
    for (double p : params) {
        const Kernel wc = cutoff(family(p), 1.0);
        std::vector<double> nu(wc.dim(), 0.0);
        nu[0] = 1.0;
        const auto lam = symbol_grid(wc, nu, grid);
        for (double tau : taus) {
            double sup = 0.0;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const double l = norm(lam[i].value);
                const double e = norm(symbol_eta(tau, nu, grid[i], wc.dim()));
                sup = std::max(sup, l > 0.0 ? e / l : kInf);
            }
            rows.push_back({p, tau, sup});
        }
    }
    return rows;
}

std::vector<AppendixRow> appendix_limit_table(const std::vector<double>& deltas) {
    std::vector<AppendixRow> rows(deltas.size());
    parallel_for(static_cast<std::ptrdiff_t>(deltas.size()), [&](std::ptrdiff_t i) {
        const double delta = deltas[i];
        // normalized d = 1 profile is delta z^{delta-2}
        const Kernel w = fractional_vanishing(1, delta, true);
        const cplx full = symbol_1d(w, 1, 1.0);
        const cplx unit = symbol_1d(cutoff(w, 1.0), 1, 1.0);
        rows[i] = {delta, full.real(), full.imag(), unit.real(), unit.imag()};
    });
    return rows;
}

}  // namespace hsnl
