#include "hsnl/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hsnl/errors.hpp"
#include "hsnl/experiments.hpp"
#include "hsnl/parallel.hpp"

namespace hsnl {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Ray {
    std::function<double(double)> diff;  // g(r) = u(x + r e) - u(x), g(0) = 0
    std::vector<double> cuts;            // radii where g is not smooth
    double exit = kInf;                  // g(r) = far for r >= exit
    double far = 0.0;
    double slope = std::numeric_limits<double>::quiet_NaN();  // g'(0) if known
};

// int_0^inf g(r) r^k0 w(r) dr
double ray_integral(const Kernel& w, int k0, const Ray& ray, double sup_norm, const quad::Spec& spec) {
    const double support = w.support_radius();
    double end = std::min(support, ray.exit);
    double total = 0.0;
    if (ray.exit < support && ray.far != 0.0) {
        const double tail = w.radial_integral(ray.exit, support, k0);
        if (!std::isfinite(tail)) throw AssumptionViolation("kernel tail is not summable");
        total += ray.far * tail;
    }
    if (std::isinf(end)) {
        // truncate where the neglected tail is below the absolute tolerance
        if (!std::isfinite(sup_norm)) throw AssumptionViolation("unbounded support needs sup-norm metadata");
        end = 1.0;
        while (2.0 * sup_norm * w.radial_integral(end, kInf, k0) > spec.abs_tol && end < 1e12) end *= 2.0;
    }
    if (!(end > 0.0)) return total;

    std::vector<double> cuts;
    for (double c : ray.cuts)
        if (c > 0.0 && c < end) cuts.push_back(c);
    for (double c : w.breakpoints())
        if (c > 0.0 && c < end) cuts.push_back(c);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double rho = std::min(1.0, end);
    if (!cuts.empty()) rho = std::min(rho, cuts.front());
    const int levels = 24;
    const double eps = std::ldexp(rho, -levels);

    // near-origin remainder from the first-order expansion of g
    const double slope = std::isfinite(ray.slope) ? ray.slope : ray.diff(eps) / eps;
    const double first = w.radial_integral(0.0, eps, k0 + 1);
    if (!std::isfinite(first)) throw AssumptionViolation("first moment diverges near the origin");
    total += slope * first;

    auto integrand = [&](double r) { return ray.diff(r) * std::pow(r, k0) * w.eval(r); };
    const quad::Spec piece{spec.rel_tol, spec.abs_tol / (levels + cuts.size() + 2), spec.max_panels};
    double hi = rho;
    for (int j = 0; j < levels; ++j) {
        total += quad::adaptive(integrand, 0.5 * hi, hi, piece).value;
        hi *= 0.5;
    }
    std::vector<double> nodes{rho};
    for (double c : cuts)
        if (c > rho) nodes.push_back(c);
    nodes.push_back(end);
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        if (!(nodes[i + 1] > nodes[i])) continue;
        auto r = quad::adaptive(integrand, nodes[i], nodes[i + 1], piece);
        if (!r.converged) throw NumericalFailure("pointwise operator quadrature did not converge");
        total += r.value;
    }
    return total;
}

void require_metadata(const Kernel& w, double lipschitz) {
    if (w.singular_at_origin() && !std::isfinite(lipschitz))
        throw AssumptionViolation("singular kernel needs Lipschitz metadata on the input field");
}

// Largest r with |x + r e - c| <= R (the exit radius) and the entry radius; NaN entry when the ray misses.
std::pair<double, double> ball_crossing(std::span<const double> x, std::span<const double> e,
                                        std::span<const double> c, double R) {
    if (std::isinf(R) || c.empty()) return {0.0, kInf};
    double b = 0.0, q = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        b += e[i] * (x[i] - c[i]);
        q += (x[i] - c[i]) * (x[i] - c[i]);
    }
    const double disc = b * b - (q - R * R);
    if (disc < 0.0) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
    const double root = std::sqrt(disc);
    return {std::max(0.0, -b - root), std::max(0.0, -b + root)};
}

// Build the ray description along unit direction e for a scalar evaluator.
template <class Eval>
Ray make_ray(const Eval& eval, double u0, std::span<const double> x, std::span<const double> e,
             std::span<const double> center, double support_radius, const std::vector<double>& kinks) {
    Ray ray;
    const std::vector<double> xv(x.begin(), x.end()), ev(e.begin(), e.end());
    ray.diff = [eval, u0, xv, ev](double r) {
        std::vector<double> y(xv.size());
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = xv[i] + r * ev[i];
        return eval(y) - u0;
    };
    const auto [entry, exit] = ball_crossing(x, e, center, support_radius);
    if (std::isnan(entry)) {
        ray.exit = 0.0;
    } else {
        ray.exit = exit;
        if (entry > 0.0) ray.cuts.push_back(entry);
    }
    ray.far = -u0;
    if (x.size() == 1)
        for (double k : kinks) ray.cuts.push_back((k - x[0]) / e[0]);
    return ray;
}

}  // namespace

std::vector<double> gradient_pointwise(const Kernel& w, std::span<const double> nu, const ScalarField& u,
                                       std::span<const double> x, const quad::Spec& spec) {
    const int d = w.dim();
    if (d != 1 && d != 2) throw DomainError("pointwise operators are implemented for d = 1, 2");
    if (u.dim != d || static_cast<int>(x.size()) != d || static_cast<int>(nu.size()) != d)
        throw DomainError("dimension mismatch in gradient_pointwise");
    require_metadata(w, u.lipschitz);
    const double u0 = u.value(x);
    auto eval = [&u](const std::vector<double>& y) { return u.value(y); };

    if (d == 1) {
        const double s = nu[0] > 0 ? 1.0 : -1.0;
        const double e[1] = {s};
        Ray ray = make_ray(eval, u0, x, e, u.center, u.support_radius, u.kinks);
        if (u.gradient) ray.slope = s * u.gradient(x)[0];
        if (ray.exit == 0.0) return {0.0};  // outside the support looking away from it
        return {s * ray_integral(w, 0, ray, u.sup_norm, spec)};
    }

    const double psi = std::atan2(nu[1], nu[0]);
    auto angular = [&](double th) -> Eigen::Vector2d {
        const double e[2] = {std::cos(th), std::sin(th)};
        Ray ray = make_ray(eval, u0, x, e, u.center, u.support_radius, {});
        if (u.gradient) {
            const auto gr = u.gradient(x);
            ray.slope = gr[0] * e[0] + gr[1] * e[1];
        }
        const double v = ray.exit == 0.0 ? 0.0 : ray_integral(w, 1, ray, u.sup_norm, spec);
        return {v * e[0], v * e[1]};
    };
    const auto r = quad::adaptive(angular, psi - kPi / 2, psi + kPi / 2, spec);
    return {r.value[0], r.value[1]};
}

double divergence_pointwise(const Kernel& w, std::span<const double> nu, const VectorField& v,
                            std::span<const double> x, const quad::Spec& spec) {
    const int d = w.dim();
    if (d != 1 && d != 2) throw DomainError("pointwise operators are implemented for d = 1, 2");
    if (v.dim != d || static_cast<int>(x.size()) != d) throw DomainError("dimension mismatch in divergence_pointwise");
    require_metadata(w, v.lipschitz);
    const auto v0 = v.value(x);
    if (d == 1) {
        ScalarField u;
        u.dim = 1;
        u.value = [&v](std::span<const double> y) { return v.value(y)[0]; };
        u.lipschitz = v.lipschitz;
        u.sup_norm = v.sup_norm;
        u.center = v.center;
        u.support_radius = v.support_radius;
        u.kinks = v.kinks;
        return gradient_pointwise(w, nu, u, x, spec)[0];
    }
    const double psi = std::atan2(nu[1], nu[0]);
    auto angular = [&](double th) -> double {
        const double e[2] = {std::cos(th), std::sin(th)};
        const double proj0 = v0[0] * e[0] + v0[1] * e[1];
        auto eval = [&v, e](const std::vector<double>& y) {
            const auto val = v.value(y);
            return val[0] * e[0] + val[1] * e[1];
        };
        Ray ray = make_ray(eval, proj0, x, e, v.center, v.support_radius, {});
        return ray.exit == 0.0 ? 0.0 : ray_integral(w, 1, ray, v.sup_norm, spec);
    };
    return quad::adaptive(angular, psi - kPi / 2, psi + kPi / 2, spec).value;
}

RateTable localization_study(const Kernel& base, const ScalarField& u, const std::vector<double>& deltas, Norm p,
                             int samples) {
    if (base.dim() != 1 || u.dim != 1) throw DomainError("localization study is one-dimensional");
    if (!u.gradient) throw DomainError("localization study needs the exact derivative of u");
    if (u.center.empty() || std::isinf(u.support_radius)) throw DomainError("localization study needs compact u");
    const double dmax = *std::max_element(deltas.begin(), deltas.end());
    const double reach = std::min(base.support_radius(), 10.0) * dmax;
    const double a = u.center[0] - u.support_radius - reach, b = u.center[0] + u.support_radius;
    const double dx = (b - a) / (samples - 1);
    const double nu[1] = {1.0};
    const quad::Spec spec{1e-11, 1e-13, 1 << 14};

    RateTable table;
    std::vector<double> params, errors;
    for (double delta : deltas) {
        const Kernel w = rescaled(base, delta);
        std::vector<double> err(samples);
        parallel_for(samples, [&](std::ptrdiff_t i) {
            const double x[1] = {a + dx * i};
            err[i] = std::abs(gradient_pointwise(w, nu, u, x, spec)[0] - u.gradient(x)[0]);
        });
        double e = 0.0;
        if (p == Norm::linf) {
            for (double v : err) e = std::max(e, v);
        } else {
            for (double v : err) e += v * v * dx;
            e = std::sqrt(e);
        }
        table.rows.push_back({delta, 0.0, e});
        params.push_back(delta);
        errors.push_back(e);
    }
    if (deltas.size() >= 2) table.fitted_rate = estimate_rate(errors, params);
    return table;
}

std::vector<double> radial_tensor(const Kernel& w, std::span<const double> nu) {
    const int d = w.dim();
    const double radial = w.radial_integral(0.0, kInf, d);
    if (!std::isfinite(radial)) throw AssumptionViolation("first moment diverges");
    if (d == 1) return {radial};
    if (d != 2) throw DomainError("radial tensor implemented for d = 1, 2");
    const double psi = std::atan2(nu[1], nu[0]);
    const auto& gl = quad::gauss_legendre(33);
    std::vector<double> out(4, 0.0);
    for (int q = 0; q < 2; ++q) {
        const double lo = psi - kPi / 2 + q * kPi / 2, hi = lo + kPi / 2;
        for (std::size_t k = 0; k < gl.x.size(); ++k) {
            const double th = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.x[k];
            const double wt = 0.5 * (hi - lo) * gl.w[k];
            const double c = std::cos(th), s = std::sin(th);
            out[0] += wt * c * c;
            out[1] += wt * c * s;
            out[2] += wt * s * c;
            out[3] += wt * s * s;
        }
    }
    for (auto& v : out) v *= radial;
    return out;
}

}  // namespace hsnl
