#pragma once

#include <cmath>
#include <complex>
#include <algorithm>
#include <queue>
#include <vector>

#include <Eigen/Dense>

namespace hsnl::quad {

// Nodes/weights on [-1, 1].
struct Rule {
    std::vector<double> x;
    std::vector<double> w;
};

// Gauss-Legendre rule with n points; cached, safe to call concurrently.
const Rule& gauss_legendre(int n);

struct Spec {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    int max_panels = 1 << 14;
};

template <class T>
struct Result {
    T value{};
    double error = 0.0;
    int panels = 0;
    bool converged = true;
};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }
template <class Derived>
double magnitude(const Eigen::MatrixBase<Derived>& v) { return v.norm(); }

// Fixed rule mapped to [a, b].
template <class F>
auto gauss(F&& f, double a, double b, const Rule& rule) {
    using T = std::decay_t<decltype(f(a))>;
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    T acc = f(c + h * rule.x[0]) * rule.w[0];
    for (std::size_t k = 1; k < rule.x.size(); ++k) acc = acc + f(c + h * rule.x[k]) * rule.w[k];
    return T(acc * h);
}

namespace detail {
extern const double gk15_x[8];
extern const double gk15_wk[8];
extern const double gk15_wg[4];
}  // namespace detail

// One Gauss-Kronrod 7/15 panel: value (Kronrod) and |K - G| error estimate.
template <class F>
auto gk15(F&& f, double a, double b) {
    using T = std::decay_t<decltype(f(a))>;
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const T fc = f(c);
    T k = fc * detail::gk15_wk[7];
    T g = fc * detail::gk15_wg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * detail::gk15_x[j];
        const T s = f(c - dx) + f(c + dx);
        k = k + s * detail::gk15_wk[j];
        if (j % 2 == 1) g = g + s * detail::gk15_wg[j / 2];
    }
    k = k * h;
    g = g * h;
    return std::pair<T, double>{k, magnitude(k - g)};
}

// Globally adaptive Gauss-Kronrod: bisect the panel with the largest error estimate
// until total error <= max(abs_tol, rel_tol * |value|).
template <class F>
auto adaptive(F&& f, double a, double b, const Spec& spec = {}) {
    using T = std::decay_t<decltype(f(a))>;
    struct Panel {
        double a, b;
        T v;
        double e;
        bool operator<(const Panel& o) const { return e < o.e; }
    };
    Result<T> out;
    if (!(b > a)) {
        out.value = f(a) * 0.0;
        return out;
    }
    std::priority_queue<Panel> heap;
    auto [v0, e0] = gk15(f, a, b);
    heap.push({a, b, v0, e0});
    T total = v0;
    double err = e0;
    int panels = 1;
    while (err > std::max(spec.abs_tol, spec.rel_tol * magnitude(total))) {
        if (panels >= spec.max_panels) {
            out.converged = false;
            break;
        }
        Panel p = heap.top();
        heap.pop();
        const double m = 0.5 * (p.a + p.b);
        if (!(m > p.a && m < p.b)) {  // interval exhausted at machine precision
            heap.push(p);
            out.converged = false;
            break;
        }
        auto [vl, el] = gk15(f, p.a, m);
        auto [vr, er] = gk15(f, m, p.b);
        heap.push({p.a, m, vl, el});
        heap.push({m, p.b, vr, er});
        ++panels;
        total = total - p.v + vl + vr;
        err += el + er - p.e;
    }
    // Final value summed left-to-right so the result does not depend on refinement history.
    std::vector<Panel> items;
    items.reserve(heap.size());
    while (!heap.empty()) {
        items.push_back(heap.top());
        heap.pop();
    }
    std::sort(items.begin(), items.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    total = items.front().v * 0.0;
    err = 0.0;
    for (const auto& it : items) {
        total = total + it.v;
        err += it.e;
    }
    out.value = total;
    out.error = err;
    out.panels = panels;
    return out;
}

}  // namespace hsnl::quad
