#include "hsnl/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "hsnl/errors.hpp"
#include "hsnl/parallel.hpp"

namespace hsnl {

namespace {

bool strictly_monotone(const std::vector<double>& v) {
    if (v.size() < 2) return true;
    bool inc = true, dec = true;
    for (std::size_t i = 1; i < v.size(); ++i) {
        inc = inc && v[i] > v[i - 1];
        dec = dec && v[i] < v[i - 1];
    }
    return inc || dec;
}

int cells_for(double length, double h) {
    const int n = static_cast<int>(std::lround(length / h));
    if (n < 2 || std::abs(n * h - length) > 1e-9 * length) throw ConfigError("h must divide the domain length");
    return n;
}

void check_config(const SweepConfig& c) {
    if (!c.family) throw ConfigError("sweep needs a kernel family");
    if (c.params.empty() || c.hs.empty()) throw ConfigError("sweep ladders must be nonempty");
    if (!strictly_monotone(c.params) || !strictly_monotone(c.hs)) throw ConfigError("sweep ladders must be strictly monotone");
    if (c.reference_factor < 4) throw ConfigError("reference resolution must be at least 4x the finest h");
    if (c.diagonal_only && c.params.size() != c.hs.size()) throw ConfigError("diagonal sweep needs equal ladder lengths");
}

// Solve every requested cell against a reference evaluator.
SweepTable run_sweep(const SweepConfig& c, const std::function<double(const Mesh1D&, const Eigen::VectorXd&)>& error) {
    std::vector<std::pair<std::size_t, std::size_t>> cells;
    for (std::size_t a = 0; a < c.params.size(); ++a)
        for (std::size_t b = 0; b < c.hs.size(); ++b)
            if (!c.diagonal_only || a == b) cells.emplace_back(a, b);

    SweepTable t;
    t.rows.resize(cells.size());
    parallel_for(static_cast<std::ptrdiff_t>(cells.size()), [&](std::ptrdiff_t k) {
        const auto [a, b] = cells[k];
        SweepRow& row = t.rows[k];
        row.param = c.params[a];
        row.h = c.hs[b];
        try {
            const Mesh1D mesh = make_mesh(c.length, cells_for(c.length, row.h));
            const auto sys = assemble(c.family(row.param), c.nu, c.A, c.f, mesh, c.assembly);
            const auto u = solve_state(sys);
            row.residual = galerkin_residual(sys, u);
            row.l2_error = error(mesh, u);
        } catch (const NumericalFailure&) {
            row.failed = true;
            row.l2_error = std::numeric_limits<double>::quiet_NaN();
        }
    });

    for (const auto& r : t.rows) t.max_residual = std::max(t.max_residual, r.residual);
    // the one-dimensional path through the grid: the only row or column, else the diagonal
    std::vector<double> path_params;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const auto [a, b] = cells[k];
        double p = 0.0;
        if (c.hs.size() == 1)
            p = c.params[a];
        else if (c.params.size() == 1)
            p = c.hs[b];
        else if (c.params.size() == c.hs.size() && a == b)
            p = c.params[a];
        else
            continue;
        t.diagonal.push_back(t.rows[k].l2_error);
        path_params.push_back(p);
    }
    t.diagonal_trend = trend_of(t.diagonal);
    if (t.diagonal.size() >= 2 && std::all_of(t.diagonal.begin(), t.diagonal.end(), [](double e) { return e > 0.0; }))
        t.diagonal_rate = estimate_rate(t.diagonal, path_params);
    if (!c.diagonal_only && c.hs.size() >= 3) {
        for (std::size_t a = 0; a < c.params.size(); ++a) {
            std::vector<double> errs, hs;
            for (std::size_t b = 0; b < c.hs.size(); ++b) {
                errs.push_back(t.rows[a * c.hs.size() + b].l2_error);
                hs.push_back(c.hs[b]);
            }
            const bool usable = std::all_of(errs.begin(), errs.end(), [](double e) { return e > 0.0; });
            t.row_rates.push_back(usable ? estimate_rate(errs, hs) : std::numeric_limits<double>::quiet_NaN());
        }
    }
    return t;
}

}  // namespace

double estimate_rate(const std::vector<double>& errors, const std::vector<double>& params) {
    if (errors.size() != params.size() || errors.size() < 2) throw DomainError("rate fit needs matching series of length >= 2");
    const double n = static_cast<double>(errors.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!(errors[i] > 0.0) || !(params[i] > 0.0)) throw DomainError("rate fit needs positive data");
        sx += std::log(params[i]);
        sy += std::log(errors[i]);
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        const double dx = std::log(params[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(errors[i]) - my);
    }
    if (sxx == 0.0) throw DomainError("rate fit needs distinct parameters");
    return sxy / sxx;
}

std::string trend_of(const std::vector<double>& v) {
    if (v.size() < 2) return "flat";
    bool inc = true, dec = true;
    for (std::size_t i = 1; i < v.size(); ++i) {
        inc = inc && v[i] > v[i - 1];
        dec = dec && v[i] < v[i - 1];
    }
    return dec ? "decreasing" : inc ? "increasing" : "flat";
}

SweepTable ac_local_sweep(const SweepConfig& c) {
    check_config(c);
    if (c.reference == Reference::analytic_local) {
        if (!c.exact) throw ConfigError("analytic reference needs the exact local solution");
        return run_sweep(c, [&](const Mesh1D& m, const Eigen::VectorXd& u) { return l2_error(m, u, c.exact); });
    }
    if (c.reference != Reference::fine_local_fem) throw ConfigError("local sweep takes an analytic or fine local reference");
    const double hmin = *std::min_element(c.hs.begin(), c.hs.end());
    const Mesh1D ref_mesh = make_mesh(c.length, cells_for(c.length, hmin / c.reference_factor));
    const auto ref_sys = assemble_local(c.A, c.f, ref_mesh);
    const Eigen::VectorXd ref = solve_state(ref_sys);
    return run_sweep(c, [&](const Mesh1D& m, const Eigen::VectorXd& u) { return l2_difference(m, u, ref_mesh, ref); });
}

SweepTable ac_nonlocal_sweep(const SweepConfig& c) {
    check_config(c);
    if (c.reference != Reference::fine_nonlocal_fem || !c.limit) throw ConfigError("nonlocal sweep needs the limit kernel");
    const double hmin = *std::min_element(c.hs.begin(), c.hs.end());
    const Mesh1D ref_mesh = make_mesh(c.length, cells_for(c.length, hmin / c.reference_factor));
    const auto ref_sys = assemble(*c.limit, c.nu, c.A, c.f, ref_mesh, c.assembly);
    const Eigen::VectorXd ref = solve_state(ref_sys);
    return run_sweep(c, [&](const Mesh1D& m, const Eigen::VectorXd& u) { return l2_difference(m, u, ref_mesh, ref); });
}

PoincareTable poincare_sweep(const std::function<Kernel(double)>& family, const std::vector<double>& ladder, double h,
                             double cap, int nu, double length) {
    if (ladder.empty()) throw ConfigError("Poincare sweep needs a nonempty ladder");
    const Mesh1D mesh = make_mesh(length, cells_for(length, h));
    PoincareTable t;
    t.rows.resize(ladder.size());
    parallel_for(static_cast<std::ptrdiff_t>(ladder.size()), [&](std::ptrdiff_t k) {
        t.rows[k] = {ladder[k], h, poincare_constant(family(ladder[k]), nu, mesh)};
    });
    for (const auto& r : t.rows) t.max_cp = std::max(t.max_cp, r.cp);
    if (t.rows.size() >= 2) {
        const double a = t.rows[t.rows.size() - 2].cp, b = t.rows.back().cp;
        t.stabilizes = std::abs(b - a) <= 0.1 * std::abs(b);
    } else {
        t.stabilizes = true;
    }
    t.pass = t.max_cp <= cap && t.stabilizes;
    return t;
}

PoincareTable local_poincare_sweep(const std::vector<double>& hs, double limit, double length) {
    PoincareTable t;
    std::vector<double> gaps, hv;
    for (double h : hs) {
        const double cp = poincare_constant_local(make_mesh(length, cells_for(length, h)));
        t.rows.push_back({0.0, h, cp});
        t.max_cp = std::max(t.max_cp, cp);
        gaps.push_back(std::abs(cp - limit));
        hv.push_back(h);
    }
    t.stabilizes = trend_of(gaps) == "decreasing";
    t.pass = t.stabilizes;
    if (hs.size() >= 2) t.fitted_order = estimate_rate(gaps, hv);
    return t;
}

}  // namespace hsnl
