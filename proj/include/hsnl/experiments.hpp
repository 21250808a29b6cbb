#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hsnl/fem1d.hpp"
#include "hsnl/kernels.hpp"

namespace hsnl {

// Least-squares slope of log(error) against log(param).
double estimate_rate(const std::vector<double>& errors, const std::vector<double>& params);

// "decreasing" / "increasing" when every step is strict in that direction, "flat" otherwise.
std::string trend_of(const std::vector<double>& values);

enum class Reference { analytic_local, fine_local_fem, fine_nonlocal_fem };

struct SweepConfig {
    std::function<Kernel(double)> family;  // parameter -> kernel with finite support
    std::vector<double> params;
    std::vector<double> hs;
    Fn A = [](double) { return 1.0; };
    Fn f = [](double) { return 1.0; };
    double length = 1.0;
    int nu = 1;
    Reference reference = Reference::analytic_local;
    Fn exact;                    // analytic_local
    std::optional<Kernel> limit;  // fine_nonlocal_fem
    int reference_factor = 4;    // reference h = min(hs) / factor
    bool diagonal_only = false;  // solve only (params[k], hs[k])
    AssemblyOptions assembly{};
};

struct SweepRow {
    double param = 0.0;
    double h = 0.0;
    double l2_error = 0.0;
    double residual = 0.0;
    bool failed = false;
};

struct SweepTable {
    std::vector<SweepRow> rows;         // grid order: params outer, hs inner
    std::vector<double> diagonal;       // errors along (params[k], hs[k]) when the ladders have equal length
    double diagonal_rate = 0.0;         // fitted against params (descriptive only)
    std::string diagonal_trend = "flat";
    std::vector<double> row_rates;      // per param, fitted against h (needs >= 3 hs)
    double max_residual = 0.0;
};

SweepTable ac_local_sweep(const SweepConfig& config);
SweepTable ac_nonlocal_sweep(const SweepConfig& config);

struct PoincareRow {
    double param = 0.0;
    double h = 0.0;
    double cp = 0.0;
};

struct PoincareTable {
    std::vector<PoincareRow> rows;
    double max_cp = 0.0;
    bool stabilizes = false;  // last relative change <= 10%
    bool pass = false;        // max_cp <= cap and stabilizes
    double fitted_order = 0.0;  // only for the local row: order of |cp - reference|
};

PoincareTable poincare_sweep(const std::function<Kernel(double)>& family, const std::vector<double>& ladder, double h,
                             double cap, int nu = 1, double length = 1.0);
// Local FEM constants C_P(h) and the fitted order of |C_P(h) - limit|.
PoincareTable local_poincare_sweep(const std::vector<double>& hs, double limit, double length = 1.0);

}  // namespace hsnl
