#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "hsnl/control.hpp"
#include "hsnl/errors.hpp"
#include "hsnl/experiments.hpp"
#include "hsnl/fem1d.hpp"
#include "hsnl/functions.hpp"
#include "hsnl/kernels.hpp"
#include "hsnl/operators.hpp"
#include "hsnl/parallel.hpp"
#include "hsnl/symbols.hpp"

namespace hsnl::cli {

namespace {

using Config = std::map<std::string, std::string>;

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

// --- typed access to the resolved config --------------------------------------------

double parse_number(const std::string& key, const std::string& text) {
    const auto slash = text.find('/');
    if (slash != std::string::npos)
        return parse_number(key, text.substr(0, slash)) / parse_number(key, text.substr(slash + 1));
    const std::string t = trim(text);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size()) throw ConfigError("malformed number for " + key + ": '" + text + "'");
    return v;
}

struct Resolved {
    std::string command;
    Config values;

    const std::string& str(const std::string& key) const {
        const auto it = values.find(key);
        if (it == values.end()) throw ConfigError("missing key " + key);
        return it->second;
    }
    double real(const std::string& key) const { return parse_number(key, str(key)); }
    int integer(const std::string& key) const {
        const double v = real(key);
        if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(key + " must be an integer");
        return static_cast<int>(v);
    }
    bool flag(const std::string& key) const {
        const std::string& v = str(key);
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        throw ConfigError(key + " must be true or false");
    }
    std::vector<double> list(const std::string& key) const {
        std::vector<double> out;
        std::stringstream ss(str(key));
        std::string item;
        while (std::getline(ss, item, ','))
            if (!trim(item).empty()) out.push_back(parse_number(key, item));
        return out;
    }
    Fn function(const std::string& key) const {
        const std::string& v = str(key);
        char* end = nullptr;
        const double c = std::strtod(v.c_str(), &end);
        if (!v.empty() && end == v.c_str() + v.size()) return [c](double) { return c; };
        return parse_function(v);
    }
};

// --- output helpers -------------------------------------------------------------------

void echo(std::ostream& os, const Resolved& r) {
    os << "# command=" << r.command << '\n';
    for (const auto& [k, v] : r.values) os << "# " << k << '=' << v << '\n';
}

// Writes to the given stream for "-", else to a file.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
        if (path != "-") {
            file_.open(path);
            if (!file_) throw ConfigError("cannot open output file " + path);
            os_ = &file_;
        }
    }
    std::ostream& operator*() { return *os_; }

private:
    std::ofstream file_;
    std::ostream* os_;
};

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + num(v[i]);
    return s;
}

// --- kernel keys ------------------------------------------------------------------------

KernelConfig kernel_config(const Resolved& r) {
    KernelConfig k;
    k.family = r.str("kernel.family");
    k.d = r.integer("kernel.d");
    k.s = r.real("kernel.s");
    k.delta = r.real("kernel.delta");
    k.level = r.real("kernel.level");
    if (!r.str("kernel.cutoff").empty()) k.cutoff = r.real("kernel.cutoff");
    const std::string& n = r.str("kernel.normalize");
    if (n != "auto") k.normalize = r.flag("kernel.normalize");
    return k;
}

Config kernel_keys(const std::string& family, double delta = 0.1) {
    return {{"kernel.family", family}, {"kernel.d", "1"},         {"kernel.s", "0.5"},
            {"kernel.delta", num(delta)}, {"kernel.level", "16"}, {"kernel.cutoff", ""},
            {"kernel.normalize", "auto"}};
}

Config merge(Config a, const Config& b) {
    a.insert(b.begin(), b.end());
    return a;
}

std::vector<double> direction(const Resolved& r, const std::string& key, int d) {
    auto v = r.list(key);
    if (static_cast<int>(v.size()) != d) throw ConfigError(key + " needs " + std::to_string(d) + " components");
    return v;
}

// --- subcommands -----------------------------------------------------------------------------

int cmd_symbol(const Resolved& r, std::ostream& out) {
    const Kernel w = make_kernel(kernel_config(r));
    const int d = w.dim();
    const auto nu = direction(r, "nu", d);
    const auto dir = direction(r, "dir", d);
    const auto grid = log_grid(r.real("xi_min"), r.real("xi_max"), r.integer("points"), dir);
    const auto samples = symbol_grid(w, nu, grid);
    Sink sink(r.str("out"), out);
    echo(*sink, r);
    std::string header;
    for (const char* part : {"xi_", "re_", "im_"})
        for (int c = 1; c <= d; ++c) header += (header.empty() ? "" : ",") + std::string(part) + std::to_string(c);
    *sink << header << '\n';
    double peak = 0.0;
    for (const auto& s : samples) {
        std::vector<double> row = s.xi;
        const auto re = s.re_part(), im = s.im_part();
        row.insert(row.end(), re.begin(), re.end());
        row.insert(row.end(), im.begin(), im.end());
        *sink << join(row) << '\n';
        for (const auto& v : s.value) peak = std::max(peak, std::abs(v));
    }
    out << "points=" << samples.size() << ",max_abs=" << num(peak) << '\n';
    return 0;
}

int cmd_bounds(const Resolved& r, std::ostream& out) {
    const Kernel w = make_kernel(kernel_config(r));
    const int d = w.dim();
    const auto nu = direction(r, "nu", d);
    const auto dir = direction(r, "dir", d);
    const auto grid = log_grid(r.real("xi_min"), r.real("xi_max"), r.integer("points"), dir);
    std::vector<BoundReport> reps;
    reps.push_back(check_linear_bound(w, nu, grid));
    reps.push_back(check_l1_bound(w, nu, grid));
    reps.push_back(check_eta_bound(r.real("tau"), nu, grid, d));
    reps.push_back(check_cutoff_perturbation(w, nu, grid));
    reps.push_back(check_hermitian(w, nu, grid));
    reps.push_back(check_lower_bound_small_xi(w, nu));
    reps.push_back(check_lower_bound_large_xi(w, nu, r.real("large_n"), r.real("large_eps")));
    Sink sink(r.str("out"), out);
    echo(*sink, r);
    *sink << "name,grid_min,grid_max,margin,pass\n";
    int violations = 0;
    auto mag = [](const Freq& f) {
        double s = 0.0;
        for (double v : f) s += v * v;
        return std::sqrt(s);
    };
    for (const auto& rep : reps) {
        double lo = INFINITY, hi = 0.0;
        for (const auto& f : rep.grid) {
            lo = std::min(lo, mag(f));
            hi = std::max(hi, mag(f));
        }
        if (rep.grid.empty()) lo = 0.0;
        *sink << rep.name << ',' << num(lo) << ',' << num(hi) << ',' << num(rep.margin) << ','
              << (rep.pass ? "true" : "false") << '\n';
        if (!rep.pass && !rep.report_only) ++violations;
    }
    out << "checks=" << reps.size() << ",violations=" << violations << '\n';
    return violations == 0 ? 0 : 1;
}

int cmd_localize(const Resolved& r, std::ostream& out) {
    Kernel base = make_kernel(kernel_config(r));
    const auto deltas = r.list("deltas");
    const std::string norm = r.str("norm");
    if (norm != "l2" && norm != "linf") throw ConfigError("norm must be l2 or linf");
    ScalarField u;
    u.dim = 1;
    u.value = [](std::span<const double> x) { return std::abs(x[0]) < 1.0 ? std::pow(1.0 - x[0] * x[0], 2) : 0.0; };
    u.gradient = [](std::span<const double> x) {
        return std::vector<double>{std::abs(x[0]) < 1.0 ? -4.0 * x[0] * (1.0 - x[0] * x[0]) : 0.0};
    };
    u.lipschitz = 8.0 / (3.0 * std::sqrt(3.0));
    u.sup_norm = 1.0;
    u.center = {0.0};
    u.support_radius = 1.0;
    u.kinks = {-1.0, 1.0};
    const auto table = localization_study(base, u, deltas, norm == "l2" ? Norm::l2 : Norm::linf, r.integer("samples"));
    Sink sink(r.str("out"), out);
    echo(*sink, r);
    *sink << "delta,error,rate\n";
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        double rate = NAN;
        if (i > 0)
            rate = std::log(table.rows[i].error / table.rows[i - 1].error) /
                   std::log(table.rows[i].param / table.rows[i - 1].param);
        *sink << num(table.rows[i].param) << ',' << num(table.rows[i].error) << ',' << num(rate) << '\n';
    }
    out << "fitted_rate=" << num(table.fitted_rate) << '\n';
    return 0;
}

int sign_of(const Resolved& r) {
    const double nu = r.real("nu");
    if (nu != 1.0 && nu != -1.0) throw ConfigError("nu must be +1 or -1 in one dimension");
    return nu > 0 ? 1 : -1;
}

int cmd_solve(const Resolved& r, std::ostream& out) {
    const Mesh1D mesh = make_mesh(r.real("length"), r.integer("n"));
    const Fn A = r.function("coef"), f = r.function("rhs");
    const bool local = r.str("kernel.family") == "local";
    const FemSystem sys = local ? assemble_local(A, f, mesh)
                                : assemble(make_kernel(kernel_config(r)), sign_of(r), A, f, mesh);
    const Eigen::VectorXd u = solve_state(sys);
    Sink sink(r.str("out"), out);
    echo(*sink, r);
    *sink << "x,u\n";
    for (int j = 0; j <= mesh.cells; ++j)
        *sink << num(mesh.nodes[j]) << ',' << num(j == 0 || j == mesh.cells ? 0.0 : u[j - 1]) << '\n';
    out << "unknowns=" << mesh.unknowns() << ",residual=" << num(galerkin_residual(sys, u))
        << ",l2_norm=" << num(l2_error(mesh, u, [](double) { return 0.0; })) << '\n';
    return 0;
}

// Kernel family indexed by the ladder parameter (delta, or the level for min_level).
std::function<Kernel(double)> ladder_family(const KernelConfig& base) {
    return [base](double p) {
        KernelConfig k = base;
        if (k.family == "min_level")
            k.level = p;
        else
            k.delta = p;
        return make_kernel(k);
    };
}

int cmd_poincare(const Resolved& r, std::ostream& out) {
    Sink sink(r.str("out"), out);
    const double L = r.real("length");
    if (r.str("kernel.family") == "local") {
        std::vector<double> hs;
        for (double n : r.list("ns")) hs.push_back(L / n);
        const auto t = local_poincare_sweep(hs, L / std::numbers::pi, L);
        echo(*sink, r);
        *sink << "delta,h,cp\n";
        for (const auto& row : t.rows) *sink << num(row.param) << ',' << num(row.h) << ',' << num(row.cp) << '\n';
        out << "max_cp=" << num(t.max_cp) << ",fitted_order=" << num(t.fitted_order) << '\n';
        return 0;
    }
    const KernelConfig kc = kernel_config(r);
    const auto ladder = kc.family == "min_level" ? r.list("levels") : r.list("deltas");
    const auto t = poincare_sweep(ladder_family(kc), ladder, L / r.integer("n"), r.real("cap"), sign_of(r), L);
    echo(*sink, r);
    *sink << "delta,h,cp\n";
    for (const auto& row : t.rows) *sink << num(row.param) << ',' << num(row.h) << ',' << num(row.cp) << '\n';
    out << "max_cp=" << num(t.max_cp) << ",pass=" << (t.pass ? "true" : "false") << '\n';
    return 0;
}

int cmd_ac(const Resolved& r, std::ostream& out) {
    const std::string mode = r.str("mode");
    const KernelConfig kc = kernel_config(r);
    SweepConfig c;
    c.hs = r.list("hs");
    c.A = r.function("coef");
    c.f = r.function("rhs");
    c.nu = sign_of(r);
    c.diagonal_only = r.flag("diagonal");
    SweepTable t;
    if (mode == "local") {
        c.family = ladder_family(kc);
        c.params = r.list("deltas");
        const std::string ref = r.str("reference");
        if (ref == "analytic") {
            if (r.str("coef") != "const:1" || r.str("rhs") != "const:1")
                throw ConfigError("analytic reference needs coef=const:1 and rhs=const:1");
            c.reference = Reference::analytic_local;
            c.exact = named_function("quad");
        } else if (ref == "fine") {
            c.reference = Reference::fine_local_fem;
        } else {
            throw ConfigError("reference must be analytic or fine");
        }
        t = ac_local_sweep(c);
    } else if (mode == "nonlocal") {
        c.reference = Reference::fine_nonlocal_fem;
        if (kc.family == "min_level") {
            c.family = ladder_family(kc);
            c.params = r.list("levels");
            KernelConfig lim = kc;
            lim.family = "riesz_truncated";
            c.limit = make_kernel(lim);
        } else if (kc.family == "riesz_truncated") {
            c.params = r.list("svalues");
            c.family = [kc](double s) {
                KernelConfig k = kc;
                k.s = s;
                return make_kernel(k);
            };
            c.limit = make_kernel(kc);
        } else {
            throw ConfigError("nonlocal mode takes kernel.family=min_level or riesz_truncated");
        }
        t = ac_nonlocal_sweep(c);
    } else {
        throw ConfigError("mode must be local or nonlocal");
    }
    Sink sink(r.str("out"), out);
    echo(*sink, r);
    *sink << "param,h,l2_error\n";
    for (const auto& row : t.rows) *sink << num(row.param) << ',' << num(row.h) << ',' << num(row.l2_error) << '\n';
    out << "diagonal_trend=" << t.diagonal_trend << ",diagonal_rate=" << num(t.diagonal_rate)
        << ",max_residual=" << num(t.max_residual) << '\n';
    return 0;
}

int cmd_control(const Resolved& r, std::ostream& out) {
    ControlProblem P;
    P.mesh = make_mesh(1.0, r.integer("n"));
    P.u_des = parse_function(r.str("udes"));
    P.alpha = r.function("alpha");
    P.beta = r.function("beta");
    P.lam = r.real("lam");
    P.gamma = r.function("gamma");
    P.nu = sign_of(r);
    const double delta = r.real("delta");
    if (delta > 0.0) {
        KernelConfig k;
        k.family = r.str("kernel.family");
        k.delta = delta;
        P.kernel = make_kernel(k);
    }
    const OptimalTriple T = solve_optimal(P, r.real("tol"), r.integer("max_iter"));
    const std::filesystem::path dir = r.str("out");
    std::filesystem::create_directories(dir);
    {
        Sink s((dir / "state.csv").string(), out);
        echo(*s, r);
        *s << "x,u\n";
        for (int j = 0; j <= P.mesh.cells; ++j)
            *s << num(P.mesh.nodes[j]) << ',' << num(j == 0 || j == P.mesh.cells ? 0.0 : T.u[j - 1]) << '\n';
    }
    {
        Sink s((dir / "control.csv").string(), out);
        echo(*s, r);
        *s << "cell,g\n";
        for (int c = 0; c < P.mesh.cells; ++c) *s << c << ',' << num(T.g[c]) << '\n';
    }
    out << "objective=" << num(T.objective_value) << ",residual=" << num(T.residual) << ",iters=" << T.iterations
        << '\n';
    return 0;
}

int cmd_appendix(const Resolved& r, std::ostream& out) {
    const auto rows = appendix_limit_table(r.list("deltas"));
    Sink sink(r.str("out"), out);
    echo(*sink, r);
    *sink << "delta,cos_integral,sin_integral,cos_integral_unit,sin_integral_unit\n";
    for (const auto& row : rows)
        *sink << join({row.delta, row.cos_integral, row.sin_integral, row.cos_integral_unit, row.sin_integral_unit})
              << '\n';
    const auto& last = rows.back();
    out << "sin_gap=" << num(std::abs(last.sin_integral - 2.0 * std::numbers::pi))
        << ",cos_abs=" << num(std::abs(last.cos_integral)) << '\n';
    return 0;
}

int cmd_basis(const Resolved& r, std::ostream& out) {
    Eigen::VectorXd mu;
    if (r.str("mu") == "random") {
        const int d = r.integer("d");
        if (d < 2) throw ConfigError("d must be at least 2");
        std::mt19937_64 rng(static_cast<unsigned long long>(r.integer("seed")));
        std::normal_distribution<double> nd;
        mu.resize(d);
        for (int k = 0; k < d; ++k) mu[k] = nd(rng);
        mu[0] = std::abs(mu[0]);
    } else {
        const auto v = r.list("mu");
        mu = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    if (!(mu.norm() > 0.0)) throw ConfigError("mu must be nonzero");
    mu /= mu.norm();
    const OrthoBasis B = ortho_basis(mu);
    const int d = static_cast<int>(mu.size());
    double formula_err = 0.0;
    for (int k = 1; k < d; ++k) formula_err = std::max(formula_err, std::abs(B.matrix(0, k - 1) - OrthoBasis::first_row_formula(mu, k)));
    Sink sink(r.str("out"), out);
    echo(*sink, r);
    std::string header = "row";
    for (int k = 1; k < d; ++k) header += ",v_" + std::to_string(k);
    *sink << header << ",mu\n";
    for (int i = 0; i < d; ++i) {
        *sink << i + 1;
        for (int k = 0; k < d; ++k) *sink << ',' << num(B.matrix(i, k));
        *sink << '\n';
    }
    out << "defect=" << num(B.orthonormality_defect()) << ",formula_error=" << num(formula_err) << '\n';
    return 0;
}

int cmd_validate(const Resolved& r, std::ostream& out) {
    const Kernel w = make_kernel(kernel_config(r));
    const AssumptionReport rep = validate_assumptions(w);
    Sink sink(r.str("out"), out);
    echo(*sink, r);
    auto b = [](bool v) { return v ? "true" : "false"; };
    *sink << "kernel=" << w.describe() << '\n'
          << "nonnegative=" << b(rep.nonnegative) << '\n'
          << "m1_finite_positive=" << b(rep.m1_finite_positive) << '\n'
          << "m2_finite=" << b(rep.m2_finite) << '\n'
          << "monotone_checked=" << b(rep.monotone_checked) << '\n'
          << "monotone=" << b(rep.monotone) << '\n';
    for (const auto& row : rep.ladder)
        *sink << "ladder delta=" << num(row.delta) << " first_moment=" << num(row.first_moment)
              << " tail_mass=" << num(row.tail_mass) << " second_moment=" << num(row.second_moment) << '\n';
    for (const auto& note : rep.notes) *sink << "note=" << note << '\n';
    if (rep.m1_finite_positive && rep.m2_finite) {
        const auto m = moments(w);
        *sink << "m1=" << num(m.m1) << '\n' << "m2=" << num(m.m2) << '\n' << "epsilon0=" << num(m.epsilon0) << '\n';
    }
    out << "valid=" << b(rep.all_pass()) << '\n';
    return rep.all_pass() ? 0 : 1;
}

// --- command table -------------------------------------------------------------------------

struct Command {
    std::string name;
    std::string help;
    Config defaults;
    int (*run)(const Resolved&, std::ostream&);
};

std::vector<Command> commands() {
    const Config io{{"out", "-"}, {"seed", "0"}};
    const Config grid{{"nu", "1"}, {"dir", "1"}, {"xi_min", "0.01"}, {"xi_max", "100"}, {"points", "200"}};
    return {
        {"symbol", "Fourier symbol on a log grid", merge(merge(io, grid), kernel_keys("constant_ball")), cmd_symbol},
        {"bounds", "symbol inequality checks",
         merge(merge(merge(io, grid), kernel_keys("constant_ball")),
               {{"points", "61"}, {"xi_max", "1000"}, {"tau", "0.1"}, {"large_n", "10"}, {"large_eps", "1"}}),
         cmd_bounds},
        {"localize", "localization error of rescaled kernels on a bump",
         merge(merge(io, kernel_keys("constant_ball")),
               {{"deltas", "0.2,0.1,0.05,0.025"}, {"norm", "linf"}, {"samples", "801"}, {"kernel.normalize", "true"}}),
         cmd_localize},
        {"solve", "nonlocal Galerkin solve (kernel.family=local for the H1 problem)",
         merge(merge(io, kernel_keys("rescaled")),
               {{"nu", "1"}, {"n", "64"}, {"length", "1"}, {"coef", "const:1"}, {"rhs", "const:1"}}),
         cmd_solve},
        {"poincare", "discrete Poincare constants over a parameter ladder",
         merge(merge(io, kernel_keys("rescaled")),
               {{"nu", "1"}, {"n", "256"}, {"length", "1"}, {"cap", "0.5"}, {"deltas", "0.2,0.1,0.05,0.025"},
                {"levels", "4,16,64,256"}, {"ns", "16,32,64,128"}}),
         cmd_poincare},
        {"ac", "asymptotic compatibility sweep",
         merge(merge(io, kernel_keys("rescaled")),
               {{"mode", "local"}, {"nu", "1"}, {"deltas", "0.2,0.1,0.05,0.025"}, {"levels", "4,16,64,256"},
                {"svalues", "0.3,0.4,0.45"}, {"hs", "1/16,1/32,1/64,1/128"}, {"coef", "const:1"},
                {"rhs", "const:1"}, {"reference", "analytic"}, {"diagonal", "true"}}),
         cmd_ac},
        {"control", "box-constrained optimal control",
         merge(io, {{"out", "."}, {"udes", "sin"}, {"alpha", "-1"}, {"beta", "1"}, {"lam", "0.01"},
                    {"gamma", "const:1"}, {"delta", "0.05"}, {"n", "32"}, {"tol", "1e-10"}, {"max_iter", "1000"},
                    {"nu", "1"}, {"kernel.family", "rescaled"}}),
         cmd_control},
        {"appendix", "limit integrals of the vanishing fractional kernel", merge(io, {{"deltas", "0.1,0.01,0.001"}}),
         cmd_appendix},
        {"basis", "orthonormal completion of a unit vector", merge(io, {{"mu", "0.6,0.8"}, {"d", "3"}}), cmd_basis},
        {"validate", "kernel assumption report", merge(io, kernel_keys("riesz_truncated")), cmd_validate},
    };
}

std::string alias_of(const std::string& key) {
    std::string a = key;
    for (char& c : a)
        if (c == '.' || c == '_') c = '-';
    return a;
}

Config read_config_file(const std::string& path, const std::string& command, const Config& defaults) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    Config out;
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        // echoed headers ("# key=value") read back as entries; other comments are skipped
        if (!t.empty() && t[0] == '#') t = trim(t.substr(1));
        const auto eq = t.find('=');
        if (t.empty() || eq == std::string::npos) {
            if (!t.empty() && trim(line)[0] != '#') throw ConfigError("malformed config line: " + line);
            continue;
        }
        const std::string key = trim(t.substr(0, eq)), value = trim(t.substr(eq + 1));
        if (key == "command") {
            if (value != command) throw ConfigError("config file is for command " + value);
            continue;
        }
        std::string canon = key;
        for (const auto& [k, v] : defaults)
            if (alias_of(k) == key) canon = k;
        if (!defaults.contains(canon)) throw ConfigError("unknown config key: " + key);
        out[canon] = value;
    }
    return out;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"half-space nonlocal operators, symbols, Galerkin solvers and optimal control"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");
    const auto cmds = commands();
    std::map<std::string, std::map<std::string, std::string>> storage;
    std::map<std::string, std::map<std::string, CLI::Option*>> options;
    std::map<std::string, std::string> config_path;
    std::map<std::string, int> thread_count;
    for (const auto& c : cmds) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        for (const auto& [key, def] : c.defaults) {
            std::string names = "--" + key;
            if (alias_of(key) != key) names += ",--" + alias_of(key);
            options[c.name][key] = sub->add_option(names, storage[c.name][key], "default: " + (def.empty() ? "(none)" : def));
        }
        sub->add_option("--config", config_path[c.name], "key=value file; flags override it");
        sub->add_option("--threads", thread_count[c.name], "worker threads (also HSNL_THREADS)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return e.get_exit_code() == 0 ? 0 : 1;
    }

    const CLI::App* chosen = app.get_subcommands().front();
    const Command* cmd = nullptr;
    for (const auto& c : cmds)
        if (c.name == chosen->get_name()) cmd = &c;

    try {
        apply_thread_env();
        if (thread_count[cmd->name] > 0) set_threads(thread_count[cmd->name]);
        Resolved r;
        r.command = cmd->name;
        r.values = cmd->defaults;
        if (!config_path[cmd->name].empty())
            for (const auto& [k, v] : read_config_file(config_path[cmd->name], cmd->name, cmd->defaults)) r.values[k] = v;
        for (const auto& [key, opt] : options[cmd->name])
            if (opt->count() > 0) r.values[key] = storage[cmd->name][key];
        return cmd->run(r, out);
    } catch (const NonConvergence& e) {
        err << "nonconvergence: " << e.what() << " (last residual " << num(e.last_residual) << ")\n";
        return 2;
    } catch (const NumericalFailure& e) {
        err << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace hsnl::cli
