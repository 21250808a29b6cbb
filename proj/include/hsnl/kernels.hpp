#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hsnl {

enum class Family {
    constant_ball,
    riesz_truncated,
    fractional_vanishing,
    log_regularized,
    log_truncated,
    min_level,
    rescaled,
    cutoff,
    tabulated
};

std::string_view to_string(Family f);
Family family_from_string(std::string_view name);  // throws ConfigError

// Surface measure of the unit sphere in R^d (2, 2*pi, 4*pi for d = 1, 2, 3).
double sphere_measure(int d);
// Volume of the unit ball in R^d.
double ball_volume(int d);

namespace detail {
class KernelModel;
}

// Radial kernel w(z) = c * profile(|z|). Immutable; copies share the model.
class Kernel {
public:
    Kernel(std::shared_ptr<const detail::KernelModel> model, double scale, bool normalized);

    Family family() const;
    int dim() const;
    double c_norm() const { return scale_; }
    bool normalized() const { return normalized_; }

    // Radial profile value (including c_norm). Throws DomainError for r <= 0.
    double eval(double r) const;
    // One-dimensional radial integral  int_a^b r^k profile(r) dr ; +inf when divergent.
    double radial_integral(double a, double b, int k) const;
    // Radius beyond which the profile vanishes (+inf for unbounded support).
    double support_radius() const;
    // Radii in (0, support] where the profile or its derivative jumps.
    std::vector<double> breakpoints() const;
    bool declared_monotone() const;
    // True when int_{B_r} w diverges for every r > 0.
    bool singular_at_origin() const;

    // Family parameters (NaN when not applicable).
    double s() const;
    double delta() const;
    double level() const;
    double radius() const;
    const Kernel* base() const;

    std::string describe() const;

    Kernel with_scale(double scale, bool normalized) const;

private:
    std::shared_ptr<const detail::KernelModel> model_;
    double scale_ = 1.0;
    bool normalized_ = false;
};

// ---- factories -------------------------------------------------------------
// profile chi_{r<=1}
Kernel constant_ball(int d, double c = 1.0);
// profile r^{-d-s} chi_{r<=1}, 0 < s < 1
Kernel riesz_truncated(int d, double s);
// 2 d delta r^{delta-d-1}; normalized by default (limit of int_{B_R}|z|w equal to 2d)
Kernel fractional_vanishing(int d, double delta, bool normalize = true);
// |log delta|^{-1} r^{-1} (r+delta)^{-d}
Kernel log_regularized(int d, double delta, bool normalize = true);
// (2d/omega) |log delta|^{-1} r^{-d-1} on delta < r < 1 (already normalized)
Kernel log_truncated(int d, double delta);
// min{n, base}; base must have a nonincreasing profile
Kernel min_level(const Kernel& base, double n);
// delta^{-d-1} base(r/delta)
Kernel rescaled(const Kernel& base, double delta);
// base * chi_{r<=R}
Kernel cutoff(const Kernel& base, double R);
// linear interpolation in (log r, value); zero outside [r.front(), r.back()]
Kernel tabulated(int d, std::vector<double> r, std::vector<double> values);

// Rescaled normalized constant kernel: 2d(d+1)/omega * delta^{-d-1} chi_{|z|<=delta}.
Kernel constant_kernel(int d, double delta);

// ---- moments ---------------------------------------------------------------
// int_{a<|z|<b} |z|^order w(z) dz in R^d; +inf signals divergence.
double partial_moments(const Kernel& k, double a, double b, int order);

struct MomentReport {
    double m1 = 0.0;
    double m2 = 0.0;
    std::map<double, double> second_moment_ball;  // R -> int_{B_R}|z|^2 w
    std::map<double, double> tail_mass;           // R -> int_{|z|>R} w
    double epsilon0 = 0.0;
};

// Throws AssumptionViolation when M1 or M2 diverges or M1 <= 0.
MomentReport moments(const Kernel& k);

// Largest dyadic radius eps <= 1 with 0 < int_{eps<|z|<1} w < inf.
double epsilon0(const Kernel& k);

// Scale so that int |z| w = 2d (delta-families: its delta -> 0 limit). Idempotent.
Kernel normalize_first_moment(const Kernel& k);

// Same construction with a different delta (delta-families and rescaled); nullopt otherwise.
std::optional<Kernel> with_delta(const Kernel& k, double delta);

struct LadderRow {
    double delta = 0.0;
    double first_moment = 0.0;   // int_{B_1}|z| w_delta
    double tail_mass = 0.0;      // int_{|z|>1} w_delta
    double second_moment = 0.0;  // int_{B_1}|z|^2 w_delta
};

struct AssumptionReport {
    bool nonnegative = true;
    bool m1_finite_positive = false;
    bool m2_finite = false;
    bool monotone_checked = false;  // d == 1 and family declared monotone
    bool monotone = true;
    std::vector<LadderRow> ladder;  // empty unless delta-family
    bool ladder_tail_decreasing = true;
    bool ladder_second_moment_decreasing = true;
    bool ladder_first_moment_near_2d = true;  // within 1% at the last rung
    std::vector<std::string> notes;

    bool standing_conditions() const { return nonnegative && m1_finite_positive && m2_finite && monotone; }
    bool all_pass() const {
        return standing_conditions() && ladder_tail_decreasing && ladder_second_moment_decreasing &&
               ladder_first_moment_near_2d;
    }
};

AssumptionReport validate_assumptions(const Kernel& k);

// ---- configuration ---------------------------------------------------------
struct KernelConfig {
    std::string family = "constant_ball";
    int d = 1;
    double s = 0.5;
    double delta = 0.1;
    double level = 16.0;
    std::optional<double> cutoff;
    std::optional<bool> normalize;
};

// Build a kernel from the flat config grammar (kernel.family, kernel.d, ...).
// min_level uses a riesz_truncated(s) base; rescaled uses the normalized constant ball.
Kernel make_kernel(const KernelConfig& cfg);

}  // namespace hsnl
