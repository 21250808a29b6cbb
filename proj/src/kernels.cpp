#include "hsnl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "hsnl/errors.hpp"
#include "hsnl/quadrature.hpp"

namespace hsnl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_dim(int d) {
    if (d < 1 || d > 3) throw DomainError("kernel dimension must be 1, 2 or 3");
}

// int_a^b r^p dr for 0 <= a <= b <= inf; +inf when divergent.
double power_integral(double a, double b, double p) {
    if (!(b > a)) return 0.0;
    const double q = p + 1.0;
    if (q == 0.0) {
        if (a == 0.0 || std::isinf(b)) return kInf;
        return std::log(b / a);
    }
    if (q > 0.0) {
        if (std::isinf(b)) return kInf;
        if (a == 0.0) return std::pow(b, q) / q;
        return std::pow(a, q) * std::expm1(q * std::log1p((b - a) / a)) / q;
    }
    if (a == 0.0) return kInf;
    if (std::isinf(b)) return -std::pow(a, q) / q;
    return std::pow(a, q) * std::expm1(q * std::log1p((b - a) / a)) / q;
}

// int_a^b g(r) dr for a positive integrand with possible algebraic behaviour at 0 or infinity.
// Dyadic shells toward open ends; each shell is integrated adaptively.
double radial_numeric(const std::function<double(double)>& g, double a, double b) {
    if (!(b > a)) return 0.0;
    const quad::Spec spec{1e-13, 1e-300, 2000};
    auto finite_piece = [&](double lo, double hi) {
        auto r = quad::adaptive(g, lo, hi, spec);
        if (!r.converged && r.error > 1e-9 * std::abs(r.value)) throw NumericalFailure("radial quadrature did not converge");
        return r.value;
    };
    auto shells = [&](double start, double factor) {
        // factor < 1: toward zero; factor > 1: toward infinity
        double total = 0.0;
        double r0 = start;
        int small = 0;
        for (int j = 0; j < 2200; ++j) {
            const double r1 = r0 * factor;
            const double piece = factor < 1.0 ? finite_piece(r1, r0) : finite_piece(r0, r1);
            total += piece;
            if (!std::isfinite(total)) return kInf;
            if (std::abs(piece) <= 1e-17 * std::abs(total)) {
                if (++small >= 4) return total;
            } else {
                small = 0;
            }
            r0 = r1;
            if (r0 == 0.0 || std::isinf(r0)) break;
        }
        return kInf;
    };
    if (a == 0.0 && std::isinf(b)) return shells(1.0, 0.5) + shells(1.0, 2.0);
    if (a == 0.0) return shells(b, 0.5);
    if (std::isinf(b)) return shells(a, 2.0);
    return finite_piece(a, b);
}

}  // namespace

namespace detail {

class KernelModel {
public:
    virtual ~KernelModel() = default;
    virtual Family family() const = 0;
    virtual int dim() const = 0;
    virtual double eval(double r) const = 0;
    virtual double integral(double a, double b, int k) const = 0;
    virtual double support() const = 0;
    virtual std::vector<double> breaks() const = 0;
    virtual bool monotone() const = 0;
    virtual double s() const { return kNaN; }
    virtual double delta() const { return kNaN; }
    virtual double level() const { return kNaN; }
    virtual double radius() const { return kNaN; }
    virtual const Kernel* base() const { return nullptr; }
    virtual std::string describe() const = 0;
};

namespace {

class ConstantBall final : public KernelModel {
public:
    explicit ConstantBall(int d) : d_(d) {}
    Family family() const override { return Family::constant_ball; }
    int dim() const override { return d_; }
    double eval(double r) const override { return r <= 1.0 ? 1.0 : 0.0; }
    double integral(double a, double b, int k) const override { return power_integral(a, std::min(b, 1.0), k); }
    double support() const override { return 1.0; }
    std::vector<double> breaks() const override { return {1.0}; }
    bool monotone() const override { return true; }
    std::string describe() const override { return "constant_ball"; }

private:
    int d_;
};

class RieszTruncated final : public KernelModel {
public:
    RieszTruncated(int d, double s) : d_(d), s_(s) {
        if (!(s > 0.0 && s < 1.0)) throw DomainError("riesz_truncated requires 0 < s < 1");
    }
    Family family() const override { return Family::riesz_truncated; }
    int dim() const override { return d_; }
    double eval(double r) const override { return r <= 1.0 ? std::pow(r, -d_ - s_) : 0.0; }
    double integral(double a, double b, int k) const override {
        return power_integral(a, std::min(b, 1.0), k - d_ - s_);
    }
    double support() const override { return 1.0; }
    std::vector<double> breaks() const override { return {1.0}; }
    bool monotone() const override { return true; }
    double s() const override { return s_; }
    std::string describe() const override {
        std::ostringstream os;
        os << "riesz_truncated(s=" << s_ << ")";
        return os.str();
    }

private:
    int d_;
    double s_;
};

class FractionalVanishing final : public KernelModel {
public:
    FractionalVanishing(int d, double delta) : d_(d), delta_(delta) {
        if (!(delta > 0.0 && delta < 1.0)) throw DomainError("fractional_vanishing requires 0 < delta < 1");
    }
    Family family() const override { return Family::fractional_vanishing; }
    int dim() const override { return d_; }
    double eval(double r) const override { return 2.0 * d_ * delta_ * std::pow(r, delta_ - d_ - 1.0); }
    double integral(double a, double b, int k) const override {
        return 2.0 * d_ * delta_ * power_integral(a, b, k + delta_ - d_ - 1.0);
    }
    double support() const override { return kInf; }
    std::vector<double> breaks() const override { return {}; }
    bool monotone() const override { return true; }
    double delta() const override { return delta_; }
    std::string describe() const override {
        std::ostringstream os;
        os << "fractional_vanishing(delta=" << delta_ << ")";
        return os.str();
    }

private:
    int d_;
    double delta_;
};

class LogRegularized final : public KernelModel {
public:
    LogRegularized(int d, double delta) : d_(d), delta_(delta), inv_log_(1.0 / std::abs(std::log(delta))) {
        if (!(delta > 0.0 && delta < 1.0)) throw DomainError("log_regularized requires 0 < delta < 1");
    }
    Family family() const override { return Family::log_regularized; }
    int dim() const override { return d_; }
    double eval(double r) const override { return inv_log_ / (r * std::pow(r + delta_, d_)); }
    double integral(double a, double b, int k) const override {
        if (!(b > a)) return 0.0;
        const double dl = delta_;
        // integrand r^{k-1} (r+delta)^{-d}: divergent at 0 iff k == 0, at infinity iff k >= d
        if (k == 0 && a == 0.0) return kInf;
        if (k >= d_ && std::isinf(b)) return kInf;
        if (d_ == 1 && k == 0) {
            if (std::isinf(b)) return inv_log_ * std::log1p(dl / a) / dl;
            return inv_log_ * std::log1p(dl * (b - a) / (a * (b + dl))) / dl;
        }
        if (d_ == 2 && k == 0) {
            const double first = std::isinf(b) ? std::log1p(dl / a) / (dl * dl)
                                               : std::log1p(dl * (b - a) / (a * (b + dl))) / (dl * dl);
            const double second = std::isinf(b) ? 1.0 / (dl * (a + dl)) : (b - a) / (dl * (a + dl) * (b + dl));
            return inv_log_ * (first - second);
        }
        if (d_ == 2 && k == 1) {
            if (std::isinf(b)) return inv_log_ / (a + dl);
            return inv_log_ * (b - a) / ((a + dl) * (b + dl));
        }
        const int d = d_;
        auto g = [k, d, dl](double r) { return std::pow(r, k - 1) / std::pow(r + dl, d); };
        return inv_log_ * radial_numeric(g, a, b);
    }
    double support() const override { return kInf; }
    std::vector<double> breaks() const override { return {}; }
    bool monotone() const override { return true; }
    double delta() const override { return delta_; }
    std::string describe() const override {
        std::ostringstream os;
        os << "log_regularized(delta=" << delta_ << ")";
        return os.str();
    }

private:
    int d_;
    double delta_;
    double inv_log_;
};

class LogTruncated final : public KernelModel {
public:
    LogTruncated(int d, double delta) : d_(d), delta_(delta), inv_log_(1.0 / std::abs(std::log(delta))) {
        if (!(delta > 0.0 && delta < 1.0)) throw DomainError("log_truncated requires 0 < delta < 1");
    }
    Family family() const override { return Family::log_truncated; }
    int dim() const override { return d_; }
    double eval(double r) const override {
        return (r > delta_ && r < 1.0) ? inv_log_ * std::pow(r, -d_ - 1.0) : 0.0;
    }
    double integral(double a, double b, int k) const override {
        return inv_log_ * power_integral(std::max(a, delta_), std::min(b, 1.0), k - d_ - 1.0);
    }
    double support() const override { return 1.0; }
    std::vector<double> breaks() const override { return {delta_, 1.0}; }
    bool monotone() const override { return false; }
    double delta() const override { return delta_; }
    std::string describe() const override {
        std::ostringstream os;
        os << "log_truncated(delta=" << delta_ << ")";
        return os.str();
    }

private:
    int d_;
    double delta_;
    double inv_log_;
};

class MinLevel final : public KernelModel {
public:
    MinLevel(Kernel base, double n) : base_(std::move(base)), n_(n) {
        if (!(n > 0.0)) throw DomainError("min_level requires a positive level");
        if (!base_.declared_monotone())
            throw AssumptionViolation("min_level requires a base kernel with nonincreasing profile");
        crossover_ = find_crossover();
    }
    Family family() const override { return Family::min_level; }
    int dim() const override { return base_.dim(); }
    double eval(double r) const override { return std::min(n_, base_.eval(r)); }
    double integral(double a, double b, int k) const override {
        if (!(b > a)) return 0.0;
        double v = 0.0;
        if (a < crossover_) v += n_ * power_integral(a, std::min(b, crossover_), k);
        if (b > crossover_) v += base_.radial_integral(std::max(a, crossover_), b, k);
        return v;
    }
    double support() const override { return base_.support_radius(); }
    std::vector<double> breaks() const override {
        auto br = base_.breakpoints();
        if (crossover_ > 0.0) br.push_back(crossover_);
        std::sort(br.begin(), br.end());
        br.erase(std::unique(br.begin(), br.end()), br.end());
        return br;
    }
    bool monotone() const override { return true; }
    double level() const override { return n_; }
    double s() const override { return base_.s(); }
    const Kernel* base() const override { return &base_; }
    double crossover() const { return crossover_; }
    std::string describe() const override {
        std::ostringstream os;
        os << "min_level(n=" << n_ << ", " << base_.describe() << ")";
        return os.str();
    }

private:
    // sup{ r : base(r) > n }, 0 when the base never exceeds the level.
    double find_crossover() const {
        const double top = std::isinf(base_.support_radius()) ? 1e12 : base_.support_radius();
        if (base_.eval(top) > n_) return top;
        double lo = std::log(1e-300), hi = std::log(top);
        if (base_.eval(std::exp(lo)) <= n_) return 0.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (base_.eval(std::exp(mid)) > n_)
                lo = mid;
            else
                hi = mid;
            if (hi - lo < 1e-15) break;
        }
        return std::exp(0.5 * (lo + hi));
    }
    Kernel base_;
    double n_;
    double crossover_ = 0.0;
};

class Rescaled final : public KernelModel {
public:
    Rescaled(Kernel base, double delta) : base_(std::move(base)), delta_(delta) {
        if (!(delta > 0.0)) throw DomainError("rescaled requires delta > 0");
        factor_ = std::pow(delta_, -base_.dim() - 1.0);
    }
    Family family() const override { return Family::rescaled; }
    int dim() const override { return base_.dim(); }
    double eval(double r) const override { return factor_ * base_.eval(r / delta_); }
    double integral(double a, double b, int k) const override {
        if (!(b > a)) return 0.0;
        const double v = base_.radial_integral(a / delta_, b / delta_, k);
        if (v == 0.0) return 0.0;
        return std::pow(delta_, k - base_.dim()) * v;
    }
    double support() const override { return delta_ * base_.support_radius(); }
    std::vector<double> breaks() const override {
        auto br = base_.breakpoints();
        for (auto& r : br) r *= delta_;
        return br;
    }
    bool monotone() const override { return base_.declared_monotone(); }
    double delta() const override { return delta_; }
    const Kernel* base() const override { return &base_; }
    std::string describe() const override {
        std::ostringstream os;
        os << "rescaled(delta=" << delta_ << ", " << base_.describe() << ")";
        return os.str();
    }

private:
    Kernel base_;
    double delta_;
    double factor_;
};

class Cutoff final : public KernelModel {
public:
    Cutoff(Kernel base, double R) : base_(std::move(base)), R_(R) {
        if (!(R > 0.0)) throw DomainError("cutoff radius must be positive");
    }
    Family family() const override { return Family::cutoff; }
    int dim() const override { return base_.dim(); }
    double eval(double r) const override { return r <= R_ ? base_.eval(r) : 0.0; }
    double integral(double a, double b, int k) const override {
        return base_.radial_integral(std::min(a, R_), std::min(b, R_), k);
    }
    double support() const override { return std::min(R_, base_.support_radius()); }
    std::vector<double> breaks() const override {
        std::vector<double> br;
        for (double r : base_.breakpoints())
            if (r <= R_) br.push_back(r);
        if (R_ < base_.support_radius()) br.push_back(R_);
        return br;
    }
    bool monotone() const override { return base_.declared_monotone(); }
    double radius() const override { return R_; }
    double s() const override { return base_.s(); }
    double delta() const override { return base_.delta(); }
    const Kernel* base() const override { return &base_; }
    std::string describe() const override {
        std::ostringstream os;
        os << "cutoff(R=" << R_ << ", " << base_.describe() << ")";
        return os.str();
    }

private:
    Kernel base_;
    double R_;
};

class Tabulated final : public KernelModel {
public:
    Tabulated(int d, std::vector<double> r, std::vector<double> v) : d_(d), r_(std::move(r)), v_(std::move(v)) {
        if (r_.size() < 2 || r_.size() != v_.size()) throw DomainError("tabulated kernel needs >= 2 matching samples");
        for (std::size_t i = 0; i < r_.size(); ++i) {
            if (!(r_[i] > 0.0)) throw DomainError("tabulated radii must be positive");
            if (i > 0 && !(r_[i] > r_[i - 1])) throw DomainError("tabulated radii must increase");
        }
        for (double r : r_) logr_.push_back(std::log(r));
    }
    Family family() const override { return Family::tabulated; }
    int dim() const override { return d_; }
    double eval(double r) const override {
        if (r < r_.front() || r > r_.back()) return 0.0;
        const auto it = std::upper_bound(r_.begin(), r_.end(), r);
        std::size_t i = std::min<std::size_t>(it - r_.begin(), r_.size() - 1);
        if (i == 0) i = 1;
        const double t = (std::log(r) - logr_[i - 1]) / (logr_[i] - logr_[i - 1]);
        return v_[i - 1] + t * (v_[i] - v_[i - 1]);
    }
    double integral(double a, double b, int k) const override {
        double total = 0.0;
        for (std::size_t i = 1; i < r_.size(); ++i) {
            const double lo = std::max(a, r_[i - 1]), hi = std::min(b, r_[i]);
            if (!(hi > lo)) continue;
            // value = A + B log r on this segment
            const double B = (v_[i] - v_[i - 1]) / (logr_[i] - logr_[i - 1]);
            const double A = v_[i - 1] - B * logr_[i - 1];
            const double kp = k + 1.0;
            auto F = [&](double r) {
                return std::pow(r, kp) * ((A + B * std::log(r)) / kp - B / (kp * kp));
            };
            total += F(hi) - F(lo);
        }
        return total;
    }
    double support() const override { return r_.back(); }
    std::vector<double> breaks() const override { return r_; }
    bool monotone() const override { return false; }
    std::string describe() const override {
        std::ostringstream os;
        os << "tabulated(" << r_.size() << " samples)";
        return os.str();
    }
    const std::vector<double>& values() const { return v_; }

private:
    int d_;
    std::vector<double> r_, v_, logr_;
};

}  // namespace
}  // namespace detail

// ---- Kernel -----------------------------------------------------------------

Kernel::Kernel(std::shared_ptr<const detail::KernelModel> model, double scale, bool normalized)
    : model_(std::move(model)), scale_(scale), normalized_(normalized) {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("kernel scale must be positive and finite");
}

Family Kernel::family() const { return model_->family(); }
int Kernel::dim() const { return model_->dim(); }

double Kernel::eval(double r) const {
    if (!(r > 0.0)) throw DomainError("kernel profile is evaluated at r > 0 only");
    return scale_ * model_->eval(r);
}

double Kernel::radial_integral(double a, double b, int k) const {
    if (a < 0.0 || std::isnan(a) || std::isnan(b)) throw DomainError("radial integral needs 0 <= a");
    if (!(b > a)) return 0.0;
    return scale_ * model_->integral(a, b, k);
}

double Kernel::support_radius() const { return model_->support(); }
std::vector<double> Kernel::breakpoints() const { return model_->breaks(); }
bool Kernel::declared_monotone() const { return model_->monotone(); }

bool Kernel::singular_at_origin() const {
    double r = 1.0;
    const auto br = breakpoints();
    if (!br.empty()) r = std::min(r, br.front());
    return std::isinf(radial_integral(0.0, r, dim() - 1));
}

double Kernel::s() const { return model_->s(); }
double Kernel::delta() const { return model_->delta(); }
double Kernel::level() const { return model_->level(); }
double Kernel::radius() const { return model_->radius(); }
const Kernel* Kernel::base() const { return model_->base(); }

std::string Kernel::describe() const {
    std::ostringstream os;
    os.precision(17);
    os << model_->describe() << " d=" << dim() << " c=" << scale_;
    return os.str();
}

Kernel Kernel::with_scale(double scale, bool normalized) const { return Kernel(model_, scale, normalized); }

// ---- names & constants ------------------------------------------------------

std::string_view to_string(Family f) {
    switch (f) {
        case Family::constant_ball: return "constant_ball";
        case Family::riesz_truncated: return "riesz_truncated";
        case Family::fractional_vanishing: return "fractional_vanishing";
        case Family::log_regularized: return "log_regularized";
        case Family::log_truncated: return "log_truncated";
        case Family::min_level: return "min_level";
        case Family::rescaled: return "rescaled";
        case Family::cutoff: return "cutoff";
        case Family::tabulated: return "tabulated";
    }
    return "unknown";
}

Family family_from_string(std::string_view name) {
    for (Family f : {Family::constant_ball, Family::riesz_truncated, Family::fractional_vanishing,
                     Family::log_regularized, Family::log_truncated, Family::min_level, Family::rescaled,
                     Family::cutoff, Family::tabulated})
        if (to_string(f) == name) return f;
    throw ConfigError("unknown kernel family '" + std::string(name) + "'");
}

double sphere_measure(int d) {
    switch (d) {
        case 1: return 2.0;
        case 2: return 2.0 * std::numbers::pi;
        case 3: return 4.0 * std::numbers::pi;
    }
    throw DomainError("dimension must be 1, 2 or 3");
}

double ball_volume(int d) { return sphere_measure(d) / d; }

// ---- factories --------------------------------------------------------------

Kernel constant_ball(int d, double c) {
    check_dim(d);
    return Kernel(std::make_shared<detail::ConstantBall>(d), c, false);
}

Kernel riesz_truncated(int d, double s) {
    check_dim(d);
    return Kernel(std::make_shared<detail::RieszTruncated>(d, s), 1.0, false);
}

Kernel fractional_vanishing(int d, double delta, bool normalize) {
    check_dim(d);
    Kernel k(std::make_shared<detail::FractionalVanishing>(d, delta), 1.0, false);
    return normalize ? normalize_first_moment(k) : k;
}

Kernel log_regularized(int d, double delta, bool normalize) {
    check_dim(d);
    Kernel k(std::make_shared<detail::LogRegularized>(d, delta), 1.0, false);
    return normalize ? normalize_first_moment(k) : k;
}

Kernel log_truncated(int d, double delta) {
    check_dim(d);
    return Kernel(std::make_shared<detail::LogTruncated>(d, delta), 2.0 * d / sphere_measure(d), true);
}

Kernel min_level(const Kernel& base, double n) {
    return Kernel(std::make_shared<detail::MinLevel>(base, n), 1.0, false);
}

Kernel rescaled(const Kernel& base, double delta) {
    return Kernel(std::make_shared<detail::Rescaled>(base, delta), 1.0, base.normalized());
}

Kernel cutoff(const Kernel& base, double R) {
    return Kernel(std::make_shared<detail::Cutoff>(base, R), 1.0, false);
}

Kernel tabulated(int d, std::vector<double> r, std::vector<double> values) {
    check_dim(d);
    return Kernel(std::make_shared<detail::Tabulated>(d, std::move(r), std::move(values)), 1.0, false);
}

Kernel constant_kernel(int d, double delta) { return rescaled(normalize_first_moment(constant_ball(d)), delta); }

// ---- moments ----------------------------------------------------------------

double partial_moments(const Kernel& k, double a, double b, int order) {
    if (order < 0) throw DomainError("moment order must be nonnegative");
    if (a < 0.0 || b < a) throw DomainError("partial moments need 0 <= a <= b");
    if (b == a) return 0.0;
    const double v = k.radial_integral(a, b, order + k.dim() - 1);
    if (std::isinf(v)) return v;
    return sphere_measure(k.dim()) * v;
}

double epsilon0(const Kernel& k) {
    double eps = 1.0;
    for (int j = 0; j < 1074; ++j) {
        const double mass = partial_moments(k, eps, 1.0, 0);
        if (mass > 0.0 && std::isfinite(mass)) return eps;
        eps *= 0.5;
    }
    throw AssumptionViolation("no dyadic radius with positive finite annulus mass");
}

MomentReport moments(const Kernel& k) {
    MomentReport rep;
    rep.m1 = partial_moments(k, 0.0, 1.0, 1);
    rep.m2 = partial_moments(k, 1.0, kInf, 0);
    if (!std::isfinite(rep.m1) || !(rep.m1 > 0.0))
        throw AssumptionViolation("first moment over the unit ball is not in (0, inf) for " + k.describe());
    if (!std::isfinite(rep.m2)) throw AssumptionViolation("tail mass beyond the unit ball diverges for " + k.describe());
    for (double R : {0.25, 0.5, 1.0, 2.0}) rep.second_moment_ball[R] = partial_moments(k, 0.0, R, 2);
    for (double R : {0.25, 0.5, 1.0, 2.0, 4.0}) rep.tail_mass[R] = partial_moments(k, R, kInf, 0);
    rep.epsilon0 = epsilon0(k);
    return rep;
}

Kernel normalize_first_moment(const Kernel& k) {
    if (k.normalized()) return k;
    const int d = k.dim();
    const double omega = sphere_measure(d);
    switch (k.family()) {
        case Family::fractional_vanishing:
            // int_{B_R}|z| w = 2 d omega R^delta for the raw family
            return k.with_scale(k.c_norm() / omega, true);
        case Family::log_regularized:
            // int_{B_R}|z| w -> omega as delta -> 0 for the raw family
            return k.with_scale(k.c_norm() * 2.0 * d / omega, true);
        case Family::log_truncated:
            return k.with_scale(k.c_norm(), true);
        case Family::rescaled:
            return rescaled(normalize_first_moment(*k.base()), k.delta()).with_scale(k.c_norm(), true);
        default: break;
    }
    const double first = partial_moments(k, 0.0, kInf, 1);
    if (!std::isfinite(first) || !(first > 0.0))
        throw AssumptionViolation("first moment is not finite and positive; cannot normalize " + k.describe());
    return k.with_scale(k.c_norm() * 2.0 * d / first, true);
}

std::optional<Kernel> with_delta(const Kernel& k, double delta) {
    switch (k.family()) {
        case Family::fractional_vanishing:
            return fractional_vanishing(k.dim(), delta, false).with_scale(k.c_norm(), k.normalized());
        case Family::log_regularized:
            return log_regularized(k.dim(), delta, false).with_scale(k.c_norm(), k.normalized());
        case Family::log_truncated:
            return log_truncated(k.dim(), delta).with_scale(k.c_norm(), k.normalized());
        case Family::rescaled:
            return rescaled(*k.base(), delta).with_scale(k.c_norm(), k.normalized());
        case Family::cutoff: {
            auto inner = with_delta(*k.base(), delta);
            if (!inner) return std::nullopt;
            return cutoff(*inner, k.radius());
        }
        default: return std::nullopt;
    }
}

AssumptionReport validate_assumptions(const Kernel& k) {
    AssumptionReport rep;
    const int d = k.dim();
    // sample the profile on a log grid up to the support (or 1e3)
    const double top = std::isinf(k.support_radius()) ? 1e3 : k.support_radius();
    std::vector<double> radii;
    for (int i = 0; i <= 2000; ++i) radii.push_back(std::exp(std::log(1e-6) + (std::log(top) - std::log(1e-6)) * i / 2000.0));
    for (double r : k.breakpoints()) {
        radii.push_back(r);
        radii.push_back(r * (1.0 - 1e-12));
    }
    std::sort(radii.begin(), radii.end());
    double prev = kInf;
    bool mono = true;
    for (double r : radii) {
        const double v = k.eval(r);
        if (v < 0.0 || std::isnan(v)) rep.nonnegative = false;
        if (v > prev * (1.0 + 1e-12) + 1e-300) mono = false;
        prev = v;
    }
    if (!rep.nonnegative) rep.notes.push_back("profile takes negative values");

    const double m1 = partial_moments(k, 0.0, 1.0, 1);
    const double m2 = partial_moments(k, 1.0, kInf, 0);
    rep.m1_finite_positive = std::isfinite(m1) && m1 > 0.0;
    rep.m2_finite = std::isfinite(m2);
    if (!rep.m1_finite_positive) rep.notes.push_back("M1 not in (0, inf)");
    if (!rep.m2_finite) rep.notes.push_back("M2 diverges");

    if (d == 1 && k.declared_monotone()) {
        rep.monotone_checked = true;
        rep.monotone = mono;
        if (!mono) rep.notes.push_back("profile declared monotone but increases somewhere");
    }

    if (with_delta(k, 0.2)) {
        for (double delta : {0.2, 0.1, 0.05, 0.025}) {
            const Kernel kd = *with_delta(k, delta);
            LadderRow row;
            row.delta = delta;
            row.first_moment = partial_moments(kd, 0.0, 1.0, 1);
            row.tail_mass = partial_moments(kd, 1.0, kInf, 0);
            row.second_moment = partial_moments(kd, 0.0, 1.0, 2);
            rep.ladder.push_back(row);
        }
        for (std::size_t i = 1; i < rep.ladder.size(); ++i) {
            if (rep.ladder[i].tail_mass > rep.ladder[i - 1].tail_mass) rep.ladder_tail_decreasing = false;
            if (!(rep.ladder[i].second_moment < rep.ladder[i - 1].second_moment))
                rep.ladder_second_moment_decreasing = false;
        }
        if (k.normalized()) {
            const double last = rep.ladder.back().first_moment;
            rep.ladder_first_moment_near_2d = std::abs(last - 2.0 * d) <= 0.01 * 2.0 * d;
            if (!rep.ladder_first_moment_near_2d) rep.notes.push_back("first moment not within 1% of 2d at delta=0.025");
        } else {
            rep.notes.push_back("raw delta-family: first-moment limit not checked against 2d");
        }
    }
    return rep;
}

Kernel make_kernel(const KernelConfig& cfg) {
    const Family fam = family_from_string(cfg.family);
    const bool norm_default = fam == Family::fractional_vanishing || fam == Family::log_regularized ||
                              fam == Family::log_truncated || fam == Family::rescaled;
    const bool normalize = cfg.normalize.value_or(norm_default);
    Kernel k = [&]() -> Kernel {
        switch (fam) {
            case Family::constant_ball: return constant_ball(cfg.d);
            case Family::riesz_truncated: return riesz_truncated(cfg.d, cfg.s);
            case Family::fractional_vanishing: return fractional_vanishing(cfg.d, cfg.delta, false);
            case Family::log_regularized: return log_regularized(cfg.d, cfg.delta, false);
            case Family::log_truncated: return log_truncated(cfg.d, cfg.delta);
            case Family::min_level: return min_level(riesz_truncated(cfg.d, cfg.s), cfg.level);
            case Family::rescaled: return constant_kernel(cfg.d, cfg.delta);
            case Family::cutoff:
            case Family::tabulated: break;
        }
        throw ConfigError("kernel.family=" + cfg.family + " cannot be built from flat config");
    }();
    if (normalize) k = normalize_first_moment(k);
    if (cfg.cutoff) k = cutoff(k, *cfg.cutoff);
    return k;
}

}  // namespace hsnl
