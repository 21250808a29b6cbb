#include <cmath>
#include <complex>
#include <mutex>

#include <fftw3.h>

#include "hsnl/errors.hpp"
#include "hsnl/operators.hpp"
#include "hsnl/parallel.hpp"
#include "hsnl/symbols.hpp"

namespace hsnl {

namespace {

// FFTW planning is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

class RealTransform {
public:
    explicit RealTransform(const std::vector<int>& shape) : shape_(shape) {
        n_real_ = 1;
        for (int s : shape_) n_real_ *= s;
        n_complex_ = n_real_ / shape_.back() * (shape_.back() / 2 + 1);
        real_ = fftw_alloc_real(n_real_);
        spec_ = fftw_alloc_complex(n_complex_);
        std::lock_guard lock(planner_mutex());
        const int rank = static_cast<int>(shape_.size());
        fwd_ = fftw_plan_dft_r2c(rank, shape_.data(), real_, spec_, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r(rank, shape_.data(), spec_, real_, FFTW_ESTIMATE);
    }
    ~RealTransform() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(real_);
        fftw_free(spec_);
    }
    RealTransform(const RealTransform&) = delete;
    RealTransform& operator=(const RealTransform&) = delete;

    std::vector<cplx> forward(const std::vector<double>& in) {
        std::copy(in.begin(), in.end(), real_);
        fftw_execute(fwd_);
        std::vector<cplx> out(n_complex_);
        for (std::size_t i = 0; i < n_complex_; ++i) out[i] = {spec_[i][0], spec_[i][1]};
        return out;
    }
    std::vector<double> backward(const std::vector<cplx>& in) {
        for (std::size_t i = 0; i < n_complex_; ++i) {
            spec_[i][0] = in[i].real();
            spec_[i][1] = in[i].imag();
        }
        fftw_execute(bwd_);
        std::vector<double> out(real_, real_ + n_real_);
        for (auto& v : out) v /= static_cast<double>(n_real_);
        return out;
    }
    std::size_t complex_size() const { return n_complex_; }

private:
    std::vector<int> shape_;
    std::size_t n_real_ = 0, n_complex_ = 0;
    double* real_ = nullptr;
    fftw_complex* spec_ = nullptr;
    fftw_plan fwd_{}, bwd_{};
};

// Half-spectrum mode index -> integer wave numbers (signed) and Nyquist flags.
struct Mode {
    std::vector<int> k;
    std::vector<bool> nyquist;
    double weight;  // multiplicity in the full spectrum
};

Mode mode_of(std::size_t flat, const std::vector<int>& shape) {
    const int rank = static_cast<int>(shape.size());
    Mode m;
    m.k.resize(rank);
    m.nyquist.resize(rank);
    std::size_t rem = flat;
    const int last_half = shape.back() / 2 + 1;
    for (int ax = rank - 1; ax >= 0; --ax) {
        const int extent = ax == rank - 1 ? last_half : shape[ax];
        const int idx = static_cast<int>(rem % extent);
        rem /= extent;
        const int n = shape[ax];
        m.k[ax] = (ax == rank - 1 || idx <= n / 2) ? idx : idx - n;
        m.nyquist[ax] = (idx == n / 2);
    }
    const int kl = m.k.back();
    m.weight = (kl == 0 || kl == shape.back() / 2) ? 1.0 : 2.0;
    return m;
}

// Symbol multiplier for a half-spectrum mode. Nyquist axes are averaged over the two
// aliases of the frequency so that the multiplied spectrum stays Hermitian.
std::vector<cplx> multiplier(const Kernel& w, std::span<const double> nu, const Mode& m,
                             const std::vector<double>& box) {
    const int d = static_cast<int>(m.k.size());
    std::vector<cplx> acc(d, 0.0);
    int variants = 1;
    for (int ax = 0; ax < d; ++ax)
        if (m.nyquist[ax] && m.k[ax] != 0) variants *= 2;
    for (int v = 0; v < variants; ++v) {
        std::vector<double> xi(d);
        int bit = 0;
        for (int ax = 0; ax < d; ++ax) {
            double sgn = 1.0;
            if (m.nyquist[ax] && m.k[ax] != 0) sgn = ((v >> bit++) & 1) ? -1.0 : 1.0;
            xi[ax] = sgn * m.k[ax] / box[ax];
        }
        const auto s = symbol(w, nu, xi);
        for (int c = 0; c < d; ++c) acc[c] += s.value[c];
    }
    for (auto& a : acc) a /= static_cast<double>(variants);
    return acc;
}

void check_field(const Kernel& w, const SampledField& f) {
    const int d = w.dim();
    if (static_cast<int>(f.shape.size()) != d || static_cast<int>(f.box.size()) != d)
        throw DomainError("field dimension does not match kernel");
    if (f.components != 1) throw DomainError("spectral gradient takes a scalar field");
    for (int s : f.shape)
        if (!power_of_two(s) || s < 2) throw DomainError("grid sizes must be powers of two");
    if (f.values.size() != f.points()) throw DomainError("field value count does not match the grid");
}

struct Multiplied {
    std::vector<std::vector<cplx>> spectra;  // per component
    std::vector<cplx> u_hat;
    std::vector<Mode> modes;
};

Multiplied multiply(const Kernel& w, std::span<const double> nu, const SampledField& f, RealTransform& t) {
    Multiplied out;
    out.u_hat = t.forward(f.values);
    const std::size_t nc = t.complex_size();
    out.modes.resize(nc);
    for (std::size_t i = 0; i < nc; ++i) out.modes[i] = mode_of(i, f.shape);
    std::vector<std::vector<cplx>> mult(nc);
    parallel_for(static_cast<std::ptrdiff_t>(nc), [&](std::ptrdiff_t i) {
        bool zero = true;
        for (int k : out.modes[i].k) zero = zero && k == 0;
        mult[i] = zero ? std::vector<cplx>(f.shape.size(), 0.0) : multiplier(w, nu, out.modes[i], f.box);
    });
    const int d = static_cast<int>(f.shape.size());
    out.spectra.assign(d, std::vector<cplx>(nc));
    for (std::size_t i = 0; i < nc; ++i)
        for (int c = 0; c < d; ++c) out.spectra[c][i] = mult[i][c] * out.u_hat[i];
    return out;
}

}  // namespace

std::size_t SampledField::points() const {
    std::size_t n = 1;
    for (int s : shape) n *= static_cast<std::size_t>(s);
    return n;
}

std::vector<double> SampledField::point(std::size_t flat) const {
    std::vector<double> x(shape.size());
    for (int ax = static_cast<int>(shape.size()) - 1; ax >= 0; --ax) {
        const std::size_t idx = flat % shape[ax];
        flat /= shape[ax];
        x[ax] = box[ax] * static_cast<double>(idx) / shape[ax];
    }
    return x;
}

SampledField gradient_spectral(const Kernel& w, std::span<const double> nu, const SampledField& field) {
    check_field(w, field);
    RealTransform t(field.shape);
    const auto m = multiply(w, nu, field, t);

    // energy share of the top third of each axis
    double total = 0.0, top = 0.0;
    for (std::size_t i = 0; i < m.u_hat.size(); ++i) {
        const double e = m.modes[i].weight * std::norm(m.u_hat[i]);
        total += e;
        bool high = false;
        for (std::size_t ax = 0; ax < field.shape.size(); ++ax)
            high = high || std::abs(m.modes[i].k[ax]) > field.shape[ax] / 3;
        if (high) top += e;
    }

    const int d = static_cast<int>(field.shape.size());
    SampledField out;
    out.box = field.box;
    out.shape = field.shape;
    out.components = d;
    out.values.assign(field.points() * d, 0.0);
    out.aliasing_warning = total > 0.0 && top > 0.01 * total;
    for (int c = 0; c < d; ++c) {
        const auto comp = t.backward(m.spectra[c]);
        for (std::size_t i = 0; i < comp.size(); ++i) out.values[i * d + c] = comp[i];
    }
    return out;
}

double spectral_energy(const Kernel& w, std::span<const double> nu, const SampledField& field) {
    check_field(w, field);
    RealTransform t(field.shape);
    const auto m = multiply(w, nu, field, t);
    const double n = static_cast<double>(field.points());
    double cell = 1.0;
    for (std::size_t ax = 0; ax < field.shape.size(); ++ax) cell *= field.box[ax] / field.shape[ax];
    double e = 0.0;
    for (const auto& spec : m.spectra)
        for (std::size_t i = 0; i < spec.size(); ++i) e += m.modes[i].weight * std::norm(spec[i]);
    return cell * e / n;
}

}  // namespace hsnl
