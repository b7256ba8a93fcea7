#include "msmhd/field.hpp"

#include <fftw3.h>

#include <cassert>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace msmhd {

SpectralScalar& SpectralScalar::operator+=(const SpectralScalar& o) {
    assert(compatible(o));
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
}

SpectralScalar& SpectralScalar::operator-=(const SpectralScalar& o) {
    assert(compatible(o));
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
}

SpectralScalar& SpectralScalar::operator*=(double s) {
    for (auto& v : c_) v *= s;
    return *this;
}

void SpectralScalar::axpy(double a, const SpectralScalar& x) {
    assert(compatible(x));
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += a * x.c_[i];
}

void SpectralScalar::set_zero() {
    for (auto& v : c_) v = Complex{0.0, 0.0};
}

void SpectralScalar::apply_dealias_mask() {
    for (std::size_t i = 0; i < c_.size(); ++i)
        if (!grid_->dealias_keep(i)) c_[i] = Complex{0.0, 0.0};
}

void SpectralScalar::enforce_hermitian() {
    for (std::size_t i : grid_->half_modes()) {
        const std::size_t j = grid_->conjugate_index(i);
        const Complex avg = 0.5 * (c_[i] + std::conj(c_[j]));
        c_[i] = avg;
        c_[j] = std::conj(avg);
    }
}

double SpectralScalar::hermitian_defect() const {
    double worst = 0.0;
    for (std::size_t i : grid_->half_modes()) {
        const std::size_t j = grid_->conjugate_index(i);
        worst = std::max(worst, std::abs(c_[i] - std::conj(c_[j])));
    }
    return worst;
}

SpectralVector& SpectralVector::operator+=(const SpectralVector& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    solenoidal = solenoidal && o.solenoidal;
    return *this;
}

SpectralVector& SpectralVector::operator-=(const SpectralVector& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    solenoidal = solenoidal && o.solenoidal;
    return *this;
}

SpectralVector& SpectralVector::operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
}

void SpectralVector::axpy(double a, const SpectralVector& o) {
    x.axpy(a, o.x);
    y.axpy(a, o.y);
    z.axpy(a, o.z);
    solenoidal = solenoidal && o.solenoidal;
}

void SpectralVector::set_zero() {
    x.set_zero();
    y.set_zero();
    z.set_zero();
}

namespace {
// FFTW plan creation/destruction is not thread safe.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

Transform::Transform(GridPtr grid) : grid_(std::move(grid)), buf_(grid_->size()) {
    const int n = grid_->n();
    std::lock_guard<std::mutex> lock(planner_mutex());
    auto* raw = reinterpret_cast<fftw_complex*>(buf_.data());
    plan_fwd_ = fftw_plan_dft_3d(n, n, n, raw, raw, FFTW_FORWARD, FFTW_ESTIMATE);
    plan_bwd_ = fftw_plan_dft_3d(n, n, n, raw, raw, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!plan_fwd_ || !plan_bwd_) throw std::runtime_error("Transform: fftw plan creation failed");
}

Transform::~Transform() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

void Transform::inverse(const SpectralScalar& f, std::vector<double>& phys,
                        double* imag_max) const {
    assert(f.grid() && *f.grid() == *grid_);
    std::copy(f.data(), f.data() + f.size(), buf_.begin());
    fftw_execute(static_cast<fftw_plan>(plan_bwd_));
    phys.resize(buf_.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < buf_.size(); ++i) {
        phys[i] = buf_[i].real();
        if (imag_max) worst = std::max(worst, std::abs(buf_[i].imag()));
    }
    if (imag_max) *imag_max = worst;
}

void Transform::forward(const std::vector<double>& phys, SpectralScalar& out) const {
    assert(phys.size() == grid_->size());
    for (std::size_t i = 0; i < phys.size(); ++i) buf_[i] = Complex{phys[i], 0.0};
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    if (!out.grid() || !(*out.grid() == *grid_)) out = SpectralScalar(grid_);
    const double scale = 1.0 / static_cast<double>(grid_->size());
    for (std::size_t i = 0; i < buf_.size(); ++i)
        out[i] = grid_->dealias_keep(i) ? scale * buf_[i] : Complex{0.0, 0.0};
}

}  // namespace msmhd
