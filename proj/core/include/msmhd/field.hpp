#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "msmhd/grid.hpp"

namespace msmhd {

using Complex = std::complex<double>;
using GridPtr = std::shared_ptr<const Grid>;

/// Scalar field in spectral representation: one complex coefficient per
/// lattice mode, FFT index order, convention f(x) = sum_k fhat(k) e^{i k.x}.
///
/// Invariants (maintained by every operation in this library):
///   fhat(-k) = conj(fhat(k))  (real field),  fhat(0) = 0  (mean free).
class SpectralScalar {
  public:
    SpectralScalar() = default;
    explicit SpectralScalar(GridPtr grid)
        : grid_(std::move(grid)), c_(grid_->size(), Complex{0.0, 0.0}) {}

    const GridPtr& grid() const { return grid_; }
    std::size_t size() const { return c_.size(); }

    Complex& operator[](std::size_t flat) { return c_[flat]; }
    const Complex& operator[](std::size_t flat) const { return c_[flat]; }
    Complex& at(const Wavevector& k) { return c_[grid_->flat_index(k)]; }
    const Complex& at(const Wavevector& k) const { return c_[grid_->flat_index(k)]; }

    Complex* data() { return c_.data(); }
    const Complex* data() const { return c_.data(); }

    SpectralScalar& operator+=(const SpectralScalar& o);
    SpectralScalar& operator-=(const SpectralScalar& o);
    SpectralScalar& operator*=(double s);
    void axpy(double a, const SpectralScalar& x);  // this += a*x
    void set_zero();

    /// Zeroes every mode outside the grid's retained set (2/3 rule + mean).
    void apply_dealias_mask();
    /// Replaces coefficients by their Hermitian-symmetric part.
    void enforce_hermitian();
    /// max_k |fhat(-k) - conj(fhat(k))|, a reality defect measure.
    double hermitian_defect() const;

    bool compatible(const SpectralScalar& o) const { return grid_ && o.grid_ && *grid_ == *o.grid_; }

  private:
    GridPtr grid_;
    std::vector<Complex> c_;
};

/// Three-component vector field; `solenoidal` records that the producer
/// guarantees k.vhat(k) = 0 on every mode.
struct SpectralVector {
    SpectralVector() = default;
    explicit SpectralVector(GridPtr grid)
        : x(grid), y(grid), z(grid) {}

    SpectralScalar x, y, z;
    bool solenoidal = false;

    const GridPtr& grid() const { return x.grid(); }
    SpectralScalar& comp(int i) { return i == 0 ? x : (i == 1 ? y : z); }
    const SpectralScalar& comp(int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    SpectralVector& operator+=(const SpectralVector& o);
    SpectralVector& operator-=(const SpectralVector& o);
    SpectralVector& operator*=(double s);
    void axpy(double a, const SpectralVector& o);  // this += a*o
    void set_zero();
};

/// FFT workspace bound to one grid.  Each concurrent caller owns its own
/// instance; execution does not touch shared mutable state (FFTW plan
/// creation is serialized internally).
class Transform {
  public:
    explicit Transform(GridPtr grid);
    ~Transform();
    Transform(const Transform&) = delete;
    Transform& operator=(const Transform&) = delete;

    const GridPtr& grid() const { return grid_; }

    /// Spectral -> physical point values on the n^3 collocation grid.
    /// Writes the real part; when imag_max is non-null, reports the largest
    /// |imaginary part| encountered (reality diagnostic).
    void inverse(const SpectralScalar& f, std::vector<double>& phys,
                 double* imag_max = nullptr) const;

    /// Physical -> spectral with 1/n^3 normalization; the result is passed
    /// through the grid's dealias mask.
    void forward(const std::vector<double>& phys, SpectralScalar& out) const;

  private:
    GridPtr grid_;
    mutable std::vector<Complex> buf_;
    void* plan_fwd_;  // fftw_plan
    void* plan_bwd_;
};

}  // namespace msmhd
