#pragma once

#include <stdexcept>
#include <vector>

#include "msmhd/field.hpp"
#include "msmhd/params.hpp"

namespace msmhd {

/// Raised when a per-mode constitutive solve degenerates; the driving
/// operator is positive definite on mean-free fields, so this indicates
/// corrupted inputs rather than an expected branch.
struct NumericalDegeneracyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Constitutive Fourier multipliers.
//
//   D(k)    = |k|^2 (omega.k)^2 + ((b0.k)^2 + nu |k|^4)^2
//   Mu(k)   = [ (nu|k|^4 + (b0.k)^2) (k x (e3 x k)) + (omega.k)|k|^2 (e3 x k) ] / D(k)
//   Mb(k)   = i (b0.k)/|k|^2 * Mu(k)
//
// Mu is real and even in k; the Mb prefactor is imaginary and odd, so both
// multipliers preserve reality of the underlying fields.
// ---------------------------------------------------------------------------

double symbol_D(const Wavevector& k, const PhysParams& p);
Vec3 symbol_Mu(const Wavevector& k, const PhysParams& p);
/// Real prefactor g(k) = (b0.k)/|k|^2 with Mb(k) = i g(k) Mu(k).
double symbol_Mb_factor(const Wavevector& k, const PhysParams& p);

/// Measured suprema of the smoothing estimates over 1 <= |k| <= kmax.
struct SymbolScan {
    double sup_mu_k2 = 0.0;  // sup |Mu(k)| |k|^2
    double sup_mb_k3 = 0.0;  // sup |Mb(k)| |k|^3
    double sup_mu_h1 = 0.0;  // sup |Mu(k)| |k|   (H^1 constant of the lift)
    double sup_mb_h1 = 0.0;  // sup |Mb(k)| |k|
};
SymbolScan scan_symbol_bounds(int kmax, const PhysParams& p);

// ---------------------------------------------------------------------------
// Mode-wise linear operators.
// ---------------------------------------------------------------------------

/// Leray projection, per mode vhat -> vhat - k (k.vhat)/|k|^2.
SpectralVector leray_project(const SpectralVector& v);

/// u = Mu theta, b = Mb theta via the closed-form symbols.
void apply_constitutive(const SpectralScalar& theta, const PhysParams& p, SpectralVector& u,
                        SpectralVector& b);

/// u = Q^{-1} P e3 theta via an independent per-mode solve of
///   nu|k|^2 u + P_k(omega x u) + ((b0.k)^2/|k|^2) u = P_k e3 theta
/// in the two-dimensional divergence-free subspace of each mode.
SpectralVector apply_Q_inverse_drive(const SpectralScalar& theta, const PhysParams& p);

/// b = (-Delta)^{-1} (b0 . grad) Q^{-1} P e3 theta, routed through the
/// Q-solve (not the closed-form symbol), so it cross-checks apply_constitutive.
SpectralVector apply_R(const SpectralScalar& theta, const PhysParams& p);

/// d/dx_axis in spectral space: (i k_axis) shat(k).
SpectralScalar partial_derivative(const SpectralScalar& s, int axis);

/// max_k |k . vhat(k)| (absolute solenoidality defect).
double max_divergence(const SpectralVector& v);

// ---------------------------------------------------------------------------
// Pseudo-spectral advection.
// ---------------------------------------------------------------------------

/// Scratch buffers for pseudo-spectral products; one per concurrent caller.
class SpectralWorkspace {
  public:
    explicit SpectralWorkspace(GridPtr grid) : tf_(std::move(grid)) {}
    Transform& transform() { return tf_; }
    const GridPtr& grid() const { return tf_.grid(); }

    std::vector<double>& scratch(int slot);

  private:
    Transform tf_;
    std::vector<std::vector<double>> bufs_;
};

/// v.grad(s) computed in physical space, 2/3-dealiased, mean free.
/// Requires v divergence-free (asserted via flag in debug paths).
SpectralScalar advect(const SpectralVector& v, const SpectralScalar& s, SpectralWorkspace& ws);
SpectralVector advect(const SpectralVector& v, const SpectralVector& s, SpectralWorkspace& ws);

// ---------------------------------------------------------------------------
// Norms and inner products.
//
// Normalization: fields live on [0,2pi)^3 and fhat carries the 1/n^3 forward
// scaling, so Parseval reads ||f||_{L2}^2 = (2pi)^3 sum_k |fhat(k)|^2 and the
// physical quadrature weight is (2pi/n)^3.  (Fixed here once; everything
// else derives from it.)
// ---------------------------------------------------------------------------

double norm_l2(const SpectralScalar& f);
double norm_l2(const SpectralVector& v);
/// Homogeneous Sobolev norm, |k|^{2s}-weighted Parseval sum.
double norm_hs(const SpectralScalar& f, double s);
double norm_hs(const SpectralVector& v, double s);
/// L^p by physical-space quadrature on the collocation grid; p >= 1.
double norm_lp(const SpectralScalar& f, double p, SpectralWorkspace& ws);
/// L^2 by physical-space quadrature (independent route vs. Parseval).
double norm_l2_quadrature(const SpectralScalar& f, SpectralWorkspace& ws);

double inner_l2(const SpectralScalar& a, const SpectralScalar& b);
double inner_l2(const SpectralVector& a, const SpectralVector& b);

}  // namespace msmhd
