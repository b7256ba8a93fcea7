#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "msmhd/noise.hpp"
#include "msmhd/ops.hpp"
#include "msmhd/state.hpp"

namespace msmhd {

// Time discretization (shared by every system here): integrating-factor
// Euler.  With L the per-mode linear block and N the dealiased nonlinear
// terms,
//
//     x^{n+1} = e^{dt L} ( x^n + dt N(x^n) + dW^n ),
//
// where e^{dt L} is exact (scalar factor for theta, matrix exponential for
// the coupled (U,B,Theta) block).  The stiff 1/eps, 1/delta couplings sit
// entirely inside e^{dt L}, so the scheme is stable for eps, delta -> 0 and
// its limit as eps, delta -> 0 is precisely the limit-equation scheme; the
// same dW can then drive both systems when comparing them.

/// Integrator for the limit active scalar equation: u = M_u theta computed
/// mode-wise, advection pseudo-spectral, diffusion exact.
class LimitStepper {
  public:
    LimitStepper(GridPtr grid, const PhysParams& p, const StepConfig& cfg);

    /// Advance one step; dW is the (possibly zero) noise increment on theta.
    /// Records <dW, theta^n> in last_noise_ip() before updating.
    void step(LimitState& s, const SpectralScalar& dW);
    void step_deterministic(LimitState& s);

    const PhysParams& params() const { return p_; }
    const StepConfig& config() const { return cfg_; }
    const GridPtr& grid() const { return grid_; }
    SpectralWorkspace& workspace() { return ws_; }
    double last_noise_ip() const { return last_noise_ip_; }

    /// u = M_u theta (constitutive velocity for the current theta).
    SpectralVector velocity(const SpectralScalar& theta) const;

    /// One linearized (first-variation) step along a frozen theta:
    /// zeta <- E (zeta - dt [adv(M_u zeta, theta) + adv(M_u theta, zeta)] + dt source).
    void step_linearized(SpectralScalar& zeta, const SpectralScalar& theta,
                         const SpectralScalar* extra_source = nullptr);

    std::size_t steps_taken() const { return steps_; }

  private:
    GridPtr grid_;
    PhysParams p_;
    StepConfig cfg_;
    SpectralWorkspace ws_;
    std::vector<double> decay_;  // e^{-kappa |k|^2 dt}
    std::vector<Vec3> mu_;       // M_u symbol per active mode
    double last_noise_ip_ = 0.0;
    std::size_t steps_ = 0;
};

/// Integrator for the full MHD system.  The (U, B, Theta) linear coupling is
/// advanced by a precomputed exact 5x5 propagator per mode (two
/// divergence-free velocity components, two magnetic, one temperature).
class FullStepper {
  public:
    FullStepper(GridPtr grid, const PhysParams& p, const StepConfig& cfg);
    ~FullStepper();

    void step(FullState& s, const SpectralScalar& dW);
    void step_deterministic(FullState& s);

    const PhysParams& params() const { return p_; }
    const StepConfig& config() const { return cfg_; }
    const GridPtr& grid() const { return grid_; }
    SpectralWorkspace& workspace() { return ws_; }
    double last_noise_ip() const { return last_noise_ip_; }
    std::size_t steps_taken() const { return steps_; }

  private:
    struct ModeTables;
    GridPtr grid_;
    PhysParams p_;
    StepConfig cfg_;
    SpectralWorkspace ws_;
    std::unique_ptr<ModeTables> tables_;
    double last_noise_ip_ = 0.0;
    std::size_t steps_ = 0;
};

// ---------------------------------------------------------------------------
// Corrector systems: well-posed approximations accurate up to t = 0.
// ---------------------------------------------------------------------------

/// Stage one (magnetic diffusion treated as instantaneous): theta_eps is
/// prognostic, u_eps = Q^{-1} P e3 theta_eps + layer with the initial layer
/// layer(t) = e^{-tQ/eps} (U(0) - Q^{-1} P e3 Theta(0)) advanced exactly.
struct CorrectorOneState {
    SpectralScalar theta;
    SpectralVector layer_u;
    double time = 0.0;
};

/// Stage two: u2 prognostic, magnetic field slaved as
/// b = (-Delta)^{-1}(b0.grad)u2 + layer_b with layer_b(t) = e^{t Delta/delta} G(0),
/// G(0) = B(0) - (-Delta)^{-1}(b0.grad)U(0); theta2 prognostic and advected
/// by u2.  Stage one is co-evolved to supply the advecting velocity u_eps of
/// the u2 equation.
struct CorrectorTwoState {
    CorrectorOneState stage1;
    SpectralVector u2;
    SpectralVector layer_b;
    SpectralScalar theta2;
    double time = 0.0;
};

class CorrectorStepper {
  public:
    CorrectorStepper(GridPtr grid, const PhysParams& p, const StepConfig& cfg);
    ~CorrectorStepper();

    CorrectorOneState init_stage_one(const SpectralVector& U0, const SpectralScalar& Theta0) const;
    CorrectorTwoState init_stage_two(const SpectralVector& U0, const SpectralVector& B0,
                                     const SpectralScalar& Theta0) const;

    /// u_eps(t) = Q^{-1} P e3 theta_eps(t) + layer_u(t).
    SpectralVector stage_one_velocity(const CorrectorOneState& s) const;
    /// b_{eps,delta}(t) = (-Delta)^{-1}(b0.grad) u2 + layer_b(t).
    SpectralVector stage_two_magnetic(const CorrectorTwoState& s) const;

    void step_stage_one(CorrectorOneState& s, const SpectralScalar& dW);
    void step_stage_two(CorrectorTwoState& s, const SpectralScalar& dW);

    const GridPtr& grid() const { return grid_; }
    const PhysParams& params() const { return p_; }

  private:
    struct Tables;
    GridPtr grid_;
    PhysParams p_;
    StepConfig cfg_;
    SpectralWorkspace ws_;
    std::unique_ptr<Tables> tables_;
};

}  // namespace msmhd
