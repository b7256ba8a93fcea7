#pragma once

#include <string>
#include <vector>

#include "msmhd/ensemble.hpp"

namespace msmhd {

// ---------------------------------------------------------------------------
// Discrete Ito energy balance.  Per step,
//   r_n = 1/2 (||Th_{n+1}||^2 - ||Th_n||^2) + kappa dt/2 (||grad Th_n||^2 +
//         ||grad Th_{n+1}||^2) - 1/2 ||sigma||^2 dt - <sigma dW_n, Th_n>;
// advection contributes nothing (discrete skew symmetry).
// ---------------------------------------------------------------------------

struct EnergyResidualReport {
    std::vector<double> t;
    std::vector<double> residual;
    double max_abs = 0.0;
    double mean_abs = 0.0;
};

/// Requires a record with every-step rows (record_every == 1) carrying the
/// noise inner products; throws std::invalid_argument otherwise.
EnergyResidualReport energy_residual(const EnsembleRecord& ens, std::size_t traj_index,
                                     double kappa, double sigma_sq, double dt);

// ---------------------------------------------------------------------------
// Exponential martingale tail: P(sup_t (N_t - gamma/2 <N>_t) >= K) <= e^{-gamma K}.
// ---------------------------------------------------------------------------

struct TailRow {
    double K = 0.0;
    double empirical = 0.0;
    double bound = 0.0;       // e^{-gamma K}
    double std_error = 0.0;   // binomial s.e. of the bound at this sample size
    bool ok = false;          // empirical <= bound + 3 s.e.
};

/// Closed-form oracle: N is a standard Brownian motion, <N>_t = t, simulated
/// on [0, T] with step dt; the bound holds with equality as T -> infinity.
std::vector<TailRow> martingale_tail_brownian(double gamma, const std::vector<double>& K_grid,
                                              int n_traj, double T, double dt,
                                              std::uint64_t seed);

/// Temperature martingale of the full system,
///   N_t = (2C/(kappa nu)) int_0^t <sigma, Theta> dW  (C := 1),
/// along simulated paths.  gamma must satisfy gamma <= kappa^2 nu /
/// (4 C ||sigma||^2) (quadratic-variation constraint);
/// violations raise std::invalid_argument.
std::vector<TailRow> martingale_tail_full(double gamma, const std::vector<double>& K_grid,
                                          int n_traj, const GridPtr& grid, const PhysParams& p,
                                          const StepConfig& cfg, const NoiseConfig& noise,
                                          const FullInitSpec& init, double T, int n_threads = 0);

// ---------------------------------------------------------------------------
// Probabilistic Gronwall series.
// ---------------------------------------------------------------------------

/// Evaluates sum_{k>=1} [k T' + C k^2 (eps+delta)(1 + sigma_sq_t)]^gamma *
/// exp(gamma C t k - (1-gamma) eta k) to relative precision 1e-10 via
/// geometric tail truncation.  Requires 0 < gamma < eta/(eta + C t).
double gronwall_series_bound(double T_const, double C, double eps_plus_delta, double sigma_sq_t,
                             double eta, double t, double gamma);

// ---------------------------------------------------------------------------
// Moment report: empirical exponential moments against the appendix bounds,
// with unquantified constants fit on the data and reported.
// ---------------------------------------------------------------------------

struct MomentCheck {
    std::string name;
    double lhs = 0.0;       // empirical exponential moment
    double rhs = 0.0;       // bound right-hand side with C := 1
    double fitted_C = 0.0;  // smallest constant making lhs <= C rhs
    bool saturated = false; // exponential moment overflowed
    bool ok = false;        // finite and fit succeeded
};

struct MomentReport {
    std::vector<MomentCheck> checks;
};

/// eta must not exceed the configured policy value; pass the ensemble that
/// was run with every-step summaries (any record cadence works given the
/// running summaries).  Limit ensembles produce the L^p / H^1 moment checks;
/// full-system ensembles additionally produce the decaying-weight check and
/// the eps-uniform stationary combination.
MomentReport moment_report(const EnsembleRecord& ens, const PhysParams& p,
                           const NoiseConfig& noise, double eta, double horizon);

}  // namespace msmhd
