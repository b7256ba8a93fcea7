#pragma once

#include <vector>

#include "msmhd/stepper.hpp"

namespace msmhd {

/// A stored limit-equation trajectory used to freeze the drift when
/// integrating variation equations: theta[n] is the state at t0 + n dt.
struct ThetaPath {
    double t0 = 0.0;
    double dt = 1e-3;
    std::vector<SpectralScalar> theta;

    double t_end() const { return t0 + dt * (theta.empty() ? 0 : theta.size() - 1); }
    /// Index of time t; throws std::invalid_argument when t is not a stored
    /// node (relative tolerance 1e-9 on the step fraction).
    std::size_t index_of(double t) const;
};

/// Runs the stepper forward n_steps from `initial`, storing every state.
/// When `noise` is non-null the increments are drawn from it with the given
/// trajectory key; otherwise the path is deterministic.
ThetaPath record_theta_path(LimitStepper& stepper, LimitState initial, const NoiseConfig* noise,
                            std::uint64_t traj, std::size_t n_steps);

/// First variation J_{s,t} xi: solves the linearization of the limit
/// equation along the frozen path,
///   d zeta/dt + M_u(zeta).grad theta + M_u(theta).grad zeta = kappa Lap zeta,
/// with zeta(s) = xi.  The discretization is the exact derivative of the
/// discrete flow map, so finite differences of the flow converge to it at
/// rate O(h).
SpectralScalar first_variation(LimitStepper& stepper, const ThetaPath& path,
                               const SpectralScalar& xi, double s, double t);

/// Second variation J^2_{s,t}(xi, xi2): zero initial data, sources
/// M_u(J xi).grad J xi2 + M_u(J xi2).grad J xi; bilinear and symmetric.
SpectralScalar second_variation(LimitStepper& stepper, const ThetaPath& path,
                                const SpectralScalar& xi, const SpectralScalar& xi2, double s,
                                double t);

}  // namespace msmhd
