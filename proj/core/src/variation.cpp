#include "msmhd/variation.hpp"

#include <cmath>
#include <stdexcept>

namespace msmhd {

std::size_t ThetaPath::index_of(double t) const {
    const double frac = (t - t0) / dt;
    const double rounded = std::round(frac);
    if (std::abs(frac - rounded) > 1e-9 * std::max(1.0, std::abs(frac)))
        throw std::invalid_argument("ThetaPath: time is not a stored node");
    if (rounded < 0 || rounded >= static_cast<double>(theta.size()))
        throw std::invalid_argument("ThetaPath: time outside the stored path");
    return static_cast<std::size_t>(rounded);
}

ThetaPath record_theta_path(LimitStepper& stepper, LimitState initial, const NoiseConfig* noise,
                            std::uint64_t traj, std::size_t n_steps) {
    ThetaPath path;
    path.t0 = initial.time;
    path.dt = stepper.config().dt;
    path.theta.reserve(n_steps + 1);
    path.theta.push_back(initial.theta);
    LimitState s = std::move(initial);
    const SpectralScalar zero(stepper.grid());
    for (std::size_t n = 0; n < n_steps; ++n) {
        if (noise) {
            stepper.step(s, sample_increment(*noise, stepper.grid(), stepper.config().dt, n, traj));
        } else {
            stepper.step(s, zero);
        }
        path.theta.push_back(s.theta);
    }
    return path;
}

SpectralScalar first_variation(LimitStepper& stepper, const ThetaPath& path,
                               const SpectralScalar& xi, double s, double t) {
    if (!(s < t)) throw std::invalid_argument("first_variation: requires s < t");
    const std::size_t is = path.index_of(s), it = path.index_of(t);
    SpectralScalar zeta = xi;
    for (std::size_t n = is; n < it; ++n) stepper.step_linearized(zeta, path.theta[n]);
    return zeta;
}

SpectralScalar second_variation(LimitStepper& stepper, const ThetaPath& path,
                                const SpectralScalar& xi, const SpectralScalar& xi2, double s,
                                double t) {
    if (!(s < t)) throw std::invalid_argument("second_variation: requires s < t");
    const std::size_t is = path.index_of(s), it = path.index_of(t);
    SpectralScalar z1 = xi, z2 = xi2;
    SpectralScalar zz(xi.grid());
    SpectralWorkspace& ws = stepper.workspace();
    for (std::size_t n = is; n < it; ++n) {
        const SpectralScalar& th = path.theta[n];
        // source = -(M_u(J xi).grad J xi2 + M_u(J xi2).grad J xi), frozen at t_n
        SpectralScalar src = advect(stepper.velocity(z1), z2, ws);
        src += advect(stepper.velocity(z2), z1, ws);
        src *= -1.0;
        stepper.step_linearized(zz, th, &src);
        stepper.step_linearized(z1, th);
        stepper.step_linearized(z2, th);
    }
    return zz;
}

}  // namespace msmhd
