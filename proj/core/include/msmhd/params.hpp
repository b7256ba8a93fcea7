#pragma once

#include <array>

#include "msmhd/grid.hpp"

namespace msmhd {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double dot(const Vec3& a, const Wavevector& k) {
    return a[0] * k[0] + a[1] * k[1] + a[2] * k[2];
}
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

/// Nondimensional parameter set.
///
/// The frame is a tangent plane at co-latitude lambda: gravity points along
/// -e3 and the rotation axis is omega_hat = (0, -sin lambda, cos lambda),
/// so omega_hat[0] == 0 exactly (several frequency-space degeneracy
/// conditions rely on that).
struct PhysParams {
    double eps = 1.0;     // Rossby number
    double delta = 1.0;   // magnetic Reynolds number
    double nu = 0.1;      // viscosity
    double kappa = 1.0;   // thermal diffusivity
    double lambda_colat = 0.7853981633974483;  // pi/4
    Vec3 b0_hat = {0.0, 0.0, 1.0};             // applied field direction, |b0_hat| = 1

    Vec3 omega_hat() const;

    bool operator==(const PhysParams&) const = default;

    /// Throws std::invalid_argument when positivity or unit-vector
    /// constraints are violated (|b0_hat| is renormalized only in from_raw).
    void validate() const;
};

/// Normalizes b0 and validates; convenience for config parsing.
PhysParams make_params(double eps, double delta, double nu, double kappa, double lambda_colat,
                       Vec3 b0);

}  // namespace msmhd
