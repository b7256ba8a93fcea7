#include "msmhd/params.hpp"

#include <cmath>
#include <stdexcept>

namespace msmhd {

Vec3 PhysParams::omega_hat() const {
    return {0.0, -std::sin(lambda_colat), std::cos(lambda_colat)};
}

void PhysParams::validate() const {
    if (!(eps > 0.0) || !(delta > 0.0))
        throw std::invalid_argument("PhysParams: eps and delta must be positive");
    if (!(nu > 0.0) || !(kappa > 0.0))
        throw std::invalid_argument("PhysParams: nu and kappa must be positive");
    const double nb = std::sqrt(dot(b0_hat, b0_hat));
    if (std::abs(nb - 1.0) > 1e-12)
        throw std::invalid_argument("PhysParams: b0_hat must be a unit vector");
}

PhysParams make_params(double eps, double delta, double nu, double kappa, double lambda_colat,
                       Vec3 b0) {
    const double nb = std::sqrt(dot(b0, b0));
    if (!(nb > 0.0)) throw std::invalid_argument("make_params: b0 must be nonzero");
    PhysParams p;
    p.eps = eps;
    p.delta = delta;
    p.nu = nu;
    p.kappa = kappa;
    p.lambda_colat = lambda_colat;
    p.b0_hat = {b0[0] / nb, b0[1] / nb, b0[2] / nb};
    p.validate();
    return p;
}

}  // namespace msmhd
