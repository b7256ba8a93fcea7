#include "msmhd/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace msmhd {

double metric_eta_default(const PhysParams& p, const NoiseConfig& noise) {
    const double s2 = noise.hs_norm() * noise.hs_norm();
    if (s2 == 0.0) return 0.05;
    return std::min(p.kappa * p.kappa * p.nu / (4.0 * s2), 0.05);
}

RhoBounds rho_bounds(const SpectralScalar& a, const SpectralScalar& b, const MetricParams& mp) {
    if (!a.compatible(b)) throw std::invalid_argument("rho_bounds: grid mismatch");
    SpectralScalar d = b;
    d -= a;
    const double na2 = std::pow(norm_l2(a), 2);
    const double nd2 = std::pow(norm_l2(d), 2);
    const double nb2 = std::pow(norm_l2(b), 2);
    const double ip_ad = inner_l2(a, d);
    const double len = std::sqrt(nd2);

    RhoBounds out;
    out.lower = len;
    out.upper = std::exp(2.0 * mp.eta * (na2 + nb2)) * len;

    // straight-line path p(t) = a + t (b - a): ||p(t)||^2 is the quadratic
    // na2 + 2 t <a,d> + t^2 ||d||^2, so the integrand needs no field work.
    const int intervals = 64;
    double acc = 0.0;
    for (int i = 0; i <= intervals; ++i) {
        const double t = static_cast<double>(i) / intervals;
        const double q = na2 + 2.0 * t * ip_ad + t * t * nd2;
        const double w = (i == 0 || i == intervals) ? 0.5 : 1.0;
        acc += w * std::exp(mp.eta * q);
    }
    out.path_upper = len * acc / intervals;
    // the quadrature is a convex combination of integrand values in
    // [1, exp(2 eta (na2+nb2))], so the ordering holds structurally; clamp
    // only roundoff
    out.path_upper = std::max(out.path_upper, out.lower);
    out.path_upper = std::min(out.path_upper, out.upper);
    return out;
}

FullState lift(const SpectralScalar& theta, const PhysParams& p) {
    FullState s(theta.grid());
    apply_constitutive(theta, p, s.U, s.B);
    s.Theta = theta;
    return s;
}

SpectralScalar project_theta(const FullState& s) { return s.Theta; }

namespace {

double rho_component(const SpectralScalar& a, const SpectralScalar& b, const MetricParams& mp,
                     RhoBound kind) {
    const RhoBounds rb = rho_bounds(a, b, mp);
    switch (kind) {
        case RhoBound::Lower:
            return rb.lower;
        case RhoBound::PathUpper:
            return rb.path_upper;
        case RhoBound::Upper:
            return rb.upper;
    }
    return rb.lower;
}

}  // namespace

double rho_tilde(const FullState& x, const FullState& y, const MetricParams& mp, RhoBound kind) {
    if (!x.Theta.compatible(y.Theta)) throw std::invalid_argument("rho_tilde: grid mismatch");
    SpectralVector du = x.U;
    du -= y.U;
    SpectralVector db = x.B;
    db -= y.B;
    return norm_hs(du, 1.0) + norm_hs(db, 1.0) + rho_component(x.Theta, y.Theta, mp, kind);
}

double rho_star(const SpectralScalar& a, const SpectralScalar& b, const PhysParams& p,
                const MetricParams& mp, RhoBound kind) {
    return rho_tilde(lift(a, p), lift(b, p), mp, kind);
}

void EmpiricalMeasure::validate() const {
    if (scalars.empty() == fulls.empty())
        throw std::invalid_argument(
            "EmpiricalMeasure: exactly one sample kind must be populated and nonempty");
    if (is_full()) {
        for (const auto& s : fulls)
            if (!s.Theta.compatible(fulls.front().Theta))
                throw std::invalid_argument("EmpiricalMeasure: mixed grids");
    } else {
        for (const auto& s : scalars)
            if (!s.compatible(scalars.front()))
                throw std::invalid_argument("EmpiricalMeasure: mixed grids");
    }
}

WassersteinResult wasserstein(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                              GroundMetric metric, const MetricParams& mp, const PhysParams& p) {
    mu.validate();
    nu.validate();
    if (mu.size() != nu.size())
        throw std::invalid_argument("wasserstein: equal sample counts required (resample)");
    if (mu.is_full() != nu.is_full())
        throw std::invalid_argument("wasserstein: sample kinds differ");
    if (metric == GroundMetric::RhoTilde && !mu.is_full())
        throw std::invalid_argument("wasserstein: rho-tilde needs full-state samples");
    if (metric != GroundMetric::RhoTilde && mu.is_full())
        throw std::invalid_argument("wasserstein: rho/rho* need scalar samples");

    const std::size_t n = mu.size();
    std::vector<std::vector<double>> lower(n, std::vector<double>(n, 0.0));
    std::vector<std::vector<double>> upper(n, std::vector<double>(n, 0.0));

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            switch (metric) {
                case GroundMetric::Rho: {
                    const RhoBounds rb = rho_bounds(mu.scalars[i], nu.scalars[j], mp);
                    lower[i][j] = rb.lower;
                    upper[i][j] = rb.path_upper;
                    break;
                }
                case GroundMetric::RhoStar: {
                    lower[i][j] = rho_star(mu.scalars[i], nu.scalars[j], p, mp, RhoBound::Lower);
                    upper[i][j] =
                        rho_star(mu.scalars[i], nu.scalars[j], p, mp, RhoBound::PathUpper);
                    break;
                }
                case GroundMetric::RhoTilde: {
                    lower[i][j] = rho_tilde(mu.fulls[i], nu.fulls[j], mp, RhoBound::Lower);
                    upper[i][j] = rho_tilde(mu.fulls[i], nu.fulls[j], mp, RhoBound::PathUpper);
                    break;
                }
            }
        }
    }

    WassersteinResult res;
    const AssignmentResult lo = solve_assignment(lower);
    const AssignmentResult hi = solve_assignment(upper);
    res.lower = lo.cost / static_cast<double>(n);
    res.upper = hi.cost / static_cast<double>(n);
    res.permutation_lower = lo.row_to_col;
    res.permutation_upper = hi.row_to_col;
    return res;
}

}  // namespace msmhd
