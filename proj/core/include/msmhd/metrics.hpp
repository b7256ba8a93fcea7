#pragma once

#include <string>
#include <vector>

#include "msmhd/ensemble.hpp"
#include "msmhd/noise.hpp"
#include "msmhd/ops.hpp"
#include "msmhd/state.hpp"

namespace msmhd {

// ---------------------------------------------------------------------------
// Exact linear assignment (square cost matrix, minimization).  Shortest
// augmenting paths with potentials, O(n^3); exact for real costs.
// ---------------------------------------------------------------------------

struct AssignmentResult {
    double cost = 0.0;
    std::vector<int> row_to_col;
};

AssignmentResult solve_assignment(const std::vector<std::vector<double>>& cost);

// ---------------------------------------------------------------------------
// Weighted metric rho_eta and its computable two-sided bounds.  The path
// infimum itself is never evaluated; every consumer works through
//   ||a-b||  <=  rho(a,b)  <=  path_upper  <=  exp(2 eta (||a||^2+||b||^2)) ||a-b||,
// where path_upper is the straight-line path integral (trapezoidal; an upper
// bound because t -> ||p(t)||^2 is convex along the segment).
// ---------------------------------------------------------------------------

struct MetricParams {
    double eta = 0.05;
};

/// Policy default: min(kappa^2 nu / (4 C ||sigma||^2), 0.05) with C := 1.
double metric_eta_default(const PhysParams& p, const NoiseConfig& noise);

struct RhoBounds {
    double lower = 0.0;
    double upper = 0.0;
    double path_upper = 0.0;
};

RhoBounds rho_bounds(const SpectralScalar& a, const SpectralScalar& b, const MetricParams& mp);

enum class RhoBound { Lower, PathUpper, Upper };

/// L(theta) = (M_u theta, M_b theta, theta); Pi(lift(theta)) = theta exactly.
FullState lift(const SpectralScalar& theta, const PhysParams& p);
SpectralScalar project_theta(const FullState& s);

/// rho_tilde((U,B,Th),(U',B',Th')) = ||U-U'||_{H1} + ||B-B'||_{H1} +
/// rho_bound(Th,Th') with the selected bound standing in for rho.
double rho_tilde(const FullState& x, const FullState& y, const MetricParams& mp, RhoBound kind);

/// rho*(theta,psi) = rho_tilde(L theta, L psi).
double rho_star(const SpectralScalar& a, const SpectralScalar& b, const PhysParams& p,
                const MetricParams& mp, RhoBound kind);

// ---------------------------------------------------------------------------
// Empirical Wasserstein distances.
// ---------------------------------------------------------------------------

/// Equal-weight empirical measure; exactly one of the two sample vectors is
/// populated and all samples share one grid.
struct EmpiricalMeasure {
    std::vector<SpectralScalar> scalars;
    std::vector<FullState> fulls;

    bool is_full() const { return !fulls.empty(); }
    std::size_t size() const { return is_full() ? fulls.size() : scalars.size(); }
    void validate() const;
};

enum class GroundMetric { Rho, RhoTilde, RhoStar };

struct WassersteinResult {
    double lower = 0.0;
    double upper = 0.0;
    std::vector<int> permutation_lower;  // optimal assignment under the lower cost
    std::vector<int> permutation_upper;
};

/// Exact optimal-coupling value over the n x n cost matrix, solved twice
/// (lower-bound and path-upper-bound ground costs), bracketing the true
/// Wasserstein distance.  Equal sample counts required.
WassersteinResult wasserstein(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                              GroundMetric metric, const MetricParams& mp, const PhysParams& p);

}  // namespace msmhd
