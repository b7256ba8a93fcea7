#pragma once

#include "msmhd/config.hpp"
#include "msmhd/metrics.hpp"

namespace msmhd {

// ---------------------------------------------------------------------------
// Finite-time convergence: full system vs limit system from matched
// temperatures under one Brownian path per trajectory.
// ---------------------------------------------------------------------------

struct ConvergenceRow {
    double eps = 0.0, delta = 0.0;
    double mean_sup_theta_err = 0.0;     // E sup_t ||Theta - theta||
    double mean_sup_theta_err_sq = 0.0;  // E sup_t ||Theta - theta||^2
    double mean_int_ub_err_h1 = 0.0;     // E int ||U - M_u th||_H1^2 + ||B - M_b th||_H1^2 dt
};

struct ConvergenceResult {
    std::vector<ConvergenceRow> rows;  // sorted by decreasing eps + delta
    double slope_theta = 0.0;          // log-log slope of the sup error vs (eps+delta)
    double slope_ub = 0.0;
    bool theta_decreasing = false;  // strictly decreasing along the sorted list
    bool ub_decreasing = false;
};

ConvergenceResult run_convergence(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Stationary-state comparison: spun-up full-system ensemble vs the lifted
// spun-up limit ensemble in the rho-tilde Wasserstein bracket.
// ---------------------------------------------------------------------------

struct StationaryRow {
    double eps = 0.0, delta = 0.0;
    double w_lower = 0.0, w_upper = 0.0;
    double floor_lower = 0.0, floor_upper = 0.0;  // split-half limit-vs-itself bracket
    std::vector<std::pair<std::string, double>> observable_gap;
};

struct StationaryResult {
    std::vector<StationaryRow> rows;  // sorted by decreasing eps + delta
    bool upper_monotone = false;      // upper bracket nonincreasing along the list
};

StationaryResult run_stationary(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Contraction probe: two limit ensembles from distinct initial laws,
// Wasserstein bracket at checkpoint multiples of the dissipation time.
// ---------------------------------------------------------------------------

struct ContractionRow {
    double t = 0.0;
    double w_lower = 0.0, w_upper = 0.0;
};

struct ContractionResult {
    std::vector<ContractionRow> rows;
    bool upper_decreasing = false;
};

ContractionResult run_contraction_probe(const ExperimentConfig& cfg);

}  // namespace msmhd
