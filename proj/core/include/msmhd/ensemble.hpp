#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "msmhd/stepper.hpp"

namespace msmhd {

// ---------------------------------------------------------------------------
// Low-mode coordinate observables <theta, sigma_k^m> and <u, e_i sigma_k^m>.
// These are the concrete observable family whose Lipschitz seminorms are
// analytically bounded.
// ---------------------------------------------------------------------------

struct Observable {
    enum class Kind { ThetaCoeff, VelocityCoeff };
    Kind kind = Kind::ThetaCoeff;
    Wavevector k{1, 0, 0};
    int parity = 0;
    int comp = 0;  // velocity component for VelocityCoeff

    std::string name() const;
    /// Analytic bound on the eta-weighted C^1 seminorm of the observable.
    double eta_seminorm() const;
};

double eval_observable(const Observable& obs, const SpectralScalar& theta,
                       const SpectralVector* u, const PhysParams& p);

// ---------------------------------------------------------------------------
// Initial samplers.
// ---------------------------------------------------------------------------

struct InitSampler {
    enum class Kind { Zero, SingleMode, GaussianLowMode, Snapshot };
    Kind kind = Kind::Zero;
    // SingleMode
    Wavevector k{1, 0, 0};
    int parity = 0;
    // SingleMode / GaussianLowMode scale
    double amplitude = 1.0;
    // GaussianLowMode: independent centered Gaussians on modes |k_i| <= kmax,
    // coefficient std amplitude/(1+|k|^2), keyed on (seed, traj).
    int kmax = 2;
    std::uint64_t seed = 0;
    // Snapshot
    std::string snapshot_path;

    bool operator==(const InitSampler&) const = default;
};

SpectralScalar sample_theta(const InitSampler& spec, const GridPtr& grid, std::uint64_t traj);

/// Velocity/magnetic initialization for the full system relative to the
/// constitutive manifold.
struct FullInitSpec {
    InitSampler theta;
    enum class UB { Matched, Zero, Perturbed } ub = UB::Matched;
    double perturb_amplitude = 1.0;  // O(1) mismatch scale for UB::Perturbed
    int perturb_kmax = 2;
    std::uint64_t perturb_seed = 1u;
};

FullState sample_full(const FullInitSpec& spec, const GridPtr& grid, const PhysParams& p,
                      std::uint64_t traj);

// ---------------------------------------------------------------------------
// Ensemble runner.
// ---------------------------------------------------------------------------

enum class SystemKind { Limit, Full };

struct RunSpec {
    SystemKind system = SystemKind::Limit;
    double horizon = 1.0;
    int record_every = 1;  // row cadence in steps (t = 0 and final always kept)
    std::vector<Observable> observables;
    bool keep_final_state = false;
    std::vector<double> snapshot_times;  // in-trajectory state captures
    int n_threads = 0;  // 0: hardware concurrency
};

/// Per-trajectory output: a row table plus running summary statistics that
/// are accumulated every step regardless of the row cadence.
struct TrajectoryRecord {
    std::uint64_t traj = 0;
    std::vector<std::vector<double>> rows;
    std::map<std::string, double> summary;
    bool stopped = false;           // discrete tau_K fired
    std::size_t stopped_step = 0;

    std::optional<LimitState> final_limit;
    std::optional<FullState> final_full;
    std::vector<std::pair<double, SpectralScalar>> theta_snapshots;
    std::vector<std::pair<double, FullState>> full_snapshots;
};

struct EnsembleRecord {
    std::vector<std::string> columns;
    std::vector<TrajectoryRecord> trajectories;

    /// Mean of a summary statistic over trajectories.
    double summary_mean(const std::string& key) const;
};

/// Independent trajectories with per-trajectory deterministic noise keys;
/// trajectory results are bit-reproducible and independent of scheduling.
/// Throws BlowUpError (with the trajectory id) if any trajectory blows up.
EnsembleRecord run_ensemble(const RunSpec& spec, const GridPtr& grid, const PhysParams& p,
                            const StepConfig& cfg, const NoiseConfig& noise,
                            const InitSampler& init, int n_traj);
EnsembleRecord run_ensemble_full(const RunSpec& spec, const GridPtr& grid, const PhysParams& p,
                                 const StepConfig& cfg, const NoiseConfig& noise,
                                 const FullInitSpec& init, int n_traj);

}  // namespace msmhd
