#pragma once

#include <string>
#include <vector>

#include "msmhd/ensemble.hpp"

namespace msmhd {

/// Malformed configuration input; carries the offending line.
struct ConfigError : std::runtime_error {
    ConfigError(const std::string& what, int line_number)
        : std::runtime_error("config line " + std::to_string(line_number) + ": " + what),
          line(line_number) {}
    int line;
};

/// Experiment configuration; serializes to the flat `key = value` format
/// with [section] headers (grammar documented in the README) and round-trips
/// losslessly.
struct ExperimentConfig {
    // [system]
    std::string system = "limit";  // limit | full | corrector1 | corrector2

    // [grid]
    int grid_n = 16;

    // [params]
    PhysParams params;

    // [noise]
    NoiseConfig noise = default_noise_config(0, 1.0);

    // [step]
    StepConfig step;

    // [run]
    double horizon = 1.0;
    int n_traj = 1;
    int record_every = 1;
    int n_threads = 0;

    // [init]
    InitSampler init;
    // [init_ub]
    FullInitSpec::UB ub_mode = FullInitSpec::UB::Matched;
    double perturb_amplitude = 1.0;
    int perturb_kmax = 2;
    std::uint64_t perturb_seed = 1;

    // [metric]
    double eta = -1.0;  // < 0: policy default min(kappa^2 nu/(4||sigma||^2), 0.05)

    // [experiment]
    std::vector<std::array<double, 2>> eps_delta_list;
    double burn_in = -1.0;  // < 0: 10 temperature dissipation times
    std::vector<double> checkpoints{1.0, 2.0, 4.0, 8.0};
    int samples = 128;
    bool shared_noise = true;
    InitSampler init_b;  // second initial law for the contraction probe

    // [output]
    std::string out_dir = "out";
    bool write_final_snapshots = false;
    std::vector<double> snapshot_times;

    double eta_or_default() const;
    double burn_in_or_default() const;
    FullInitSpec full_init() const;

    bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Ensemble persistence: <prefix>_rows.csv and <prefix>_summary.csv, each with
// a `# msmhd-ensemble v1` schema line.  Doubles are printed with %.17g so
// reruns are byte identical and reads are exact.
// ---------------------------------------------------------------------------

void write_ensemble_csv(const std::string& prefix, const EnsembleRecord& rec);
EnsembleRecord read_ensemble_csv(const std::string& prefix);

}  // namespace msmhd
