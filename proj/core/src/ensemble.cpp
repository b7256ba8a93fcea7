#include "msmhd/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "msmhd/snapshot.hpp"

#include <cmath>

namespace msmhd {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
const double kVolume = kTwoPi * kTwoPi * kTwoPi;
}  // namespace

// ---------------------------------------------------------------------------
// Observables
// ---------------------------------------------------------------------------

std::string Observable::name() const {
    std::ostringstream os;
    if (kind == Kind::ThetaCoeff)
        os << "th";
    else
        os << "u" << comp;
    os << "_" << k[0] << "_" << k[1] << "_" << k[2] << "_" << (parity == 0 ? "c" : "s");
    return os.str();
}

double Observable::eta_seminorm() const {
    const double mode_norm = std::sqrt(kVolume / 2.0);  // ||sigma_k^m||
    if (kind == Kind::ThetaCoeff) return mode_norm;
    // velocity observables pair H^1 perturbations against sigma_k^m e_i:
    // |<zeta_i, sigma>| <= ||sigma||_{H^{-1}} ||zeta||_{H^1} = ||sigma||/|k| ||zeta||_{H^1}
    return mode_norm / std::sqrt(double(norm2(k)));
}

double eval_observable(const Observable& obs, const SpectralScalar& theta,
                       const SpectralVector* u, const PhysParams& p) {
    if (obs.kind == Observable::Kind::ThetaCoeff) {
        const Complex c = theta.at(obs.k);
        return (obs.parity == 0 ? kVolume * c.real() : -kVolume * c.imag()) + 0.0;
    }
    Complex c;
    if (u) {
        c = u->comp(obs.comp).at(obs.k);
    } else {
        // limit system: u = M_u theta, evaluated at the single mode
        const Vec3 mu = symbol_Mu(obs.k, p);
        c = mu[obs.comp] * theta.at(obs.k);
    }
    return (obs.parity == 0 ? kVolume * c.real() : -kVolume * c.imag()) + 0.0;
}

// ---------------------------------------------------------------------------
// Initial samplers
// ---------------------------------------------------------------------------

namespace {

// Gaussian low-mode draws use the reserved counter block (step words all
// ones) so they never collide with forcing increments under the same seed.
double init_normal(std::uint64_t seed, const Wavevector& k, int lane, std::uint64_t traj) {
    const philox::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    const auto enc = [](int v) { return static_cast<std::uint32_t>(v + 512) & 0x3FFu; };
    const std::uint32_t packed = (enc(k[0]) << 22) | (enc(k[1]) << 12) | (enc(k[2]) << 2);
    const philox::Counter ctr{packed, 0xFFFFFFFFu, 0xFFFFFFFFu, static_cast<std::uint32_t>(traj)};
    return philox::normal_pair(ctr, key)[lane];
}

}  // namespace

SpectralScalar sample_theta(const InitSampler& spec, const GridPtr& grid, std::uint64_t traj) {
    switch (spec.kind) {
        case InitSampler::Kind::Zero:
            return SpectralScalar(grid);
        case InitSampler::Kind::SingleMode: {
            SpectralScalar f(grid);
            const Complex c = spec.parity == 0 ? Complex{0.5 * spec.amplitude, 0.0}
                                               : Complex{0.0, -0.5 * spec.amplitude};
            f.at(spec.k) = c;
            f.at({-spec.k[0], -spec.k[1], -spec.k[2]}) = std::conj(c);
            return f;
        }
        case InitSampler::Kind::GaussianLowMode: {
            SpectralScalar f(grid);
            for (std::size_t flat : grid->half_modes()) {
                const Wavevector k = grid->wavevector(flat);
                if (std::abs(k[0]) > spec.kmax || std::abs(k[1]) > spec.kmax ||
                    std::abs(k[2]) > spec.kmax)
                    continue;
                const double std_dev = spec.amplitude / (1.0 + norm2(k));
                const Complex c{std_dev * init_normal(spec.seed, k, 0, traj) / std::sqrt(2.0),
                                std_dev * init_normal(spec.seed, k, 1, traj) / std::sqrt(2.0)};
                f[flat] = c;
                f[grid->conjugate_index(flat)] = std::conj(c);
            }
            return f;
        }
        case InitSampler::Kind::Snapshot: {
            SpectralScalar f = read_scalar_snapshot(spec.snapshot_path);
            if (!(*f.grid() == *grid))
                throw std::invalid_argument("sample_theta: snapshot grid mismatch");
            return f;
        }
    }
    throw std::logic_error("sample_theta: unreachable");
}

FullState sample_full(const FullInitSpec& spec, const GridPtr& grid, const PhysParams& p,
                      std::uint64_t traj) {
    FullState s(grid);
    s.Theta = sample_theta(spec.theta, grid, traj);
    switch (spec.ub) {
        case FullInitSpec::UB::Zero:
            break;
        case FullInitSpec::UB::Matched:
            apply_constitutive(s.Theta, p, s.U, s.B);
            break;
        case FullInitSpec::UB::Perturbed: {
            apply_constitutive(s.Theta, p, s.U, s.B);
            InitSampler pert;
            pert.kind = InitSampler::Kind::GaussianLowMode;
            pert.amplitude = spec.perturb_amplitude;
            pert.kmax = spec.perturb_kmax;
            pert.seed = spec.perturb_seed;
            SpectralVector du(grid);
            du.x = sample_theta(pert, grid, 3 * traj);
            du.y = sample_theta(pert, grid, 3 * traj + 1);
            du.z = sample_theta(pert, grid, 3 * traj + 2);
            s.U += leray_project(du);
            pert.seed = spec.perturb_seed + 0x9E3779B9u;
            SpectralVector db(grid);
            db.x = sample_theta(pert, grid, 3 * traj);
            db.y = sample_theta(pert, grid, 3 * traj + 1);
            db.z = sample_theta(pert, grid, 3 * traj + 2);
            s.B += leray_project(db);
            break;
        }
    }
    s.U.solenoidal = true;
    s.B.solenoidal = true;
    return s;
}

// ---------------------------------------------------------------------------
// Ensemble runner
// ---------------------------------------------------------------------------

double EnsembleRecord::summary_mean(const std::string& key) const {
    double acc = 0.0;
    for (const auto& t : trajectories) acc += t.summary.at(key);
    return acc / static_cast<double>(trajectories.size());
}

namespace {

std::vector<std::string> make_columns(SystemKind system, const std::vector<Observable>& obs) {
    std::vector<std::string> cols{"t"};
    if (system == SystemKind::Full) {
        for (const char* c : {"u_l2", "u_h1", "b_l2", "b_h1"}) cols.push_back(c);
    }
    for (const char* c : {"th_l2", "th_h1", "th_l3", "noise_ip"}) cols.push_back(c);
    for (const auto& o : obs) cols.push_back(o.name());
    return cols;
}

struct SummaryTracker {
    double sup_th_l2sq = 0.0;
    double sup_th_l3sq = 0.0;
    double int_th_gradsq = 0.0;
    double int_th_l2sq = 0.0;
    double int_th_l3sq = 0.0;
    double prev_th_l3sq = 0.0;
    double sup_weighted_energy = 0.0;
    double int_u_gradsq = 0.0;
    double int_b_gradsq = 0.0;
    double prev_th_gradsq = 0.0, prev_th_l2sq = 0.0;
    double prev_u_gradsq = 0.0, prev_b_gradsq = 0.0;

    void finish(TrajectoryRecord& rec, SystemKind system, std::size_t steps) const {
        rec.summary["sup_th_l2sq"] = sup_th_l2sq;
        rec.summary["sup_th_l3sq"] = sup_th_l3sq;
        rec.summary["int_th_gradsq"] = int_th_gradsq;
        rec.summary["int_th_l2sq"] = int_th_l2sq;
        rec.summary["int_th_l3sq"] = int_th_l3sq;
        rec.summary["steps"] = static_cast<double>(steps);
        if (system == SystemKind::Full) {
            rec.summary["sup_weighted_energy"] = sup_weighted_energy;
            rec.summary["int_u_gradsq"] = int_u_gradsq;
            rec.summary["int_b_gradsq"] = int_b_gradsq;
        }
    }
};

}  // namespace

EnsembleRecord run_ensemble(const RunSpec& spec, const GridPtr& grid, const PhysParams& p,
                            const StepConfig& cfg, const NoiseConfig& noise,
                            const InitSampler& init, int n_traj) {
    if (n_traj < 1) throw std::invalid_argument("run_ensemble: n_traj >= 1 required");
    cfg.validate();
    noise.validate();
    EnsembleRecord out;
    out.columns = make_columns(SystemKind::Limit, spec.observables);
    out.trajectories.resize(n_traj);
    const std::size_t n_steps = static_cast<std::size_t>(std::llround(spec.horizon / cfg.dt));

    std::vector<std::size_t> snap_steps;
    for (double t : spec.snapshot_times)
        snap_steps.push_back(static_cast<std::size_t>(std::llround(t / cfg.dt)));

    std::atomic<int> next{0};
    std::vector<std::string> errors(n_traj);
    std::atomic<bool> failed{false};

    auto worker = [&]() {
        LimitStepper stepper(grid, p, cfg);
        for (;;) {
            const int traj = next.fetch_add(1);
            if (traj >= n_traj) break;
            TrajectoryRecord& rec = out.trajectories[traj];
            rec.traj = traj;
            try {
                LimitState s(grid);
                s.theta = sample_theta(init, grid, traj);
                SummaryTracker sum;
                sum.prev_th_gradsq = std::pow(norm_hs(s.theta, 1.0), 2);
                sum.prev_th_l2sq = std::pow(norm_l2(s.theta), 2);
                sum.sup_th_l2sq = sum.prev_th_l2sq;
                sum.sup_th_l3sq = std::pow(norm_lp(s.theta, 3.0, stepper.workspace()), 2);
                sum.prev_th_l3sq = sum.sup_th_l3sq;

                auto make_row = [&](double t, double noise_ip) {
                    std::vector<double> row{t, norm_l2(s.theta), norm_hs(s.theta, 1.0),
                                            norm_lp(s.theta, 3.0, stepper.workspace()), noise_ip};
                    for (const auto& o : spec.observables)
                        row.push_back(eval_observable(o, s.theta, nullptr, p));
                    return row;
                };

                rec.rows.push_back(make_row(0.0, 0.0));
                for (std::size_t i = 0; i < snap_steps.size(); ++i)
                    if (snap_steps[i] == 0) rec.theta_snapshots.emplace_back(0.0, s.theta);
                std::vector<double> frozen;
                for (std::size_t n = 0; n < n_steps; ++n) {
                    if (!rec.stopped) {
                        stepper.step(s, sample_increment(noise, grid, cfg.dt, n, traj));
                        const double gradsq = std::pow(norm_hs(s.theta, 1.0), 2);
                        const double l2sq = std::pow(norm_l2(s.theta), 2);
                        const double l3sq =
                            std::pow(norm_lp(s.theta, 3.0, stepper.workspace()), 2);
                        sum.int_th_gradsq += 0.5 * cfg.dt * (sum.prev_th_gradsq + gradsq);
                        sum.int_th_l2sq += 0.5 * cfg.dt * (sum.prev_th_l2sq + l2sq);
                        sum.int_th_l3sq += 0.5 * cfg.dt * (sum.prev_th_l3sq + l3sq);
                        sum.prev_th_gradsq = gradsq;
                        sum.prev_th_l2sq = l2sq;
                        sum.prev_th_l3sq = l3sq;
                        sum.sup_th_l2sq = std::max(sum.sup_th_l2sq, l2sq);
                        sum.sup_th_l3sq = std::max(sum.sup_th_l3sq, l3sq);
                        if (l3sq >= cfg.stop_l3sq) {
                            rec.stopped = true;
                            rec.stopped_step = n + 1;
                            frozen = make_row(s.time, stepper.last_noise_ip());
                        }
                    }
                    for (std::size_t i = 0; i < snap_steps.size(); ++i)
                        if (snap_steps[i] == n + 1)
                            rec.theta_snapshots.emplace_back(s.time, s.theta);
                    if (((n + 1) % spec.record_every == 0) || (n + 1 == n_steps)) {
                        if (rec.stopped) {
                            std::vector<double> row = frozen;
                            row[0] = (double(n) + 1.0) * cfg.dt;
                            rec.rows.push_back(std::move(row));
                        } else {
                            rec.rows.push_back(make_row(s.time, stepper.last_noise_ip()));
                        }
                    }
                }
                sum.finish(rec, SystemKind::Limit, n_steps);
                if (spec.keep_final_state) rec.final_limit = std::move(s);
            } catch (const BlowUpError& e) {
                errors[traj] = std::string(e.what()) + " [trajectory " + std::to_string(traj) + "]";
                failed = true;
            }
        }
    };

    int n_threads = spec.n_threads > 0 ? spec.n_threads
                                       : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<int>(n_threads, n_traj);
    std::vector<std::thread> pool;
    for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    if (failed) {
        for (int t = 0; t < n_traj; ++t)
            if (!errors[t].empty()) throw BlowUpError(errors[t], 0, t);
    }
    return out;
}

EnsembleRecord run_ensemble_full(const RunSpec& spec, const GridPtr& grid, const PhysParams& p,
                                 const StepConfig& cfg, const NoiseConfig& noise,
                                 const FullInitSpec& init, int n_traj) {
    if (n_traj < 1) throw std::invalid_argument("run_ensemble_full: n_traj >= 1 required");
    cfg.validate();
    noise.validate();
    EnsembleRecord out;
    out.columns = make_columns(SystemKind::Full, spec.observables);
    out.trajectories.resize(n_traj);
    const std::size_t n_steps = static_cast<std::size_t>(std::llround(spec.horizon / cfg.dt));

    std::vector<std::size_t> snap_steps;
    for (double t : spec.snapshot_times)
        snap_steps.push_back(static_cast<std::size_t>(std::llround(t / cfg.dt)));

    std::atomic<int> next{0};
    std::vector<std::string> errors(n_traj);
    std::atomic<bool> failed{false};

    auto worker = [&]() {
        FullStepper stepper(grid, p, cfg);
        SpectralWorkspace ws(grid);
        for (;;) {
            const int traj = next.fetch_add(1);
            if (traj >= n_traj) break;
            TrajectoryRecord& rec = out.trajectories[traj];
            rec.traj = traj;
            try {
                FullState s = sample_full(init, grid, p, traj);
                SummaryTracker sum;
                const auto weighted = [&]() {
                    return 0.5 * p.eps * std::pow(norm_l2(s.U), 2) +
                           0.5 * p.delta * std::pow(norm_l2(s.B), 2) +
                           std::pow(norm_l2(s.Theta), 2) / (p.kappa * p.nu);
                };
                sum.prev_th_gradsq = std::pow(norm_hs(s.Theta, 1.0), 2);
                sum.prev_th_l2sq = std::pow(norm_l2(s.Theta), 2);
                sum.prev_u_gradsq = std::pow(norm_hs(s.U, 1.0), 2);
                sum.prev_b_gradsq = std::pow(norm_hs(s.B, 1.0), 2);
                sum.sup_th_l2sq = sum.prev_th_l2sq;
                sum.sup_th_l3sq = std::pow(norm_lp(s.Theta, 3.0, ws), 2);
                sum.prev_th_l3sq = sum.sup_th_l3sq;
                sum.sup_weighted_energy = weighted();

                auto make_row = [&](double t, double noise_ip) {
                    std::vector<double> row{t,
                                            norm_l2(s.U),
                                            norm_hs(s.U, 1.0),
                                            norm_l2(s.B),
                                            norm_hs(s.B, 1.0),
                                            norm_l2(s.Theta),
                                            norm_hs(s.Theta, 1.0),
                                            norm_lp(s.Theta, 3.0, ws),
                                            noise_ip};
                    for (const auto& o : spec.observables)
                        row.push_back(eval_observable(o, s.Theta, &s.U, p));
                    return row;
                };

                rec.rows.push_back(make_row(0.0, 0.0));
                for (std::size_t i = 0; i < snap_steps.size(); ++i)
                    if (snap_steps[i] == 0) rec.full_snapshots.emplace_back(0.0, s);
                std::vector<double> frozen;
                for (std::size_t n = 0; n < n_steps; ++n) {
                    if (!rec.stopped) {
                        stepper.step(s, sample_increment(noise, grid, cfg.dt, n, traj));
                        const double gradsq = std::pow(norm_hs(s.Theta, 1.0), 2);
                        const double l2sq = std::pow(norm_l2(s.Theta), 2);
                        const double l3sq = std::pow(norm_lp(s.Theta, 3.0, ws), 2);
                        const double ug = std::pow(norm_hs(s.U, 1.0), 2);
                        const double bg = std::pow(norm_hs(s.B, 1.0), 2);
                        sum.int_th_gradsq += 0.5 * cfg.dt * (sum.prev_th_gradsq + gradsq);
                        sum.int_th_l2sq += 0.5 * cfg.dt * (sum.prev_th_l2sq + l2sq);
                        sum.int_th_l3sq += 0.5 * cfg.dt * (sum.prev_th_l3sq + l3sq);
                        sum.int_u_gradsq += 0.5 * cfg.dt * (sum.prev_u_gradsq + ug);
                        sum.int_b_gradsq += 0.5 * cfg.dt * (sum.prev_b_gradsq + bg);
                        sum.prev_th_gradsq = gradsq;
                        sum.prev_th_l2sq = l2sq;
                        sum.prev_th_l3sq = l3sq;
                        sum.prev_u_gradsq = ug;
                        sum.prev_b_gradsq = bg;
                        sum.sup_th_l2sq = std::max(sum.sup_th_l2sq, l2sq);
                        sum.sup_th_l3sq = std::max(sum.sup_th_l3sq, l3sq);
                        sum.sup_weighted_energy = std::max(sum.sup_weighted_energy, weighted());
                        if (l3sq >= cfg.stop_l3sq) {
                            rec.stopped = true;
                            rec.stopped_step = n + 1;
                            frozen = make_row(s.time, stepper.last_noise_ip());
                        }
                    }
                    for (std::size_t i = 0; i < snap_steps.size(); ++i)
                        if (snap_steps[i] == n + 1) rec.full_snapshots.emplace_back(s.time, s);
                    if (((n + 1) % spec.record_every == 0) || (n + 1 == n_steps)) {
                        if (rec.stopped) {
                            std::vector<double> row = frozen;
                            row[0] = (double(n) + 1.0) * cfg.dt;
                            rec.rows.push_back(std::move(row));
                        } else {
                            rec.rows.push_back(make_row(s.time, stepper.last_noise_ip()));
                        }
                    }
                }
                sum.finish(rec, SystemKind::Full, n_steps);
                if (spec.keep_final_state) rec.final_full = std::move(s);
            } catch (const BlowUpError& e) {
                errors[traj] = std::string(e.what()) + " [trajectory " + std::to_string(traj) + "]";
                failed = true;
            }
        }
    };

    int n_threads = spec.n_threads > 0 ? spec.n_threads
                                       : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<int>(n_threads, n_traj);
    std::vector<std::thread> pool;
    for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    if (failed) {
        for (int t = 0; t < n_traj; ++t)
            if (!errors[t].empty()) throw BlowUpError(errors[t], 0, t);
    }
    return out;
}

}  // namespace msmhd
