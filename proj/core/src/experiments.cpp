#include "msmhd/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "msmhd/stepper.hpp"

namespace msmhd {

namespace {

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        den += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    }
    return den > 0.0 ? num / den : 0.0;
}

template <typename Work>
void parallel_trajectories(int n_traj, int n_threads, Work&& work) {
    std::atomic<int> next{0};
    auto runner = [&]() {
        for (;;) {
            const int traj = next.fetch_add(1);
            if (traj >= n_traj) break;
            work(traj);
        }
    };
    int threads = n_threads > 0 ? n_threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, n_traj);
    std::vector<std::thread> pool;
    for (int i = 1; i < threads; ++i) pool.emplace_back(runner);
    runner();
    for (auto& th : pool) th.join();
}

}  // namespace

ConvergenceResult run_convergence(const ExperimentConfig& cfg) {
    if (cfg.eps_delta_list.empty())
        throw std::invalid_argument("run_convergence: eps_delta list is empty");
    auto grid = make_grid(cfg.grid_n);
    const std::size_t n_steps = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.step.dt));

    ConvergenceResult result;
    for (const auto& ed : cfg.eps_delta_list) {
        PhysParams p = cfg.params;
        p.eps = ed[0];
        p.delta = ed[1];

        std::vector<double> sup_err(cfg.n_traj, 0.0), sup_err_sq(cfg.n_traj, 0.0),
            int_err(cfg.n_traj, 0.0);

        parallel_trajectories(cfg.n_traj, cfg.n_threads, [&](int traj) {
            FullStepper full(grid, p, cfg.step);
            LimitStepper limit(grid, p, cfg.step);

            FullState fs = sample_full(cfg.full_init(), grid, p, traj);
            LimitState ls(grid);
            ls.theta = sample_theta(cfg.init, grid, traj);  // Theta(0) = theta(0)

            double sup = 0.0, integral = 0.0;
            SpectralVector u_lim, b_lim;
            apply_constitutive(ls.theta, p, u_lim, b_lim);
            auto ub_err = [&]() {
                SpectralVector du = fs.U;
                du -= u_lim;
                SpectralVector db = fs.B;
                db -= b_lim;
                return std::pow(norm_hs(du, 1.0), 2) + std::pow(norm_hs(db, 1.0), 2);
            };
            double prev = ub_err();
            for (std::size_t n = 0; n < n_steps; ++n) {
                const SpectralScalar dW =
                    sample_increment(cfg.noise, grid, cfg.step.dt, n, traj);
                full.step(fs, dW);
                limit.step(ls, dW);
                SpectralScalar dth = fs.Theta;
                dth -= ls.theta;
                sup = std::max(sup, norm_l2(dth));
                apply_constitutive(ls.theta, p, u_lim, b_lim);
                const double cur = ub_err();
                integral += 0.5 * cfg.step.dt * (prev + cur);
                prev = cur;
            }
            sup_err[traj] = sup;
            sup_err_sq[traj] = sup * sup;
            int_err[traj] = integral;
        });

        ConvergenceRow row;
        row.eps = ed[0];
        row.delta = ed[1];
        for (int t = 0; t < cfg.n_traj; ++t) {
            row.mean_sup_theta_err += sup_err[t];
            row.mean_sup_theta_err_sq += sup_err_sq[t];
            row.mean_int_ub_err_h1 += int_err[t];
        }
        row.mean_sup_theta_err /= cfg.n_traj;
        row.mean_sup_theta_err_sq /= cfg.n_traj;
        row.mean_int_ub_err_h1 /= cfg.n_traj;
        result.rows.push_back(row);
    }

    std::sort(result.rows.begin(), result.rows.end(), [](const auto& a, const auto& b) {
        return a.eps + a.delta > b.eps + b.delta;
    });

    std::vector<double> x, y_theta, y_ub;
    result.theta_decreasing = true;
    result.ub_decreasing = true;
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        x.push_back(result.rows[i].eps + result.rows[i].delta);
        y_theta.push_back(result.rows[i].mean_sup_theta_err);
        y_ub.push_back(result.rows[i].mean_int_ub_err_h1);
        if (i > 0) {
            result.theta_decreasing = result.theta_decreasing &&
                                      (y_theta[i] < y_theta[i - 1]);
            result.ub_decreasing = result.ub_decreasing && (y_ub[i] < y_ub[i - 1]);
        }
    }
    if (x.size() >= 2) {
        result.slope_theta = loglog_slope(x, y_theta);
        result.slope_ub = loglog_slope(x, y_ub);
    }
    return result;
}

StationaryResult run_stationary(const ExperimentConfig& cfg) {
    if (cfg.eps_delta_list.empty())
        throw std::invalid_argument("run_stationary: eps_delta list is empty");
    auto grid = make_grid(cfg.grid_n);
    const double burn = cfg.burn_in_or_default();
    MetricParams mp{cfg.eta_or_default()};

    // fixed low-mode observable family for the dual-formulation spot checks
    std::vector<Observable> family{
        {Observable::Kind::ThetaCoeff, {1, 0, 0}, 0, 0},
        {Observable::Kind::ThetaCoeff, {0, 1, 0}, 1, 0},
        {Observable::Kind::ThetaCoeff, {0, 0, 1}, 0, 0},
        {Observable::Kind::VelocityCoeff, {1, 0, 0}, 0, 2},
    };

    StationaryResult result;
    for (const auto& ed : cfg.eps_delta_list) {
        PhysParams p = cfg.params;
        p.eps = ed[0];
        p.delta = ed[1];

        RunSpec spec;
        spec.system = SystemKind::Full;
        spec.horizon = burn;
        spec.record_every = 1 << 30;
        spec.keep_final_state = true;
        spec.n_threads = cfg.n_threads;

        const EnsembleRecord fullrec =
            run_ensemble_full(spec, grid, p, cfg.step, cfg.noise, cfg.full_init(), cfg.samples);

        NoiseConfig limit_noise = cfg.noise;
        if (!cfg.shared_noise) limit_noise.seed = cfg.noise.seed + 0x5174u;
        spec.system = SystemKind::Limit;
        const EnsembleRecord limrec =
            run_ensemble(spec, grid, p, cfg.step, limit_noise, cfg.init, cfg.samples);

        EmpiricalMeasure mu, nu;
        for (const auto& tr : fullrec.trajectories) mu.fulls.push_back(*tr.final_full);
        for (const auto& tr : limrec.trajectories)
            nu.fulls.push_back(lift(tr.final_limit->theta, p));

        StationaryRow row;
        row.eps = ed[0];
        row.delta = ed[1];
        const WassersteinResult w = wasserstein(mu, nu, GroundMetric::RhoTilde, mp, p);
        row.w_lower = w.lower;
        row.w_upper = w.upper;

        // split-half floor: the lifted limit ensemble against itself
        if (cfg.samples >= 4) {
            EmpiricalMeasure a, b;
            for (std::size_t i = 0; i < nu.fulls.size() / 2; ++i) {
                a.fulls.push_back(nu.fulls[2 * i]);
                b.fulls.push_back(nu.fulls[2 * i + 1]);
            }
            const WassersteinResult f = wasserstein(a, b, GroundMetric::RhoTilde, mp, p);
            row.floor_lower = f.lower;
            row.floor_upper = f.upper;
        }

        for (const auto& obs : family) {
            double m_full = 0.0, m_lim = 0.0;
            for (const auto& s : mu.fulls) m_full += eval_observable(obs, s.Theta, &s.U, p);
            for (const auto& s : nu.fulls) m_lim += eval_observable(obs, s.Theta, &s.U, p);
            m_full /= mu.size();
            m_lim /= nu.size();
            row.observable_gap.emplace_back(obs.name(), std::abs(m_full - m_lim));
        }
        result.rows.push_back(row);
    }

    std::sort(result.rows.begin(), result.rows.end(), [](const auto& a, const auto& b) {
        return a.eps + a.delta > b.eps + b.delta;
    });
    result.upper_monotone = true;
    for (std::size_t i = 1; i < result.rows.size(); ++i)
        result.upper_monotone =
            result.upper_monotone && (result.rows[i].w_upper <= result.rows[i - 1].w_upper);
    return result;
}

ContractionResult run_contraction_probe(const ExperimentConfig& cfg) {
    auto grid = make_grid(cfg.grid_n);
    MetricParams mp{cfg.eta_or_default()};
    const double t_diss = 1.0 / cfg.params.kappa;

    RunSpec spec;
    spec.system = SystemKind::Limit;
    spec.record_every = 1 << 30;
    spec.n_threads = cfg.n_threads;
    for (double c : cfg.checkpoints) spec.snapshot_times.push_back(c * t_diss);
    spec.horizon = spec.snapshot_times.back();

    NoiseConfig noise_b = cfg.noise;
    if (!cfg.shared_noise) noise_b.seed = cfg.noise.seed + 0xB0B1u;

    const EnsembleRecord recA =
        run_ensemble(spec, grid, cfg.params, cfg.step, cfg.noise, cfg.init, cfg.samples);
    const EnsembleRecord recB =
        run_ensemble(spec, grid, cfg.params, cfg.step, noise_b, cfg.init_b, cfg.samples);

    ContractionResult result;
    for (std::size_t c = 0; c < spec.snapshot_times.size(); ++c) {
        EmpiricalMeasure a, b;
        for (const auto& tr : recA.trajectories) a.scalars.push_back(tr.theta_snapshots[c].second);
        for (const auto& tr : recB.trajectories) b.scalars.push_back(tr.theta_snapshots[c].second);
        const WassersteinResult w = wasserstein(a, b, GroundMetric::Rho, mp, cfg.params);
        result.rows.push_back({spec.snapshot_times[c], w.lower, w.upper});
    }
    result.upper_decreasing = true;
    for (std::size_t i = 1; i < result.rows.size(); ++i)
        result.upper_decreasing =
            result.upper_decreasing && (result.rows[i].w_upper < result.rows[i - 1].w_upper);
    return result;
}

}  // namespace msmhd
