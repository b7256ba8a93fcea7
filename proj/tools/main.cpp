// msmhd: spectral laboratory for rotating stochastic MHD and its
// active-scalar limit on the periodic torus.
//
// Exit codes: 0 success, 2 usage/config error, 3 trajectory blow-up,
// 4 bracket closure not covered, 5 check failure.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "msmhd/config.hpp"
#include "msmhd/diagnostics.hpp"
#include "msmhd/experiments.hpp"
#include "msmhd/hormander.hpp"
#include "msmhd/snapshot.hpp"

using namespace msmhd;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitBlowUp = 3;
constexpr int kExitNotCovered = 4;
constexpr int kExitCheckFailure = 5;

struct CommonOpts {
    std::string config_path;
    std::string out_override;
    long long seed_override = -1;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--config", c.config_path, "experiment config file");
    cmd->add_option("--out", c.out_override, "output directory override");
    cmd->add_option("--seed", c.seed_override, "noise seed override");
}

ExperimentConfig resolve_config(const CommonOpts& c) {
    ExperimentConfig cfg;
    if (!c.config_path.empty()) cfg = load_config(c.config_path);
    if (!c.out_override.empty()) cfg.out_dir = c.out_override;
    if (c.seed_override >= 0) cfg.noise.seed = static_cast<std::uint64_t>(c.seed_override);
    std::filesystem::create_directories(cfg.out_dir);
    // echo the fully resolved config next to the outputs for provenance
    std::ofstream echo(cfg.out_dir + "/config_used.cfg");
    echo << serialize_config(cfg);
    return cfg;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<Observable> forced_mode_observables(const NoiseConfig& noise) {
    std::vector<Observable> obs;
    for (const auto& e : noise.entries)
        obs.push_back({Observable::Kind::ThetaCoeff, e.k, e.parity, 0});
    return obs;
}

int cmd_simulate(const CommonOpts& copts) {
    const ExperimentConfig cfg = resolve_config(copts);
    auto grid = make_grid(cfg.grid_n);
    const std::string prefix = cfg.out_dir + "/simulate";

    if (cfg.system == "corrector1" || cfg.system == "corrector2") {
        // corrector systems: per-trajectory norm series
        std::ofstream os(prefix + "_rows.csv");
        os << "# msmhd-ensemble v1\n";
        os << "traj,t,u_l2,b_l2,th_l2,layer_u_l2,layer_b_l2\n";
        CorrectorStepper stepper(grid, cfg.params, cfg.step);
        const std::size_t n_steps =
            static_cast<std::size_t>(std::llround(cfg.horizon / cfg.step.dt));
        for (int traj = 0; traj < cfg.n_traj; ++traj) {
            const SpectralScalar th0 = sample_theta(cfg.init, grid, traj);
            const FullState init_state = sample_full(cfg.full_init(), grid, cfg.params, traj);
            CorrectorTwoState s2 = stepper.init_stage_two(init_state.U, init_state.B, th0);
            CorrectorOneState s1 = stepper.init_stage_one(init_state.U, th0);
            const bool two = cfg.system == "corrector2";
            auto emit = [&](double t) {
                if (two) {
                    const SpectralVector b = stepper.stage_two_magnetic(s2);
                    os << traj << "," << fmt(t) << "," << fmt(norm_l2(s2.u2)) << ","
                       << fmt(norm_l2(b)) << "," << fmt(norm_l2(s2.theta2)) << ","
                       << fmt(norm_l2(s2.stage1.layer_u)) << "," << fmt(norm_l2(s2.layer_b))
                       << "\n";
                } else {
                    const SpectralVector u = stepper.stage_one_velocity(s1);
                    os << traj << "," << fmt(t) << "," << fmt(norm_l2(u)) << ",0,"
                       << fmt(norm_l2(s1.theta)) << "," << fmt(norm_l2(s1.layer_u)) << ",0\n";
                }
            };
            emit(0.0);
            for (std::size_t n = 0; n < n_steps; ++n) {
                const SpectralScalar dW =
                    sample_increment(cfg.noise, grid, cfg.step.dt, n, traj);
                if (two)
                    stepper.step_stage_two(s2, dW);
                else
                    stepper.step_stage_one(s1, dW);
                if ((n + 1) % cfg.record_every == 0 || n + 1 == n_steps)
                    emit((double(n) + 1.0) * cfg.step.dt);
            }
        }
        std::cout << "wrote " << prefix << "_rows.csv\n";
        return kExitOk;
    }

    RunSpec spec;
    spec.system = cfg.system == "full" ? SystemKind::Full : SystemKind::Limit;
    spec.horizon = cfg.horizon;
    spec.record_every = cfg.record_every;
    spec.observables = forced_mode_observables(cfg.noise);
    spec.keep_final_state = cfg.write_final_snapshots;
    spec.snapshot_times = cfg.snapshot_times;
    spec.n_threads = cfg.n_threads;

    EnsembleRecord rec;
    if (spec.system == SystemKind::Full)
        rec = run_ensemble_full(spec, grid, cfg.params, cfg.step, cfg.noise, cfg.full_init(),
                                cfg.n_traj);
    else
        rec = run_ensemble(spec, grid, cfg.params, cfg.step, cfg.noise, cfg.init, cfg.n_traj);

    write_ensemble_csv(prefix, rec);
    if (cfg.write_final_snapshots) {
        char name[64];
        for (const auto& tr : rec.trajectories) {
            std::snprintf(name, sizeof(name), "/simulate_traj%04llu.msf",
                          static_cast<unsigned long long>(tr.traj));
            if (tr.final_full)
                write_full_snapshot(cfg.out_dir + name, *tr.final_full, cfg.params);
            else if (tr.final_limit)
                write_scalar_snapshot(cfg.out_dir + name, tr.final_limit->theta, cfg.params,
                                      tr.final_limit->time);
        }
    }
    std::cout << "wrote " << prefix << "_rows.csv and " << prefix << "_summary.csv\n";
    return kExitOk;
}

int cmd_convergence(const CommonOpts& copts) {
    ExperimentConfig cfg = resolve_config(copts);
    if (cfg.eps_delta_list.empty())
        cfg.eps_delta_list = {{1e-1, 1e-1}, {1e-2, 1e-2}, {1e-3, 1e-3}};
    const ConvergenceResult res = run_convergence(cfg);

    std::ofstream os(cfg.out_dir + "/convergence.csv");
    os << "# msmhd-convergence v1\n";
    os << "eps,delta,sup_theta_err,sup_theta_err_sq,int_ub_err_h1\n";
    for (const auto& r : res.rows)
        os << fmt(r.eps) << "," << fmt(r.delta) << "," << fmt(r.mean_sup_theta_err) << ","
           << fmt(r.mean_sup_theta_err_sq) << "," << fmt(r.mean_int_ub_err_h1) << "\n";
    std::cout << "slope_theta = " << res.slope_theta << ", slope_ub = " << res.slope_ub
              << ", theta_decreasing = " << res.theta_decreasing
              << ", ub_decreasing = " << res.ub_decreasing << "\n";
    return kExitOk;
}

int cmd_stationary(const CommonOpts& copts) {
    ExperimentConfig cfg = resolve_config(copts);
    if (cfg.eps_delta_list.empty()) cfg.eps_delta_list = {{0.1, 0.1}, {0.01, 0.01}};
    const StationaryResult res = run_stationary(cfg);

    std::ofstream os(cfg.out_dir + "/stationary.csv");
    os << "# msmhd-stationary v1\n";
    os << "eps,delta,w_lower,w_upper,floor_lower,floor_upper\n";
    for (const auto& r : res.rows)
        os << fmt(r.eps) << "," << fmt(r.delta) << "," << fmt(r.w_lower) << "," << fmt(r.w_upper)
           << "," << fmt(r.floor_lower) << "," << fmt(r.floor_upper) << "\n";
    std::ofstream og(cfg.out_dir + "/stationary_observables.csv");
    og << "# msmhd-stationary v1\neps,delta,observable,gap\n";
    for (const auto& r : res.rows)
        for (const auto& [name, gap] : r.observable_gap)
            og << fmt(r.eps) << "," << fmt(r.delta) << "," << name << "," << fmt(gap) << "\n";

    // contraction probe alongside (two limit ensembles from distinct laws)
    if (cfg.init_b.kind != cfg.init.kind || !(cfg.init_b == cfg.init)) {
        const ContractionResult probe = run_contraction_probe(cfg);
        std::ofstream oc(cfg.out_dir + "/contraction.csv");
        oc << "# msmhd-contraction v1\nt,w_lower,w_upper\n";
        for (const auto& r : probe.rows)
            oc << fmt(r.t) << "," << fmt(r.w_lower) << "," << fmt(r.w_upper) << "\n";
        std::cout << "contraction upper bracket decreasing = " << probe.upper_decreasing << "\n";
    }

    std::cout << "stationary upper bracket monotone = " << res.upper_monotone << "\n";
    return res.upper_monotone ? kExitOk : kExitCheckFailure;
}

json direction_json(const FrequencyDirection& d) {
    return json{{"k", {d.k[0], d.k[1], d.k[2]}}, {"parity", d.parity}};
}

int cmd_hormander(const CommonOpts& copts, int N, const std::string& seeds_arg, double nu,
                  double lambda, const std::vector<double>& b0, double tol, int n_max,
                  bool constructive) {
    ExperimentConfig cfg = resolve_config(copts);
    PhysParams p = cfg.params;
    if (nu > 0) p.nu = nu;
    if (lambda == lambda && lambda != -1000.0) p.lambda_colat = lambda;
    if (b0.size() == 3) p = make_params(p.eps, p.delta, p.nu, p.kappa, p.lambda_colat,
                                        {b0[0], b0[1], b0[2]});

    std::vector<FrequencyDirection> seeds;
    if (seeds_arg.empty()) {
        for (int axis = 0; axis < 3; ++axis) {
            Wavevector e{0, 0, 0};
            e[axis] = 1;
            seeds.push_back({e, 0});
            seeds.push_back({e, 1});
        }
    } else {
        // format: "k1,k2,k3,m;k1,k2,k3,m;..."
        std::istringstream is(seeds_arg);
        std::string tok;
        while (std::getline(is, tok, ';')) {
            int vals[4];
            if (std::sscanf(tok.c_str(), "%d,%d,%d,%d", &vals[0], &vals[1], &vals[2], &vals[3]) !=
                4)
                throw std::invalid_argument("bad seed token '" + tok + "'");
            seeds.push_back({{vals[0], vals[1], vals[2]}, vals[3]});
        }
    }

    const SpanReport rep = span_closure(seeds, N, p, tol, n_max);
    SpanReport con;
    if (constructive) con = constructive_path(N, p, tol);

    auto write_certificate = [](std::ofstream& os, const SpanReport& r) {
        for (const auto& s : r.certificate) {
            os << "gen=" << s.generation << " parent=(" << s.parent[0] << "," << s.parent[1]
               << "," << s.parent[2] << ") seed=(" << s.seed[0] << "," << s.seed[1] << ","
               << s.seed[2] << ")" << (s.self_bracket ? " self" : "") << " lhs=" << fmt(s.lhs)
               << " rhs=" << fmt(s.rhs) << " margin=" << fmt(s.margin) << " produced=";
            for (std::size_t i = 0; i < s.produced.size(); ++i) {
                const auto& d = s.produced[i];
                os << (i ? "," : "") << "(" << d.k[0] << "," << d.k[1] << "," << d.k[2] << ")"
                   << (d.parity == 0 ? "c" : "s");
            }
            os << "\n";
        }
    };

    {
        std::ofstream os(cfg.out_dir + "/hormander_certificate.txt");
        write_certificate(os, rep);
        if (constructive) {
            os << "# constructive route\n";
            write_certificate(os, con);
        }
    }

    json summary;
    summary["N"] = N;
    summary["tol"] = tol;
    summary["covered"] = rep.covered;
    summary["n_of_N"] = rep.n_of_N;
    summary["directions_known"] = rep.directions_known;
    summary["certificate_steps"] = rep.certificate.size();
    summary["near_degenerate_count"] = rep.near_degenerate.size();
    summary["replay_ok"] = replay_certificate(rep, p, tol);
    if (!rep.covered) {
        summary["failure_reason"] = rep.failure_reason;
        json missing = json::array();
        for (const auto& d : rep.missing) missing.push_back(direction_json(d));
        summary["missing"] = missing;
    }
    if (constructive) {
        summary["constructive"] = {{"covered", con.covered},
                                   {"far_plane_K", con.far_plane_K},
                                   {"n_of_N", con.n_of_N},
                                   {"certificate_steps", con.certificate.size()},
                                   {"agrees", con.covered == rep.covered}};
    }
    std::ofstream js(cfg.out_dir + "/hormander_summary.json");
    js << summary.dump(2) << "\n";

    std::cout << (rep.covered ? "covered" : "not covered") << " (n = " << rep.n_of_N
              << ", directions = " << rep.directions_known << ")\n";
    return rep.covered ? kExitOk : kExitNotCovered;
}

int cmd_wasserstein(const CommonOpts& copts, const std::string& dir_a, const std::string& dir_b,
                    const std::string& metric_name, double eta) {
    const ExperimentConfig cfg = resolve_config(copts);

    auto load_dir = [](const std::string& dir) {
        std::vector<std::string> paths;
        for (const auto& entry : std::filesystem::directory_iterator(dir))
            if (entry.path().extension() == ".msf") paths.push_back(entry.path().string());
        std::sort(paths.begin(), paths.end());
        if (paths.empty()) throw std::invalid_argument("no .msf snapshots in " + dir);
        EmpiricalMeasure m;
        const SnapshotInfo info = peek_snapshot(paths.front());
        for (const auto& p : paths) {
            if (info.kind == 2)
                m.fulls.push_back(read_full_snapshot(p));
            else
                m.scalars.push_back(read_scalar_snapshot(p));
        }
        return std::make_pair(m, info);
    };

    auto [mu, info_a] = load_dir(dir_a);
    auto [nu, info_b] = load_dir(dir_b);
    (void)info_b;

    GroundMetric metric = GroundMetric::Rho;
    if (metric_name == "rho-tilde")
        metric = GroundMetric::RhoTilde;
    else if (metric_name == "rho-star")
        metric = GroundMetric::RhoStar;
    else if (metric_name != "rho")
        throw std::invalid_argument("unknown metric '" + metric_name + "'");

    MetricParams mp{eta >= 0 ? eta : cfg.eta_or_default()};
    const WassersteinResult w = wasserstein(mu, nu, metric, mp, info_a.params);

    std::ofstream os(cfg.out_dir + "/wasserstein_permutation.csv");
    os << "# msmhd-wasserstein v1\nindex,match_lower,match_upper\n";
    for (std::size_t i = 0; i < w.permutation_lower.size(); ++i)
        os << i << "," << w.permutation_lower[i] << "," << w.permutation_upper[i] << "\n";

    std::cout << "W_lower = " << fmt(w.lower) << "\nW_upper = " << fmt(w.upper) << "\n";
    return kExitOk;
}

int cmd_moments(const CommonOpts& copts, const std::string& input_prefix, double eta) {
    const ExperimentConfig cfg = resolve_config(copts);
    const EnsembleRecord rec = read_ensemble_csv(input_prefix);
    const double use_eta = eta >= 0 ? eta : cfg.eta_or_default();
    const MomentReport rep = moment_report(rec, cfg.params, cfg.noise, use_eta, cfg.horizon);

    std::ofstream os(cfg.out_dir + "/moments.csv");
    os << "# msmhd-moments v1\ncheck,lhs,rhs,fitted_C,saturated,ok\n";
    bool all_ok = true;
    for (const auto& c : rep.checks) {
        os << c.name << "," << fmt(c.lhs) << "," << fmt(c.rhs) << "," << fmt(c.fitted_C) << ","
           << (c.saturated ? 1 : 0) << "," << (c.ok ? 1 : 0) << "\n";
        std::cout << c.name << ": fitted_C = " << c.fitted_C
                  << (c.saturated ? " (saturated)" : "") << (c.ok ? " ok" : " FAILED") << "\n";
        all_ok = all_ok && c.ok;
    }
    return all_ok ? kExitOk : kExitCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "msmhd: pseudo-spectral laboratory for rotating stochastic MHD and its "
        "active-scalar limit"};
    app.require_subcommand(1);

    CommonOpts c_sim, c_conv, c_stat, c_horm, c_wass, c_mom;

    auto* sim = app.add_subcommand("simulate", "run trajectories and write CSV/snapshots");
    add_common(sim, c_sim);

    auto* conv = app.add_subcommand("convergence",
                                    "finite-time full-vs-limit convergence rate table");
    add_common(conv, c_conv);

    auto* stat = app.add_subcommand(
        "stationary", "stationary-ensemble Wasserstein comparison and contraction probe");
    add_common(stat, c_stat);

    auto* horm = app.add_subcommand("hormander", "bracket closure certificate");
    add_common(horm, c_horm);
    int h_N = 3, h_nmax = 64;
    double h_tol = 1e-9, h_nu = -1.0, h_lambda = -1000.0;
    std::vector<double> h_b0;
    std::string h_seeds;
    bool h_constructive = true;
    horm->add_option("--N", h_N, "cover H_N (|k| <= N)");
    horm->add_option("--seeds", h_seeds, "forced directions 'k1,k2,k3,m;...' (default e1,e2,e3 both parities)");
    horm->add_option("--nu", h_nu, "viscosity");
    horm->add_option("--lambda", h_lambda, "co-latitude");
    horm->add_option("--b0", h_b0, "applied field direction (3 numbers)")->expected(3);
    horm->add_option("--tol", h_tol, "degeneracy tolerance");
    horm->add_option("--n-max", h_nmax, "generation cap");
    horm->add_flag("--constructive,!--no-constructive", h_constructive,
                   "also run the constructive route");

    auto* wass = app.add_subcommand("wasserstein", "empirical Wasserstein bracket of two snapshot dirs");
    add_common(wass, c_wass);
    std::string w_a, w_b, w_metric = "rho";
    double w_eta = -1.0;
    wass->add_option("--a", w_a, "first snapshot directory")->required();
    wass->add_option("--b", w_b, "second snapshot directory")->required();
    wass->add_option("--metric", w_metric, "rho | rho-tilde | rho-star");
    wass->add_option("--eta", w_eta, "metric weight (default: policy)");

    auto* mom = app.add_subcommand("moments", "moment-bound report for a recorded ensemble");
    add_common(mom, c_mom);
    std::string m_input;
    double m_eta = -1.0;
    mom->add_option("--input", m_input, "ensemble CSV prefix")->required();
    mom->add_option("--eta", m_eta, "exponential moment weight");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(c_sim);
        if (conv->parsed()) return cmd_convergence(c_conv);
        if (stat->parsed()) return cmd_stationary(c_stat);
        if (horm->parsed())
            return cmd_hormander(c_horm, h_N, h_seeds, h_nu, h_lambda, h_b0, h_tol, h_nmax,
                                 h_constructive);
        if (wass->parsed()) return cmd_wasserstein(c_wass, w_a, w_b, w_metric, w_eta);
        if (mom->parsed()) return cmd_moments(c_mom, m_input, m_eta);
    } catch (const BlowUpError& e) {
        std::cerr << "blow-up: " << e.what() << "\n";
        return kExitBlowUp;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitUsage;
}
