// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failures.  Every tolerance is pinned here; runs are fixed-seed and
// deterministic.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include "msmhd/diagnostics.hpp"
#include "msmhd/experiments.hpp"
#include "msmhd/hormander.hpp"
#include "msmhd/variation.hpp"

using namespace msmhd;

namespace {

const double kPi = 3.14159265358979323846;

struct Outcome {
    bool pass = false;
    std::string detail;
};

PhysParams default_params(double eps = 1.0, double delta = 1.0) {
    return make_params(eps, delta, 0.1, 1.0, kPi / 4, {0, 0, 1});
}

SpectralScalar random_scalar(const GridPtr& grid, unsigned seed, double amplitude = 1.0) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    SpectralScalar f(grid);
    for (std::size_t flat : grid->half_modes()) {
        const Wavevector k = grid->wavevector(flat);
        const double decay = amplitude / (1.0 + norm2(k));
        const Complex c{decay * gauss(rng), decay * gauss(rng)};
        f[flat] = c;
        f[grid->conjugate_index(flat)] = std::conj(c);
    }
    return f;
}

std::vector<FrequencyDirection> standing_seeds() {
    std::vector<FrequencyDirection> seeds;
    for (int axis = 0; axis < 3; ++axis) {
        Wavevector e{0, 0, 0};
        e[axis] = 1;
        seeds.push_back({e, 0});
        seeds.push_back({e, 1});
    }
    return seeds;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

// --------------------------------------------------------------------------
// 1. Constitutive-law oracle equivalence.
// --------------------------------------------------------------------------
Outcome criterion_1() {
    auto g = make_grid(16);
    auto p = default_params();
    double worst = 0.0;
    for (unsigned seed = 0; seed < 100; ++seed) {
        const SpectralScalar theta = random_scalar(g, 1000 + seed);
        SpectralVector u, b;
        apply_constitutive(theta, p, u, b);
        SpectralVector uq = apply_Q_inverse_drive(theta, p);
        uq -= u;
        worst = std::max(worst, norm_l2(uq) / std::max(norm_l2(u), 1e-300));
    }
    return {worst <= 1e-10, "max rel L2 gap " + fmt(worst) + " (tol 1e-10, 100 fields at 16^3)"};
}

// --------------------------------------------------------------------------
// 2. Smoothing orders of the multiplier symbols.
// --------------------------------------------------------------------------
Outcome criterion_2() {
    auto p = default_params();
    const SymbolScan s32 = scan_symbol_bounds(32, p);
    const SymbolScan s64 = scan_symbol_bounds(64, p);
    const double rel_mu = std::abs(s64.sup_mu_k2 - s32.sup_mu_k2) / s32.sup_mu_k2;
    const double rel_mb = std::abs(s64.sup_mb_k3 - s32.sup_mb_k3) / s32.sup_mb_k3;
    const bool ok = std::isfinite(s64.sup_mu_k2) && std::isfinite(s64.sup_mb_k3) &&
                    rel_mu < 0.01 && rel_mb < 0.01;
    return {ok, "sup|Mu||k|^2 = " + fmt(s64.sup_mu_k2) + ", sup|Mb||k|^3 = " +
                    fmt(s64.sup_mb_k3) + ", 32->64 drift " + fmt(rel_mu) + " / " + fmt(rel_mb) +
                    " (tol 1%)"};
}

// --------------------------------------------------------------------------
// 3. Linear-law exactness: OU stationary second moments, 10^4 trajectories.
// --------------------------------------------------------------------------
Outcome criterion_3() {
    auto g = make_grid(8);
    auto p = default_params();
    StepConfig cfg;
    cfg.dt = 1e-3;
    cfg.advection = false;
    const double alpha = 0.3;
    NoiseConfig noise = default_noise_config(301, alpha);
    const int n_traj = 10000;
    const int n_steps = 4000;  // T = 4 dissipation times of the forced modes

    std::vector<std::vector<double>> per_entry(noise.entries.size(),
                                               std::vector<double>(n_traj, 0.0));
    std::atomic<int> next{0};
    auto worker = [&]() {
        LimitStepper stepper(g, p, cfg);
        for (;;) {
            const int traj = next.fetch_add(1);
            if (traj >= n_traj) break;
            LimitState s(g);
            s.theta = SpectralScalar(g);
            for (int n = 0; n < n_steps; ++n)
                stepper.step(s, sample_increment(noise, g, cfg.dt, n, traj));
            for (std::size_t e = 0; e < noise.entries.size(); ++e) {
                const auto& ne = noise.entries[e];
                const Complex c = s.theta.at(ne.k);
                per_entry[e][traj] = ne.parity == 0 ? 2.0 * c.real() : -2.0 * c.imag();
            }
        }
    };
    std::thread t2(worker);
    worker();
    t2.join();

    bool ok = true;
    double worst_z = 0.0;
    for (std::size_t e = 0; e < noise.entries.size(); ++e) {
        double var = 0.0;
        for (double c : per_entry[e]) var += c * c;
        var /= n_traj;
        const double expected = alpha * alpha / (2.0 * p.kappa);  // |k|^2 = 1 for all entries
        const double se = expected * std::sqrt(2.0 / n_traj);
        const double z = std::abs(var - expected) / se;
        worst_z = std::max(worst_z, z);
        ok = ok && (z <= 3.0);
    }
    return {ok, "worst |z| = " + fmt(worst_z) + " over 6 forced coefficients (3 s.e. gate, " +
                    "alpha^2/(2 kappa |k|^2) target)"};
}

// --------------------------------------------------------------------------
// 4. Stationary energy balance at 16^3.
// --------------------------------------------------------------------------
Outcome criterion_4() {
    auto g = make_grid(16);
    auto p = default_params();
    StepConfig cfg;
    cfg.dt = 5e-4;
    NoiseConfig noise = default_noise_config(401, 0.08);
    const double burn = 5.0, horizon = 65.0;
    const int n_traj = 8;

    RunSpec spec;
    spec.horizon = horizon;
    spec.record_every = 1 << 30;
    const EnsembleRecord full_run = run_ensemble(spec, g, p, cfg, noise, InitSampler{}, n_traj);
    RunSpec spec_b = spec;
    spec_b.horizon = burn;
    const EnsembleRecord burn_run = run_ensemble(spec_b, g, p, cfg, noise, InitSampler{}, n_traj);

    const double tail =
        full_run.summary_mean("int_th_gradsq") - burn_run.summary_mean("int_th_gradsq");
    const double avg = p.kappa * tail / (horizon - burn);
    const double target = 0.5 * std::pow(noise.hs_norm(), 2);
    const double rel = std::abs(avg - target) / target;
    return {rel < 0.05, "kappa avg||grad th||^2 = " + fmt(avg) + " vs ||sigma||^2/2 = " +
                            fmt(target) + ", rel dev " + fmt(rel) + " (tol 5%)"};
}

// --------------------------------------------------------------------------
// 5. Bracket formula vs finite-difference Lie brackets of the drift.
// --------------------------------------------------------------------------
Outcome criterion_5() {
    auto p = default_params();
    auto g = make_grid(32);
    SpectralWorkspace ws(g);

    auto drift = [&](const SpectralScalar& theta) {
        SpectralVector u, b;
        apply_constitutive(theta, p, u, b);
        SpectralScalar f = advect(u, theta, ws);
        for (std::size_t flat : g->active_modes())
            f[flat] += p.kappa * double(norm2(g->wavevector(flat))) * theta[flat];
        return f;
    };
    auto single = [&](const Wavevector& k, int m) {
        SpectralScalar f(g);
        const Complex c = m == 0 ? Complex{0.5, 0.0} : Complex{0.0, -0.5};
        f.at(k) = c;
        f.at({-k[0], -k[1], -k[2]}) = std::conj(c);
        return f;
    };

    std::mt19937 rng(505);
    std::uniform_int_distribution<int> pick(-4, 4);
    std::uniform_int_distribution<int> par(0, 1);
    int tested = 0;
    double worst = 0.0;
    while (tested < 50) {
        const Wavevector k{pick(rng), pick(rng), pick(rng)};
        const Wavevector j{pick(rng), pick(rng), pick(rng)};
        if ((k[0] == 0 && k[1] == 0 && k[2] == 0) || (j[0] == 0 && j[1] == 0 && j[2] == 0))
            continue;
        if (norm2(k) > 16 || norm2(j) > 16) continue;
        if (!is_canonical_halfspace(k) || !is_canonical_halfspace(j)) continue;
        const int m = par(rng), m2 = par(rng);
        ++tested;

        const SpectralScalar sk = single(k, m), sj = single(j, m2);
        const double a = 0.5;
        auto eval = [&](double ca, double cb) {
            SpectralScalar th(g);
            th.axpy(ca, sk);
            th.axpy(cb, sj);
            return drift(th);
        };
        SpectralScalar fd = eval(a, a);
        fd -= eval(a, -a);
        fd -= eval(-a, a);
        fd += eval(-a, -a);
        fd *= 1.0 / (4.0 * a * a);

        const auto terms = bracket_pair(k, m, j, m2, p);
        double scale = 1e-300;
        for (const auto& t : terms) scale = std::max(scale, std::abs(t.coeff));
        for (const auto& t : terms) {
            const Complex c = fd.at(t.dir.k);
            const double got = t.dir.parity == 0 ? 2.0 * c.real() : -2.0 * c.imag();
            worst = std::max(worst, std::abs(got - t.coeff) / std::max(1.0, scale));
        }
    }
    return {worst <= 1e-6,
            "50 random brackets (|k|,|j| <= 4): max rel coefficient error " + fmt(worst) +
                " (tol 1e-6)"};
}

// --------------------------------------------------------------------------
// 6. Bracket closure coverage at N = 3 with a replayable certificate.
// --------------------------------------------------------------------------
Outcome criterion_6() {
    auto p = default_params();
    const double tol = 1e-9;
    const SpanReport rep = span_closure(standing_seeds(), 3, p, tol, 32);
    const SpanReport con = constructive_path(3, p, tol);
    std::vector<FrequencyDirection> degenerate{{{0, 0, 1}, 0}, {{0, 0, 1}, 1}};
    const SpanReport deg = span_closure(degenerate, 1, p, tol, 64);

    const bool ok = rep.covered && replay_certificate(rep, p, tol) && con.covered &&
                    replay_certificate(con, p, tol) && (con.covered == rep.covered) &&
                    !deg.covered;
    std::ostringstream os;
    os << "closure n(3) = " << rep.n_of_N << " (" << rep.certificate.size()
       << " steps, replay ok), route K = " << con.far_plane_K
       << ", degenerate e3 seed not covered";
    return {ok, os.str()};
}

// --------------------------------------------------------------------------
// 7/8. Finite-time convergence, matched and mismatched initial data.
// --------------------------------------------------------------------------
ExperimentConfig convergence_config(bool mismatched) {
    ExperimentConfig cfg;
    cfg.system = "full";
    cfg.grid_n = 8;
    cfg.params = default_params();
    cfg.noise = default_noise_config(701, 0.05);
    cfg.step.dt = 1e-3;
    cfg.horizon = 1.0;
    cfg.n_traj = 64;
    cfg.init.kind = InitSampler::Kind::GaussianLowMode;
    cfg.init.amplitude = 0.3;
    cfg.init.seed = 702;
    cfg.ub_mode = mismatched ? FullInitSpec::UB::Perturbed : FullInitSpec::UB::Matched;
    cfg.perturb_amplitude = 1.0;  // O(1) mismatch
    cfg.perturb_seed = 703;
    cfg.eps_delta_list = {{1e-1, 1e-1}, {1e-2, 1e-2}, {1e-3, 1e-3}};
    return cfg;
}

Outcome criterion_7() {
    const ConvergenceResult res = run_convergence(convergence_config(false));
    std::ostringstream os;
    os << "E sup||Th-th|| = [";
    for (std::size_t i = 0; i < res.rows.size(); ++i)
        os << (i ? ", " : "") << fmt(res.rows[i].mean_sup_theta_err);
    os << "], slope " << fmt(res.slope_theta) << " (> 0.2), H1 integral decreasing = "
       << res.ub_decreasing;
    const bool ok = res.theta_decreasing && res.slope_theta > 0.2 && res.ub_decreasing;
    return {ok, os.str()};
}

Outcome criterion_8() {
    const ConvergenceResult res = run_convergence(convergence_config(true));
    std::ostringstream os;
    os << "O(1) U,B mismatch: E sup||Th-th|| = [";
    for (std::size_t i = 0; i < res.rows.size(); ++i)
        os << (i ? ", " : "") << fmt(res.rows[i].mean_sup_theta_err);
    os << "], slope " << fmt(res.slope_theta);
    return {res.theta_decreasing, os.str()};
}

// --------------------------------------------------------------------------
// 9. Variation solvers vs finite differences of the flow.
// --------------------------------------------------------------------------
Outcome criterion_9() {
    auto g = make_grid(8);
    auto p = default_params();
    StepConfig cfg;
    cfg.dt = 1e-3;
    NoiseConfig noise = default_noise_config(901, 0.1);
    LimitStepper stepper(g, p, cfg);

    const SpectralScalar theta0 = random_scalar(g, 902, 0.3);
    const std::size_t n = 200;
    LimitState init(g);
    init.theta = theta0;
    const ThetaPath path = record_theta_path(stepper, init, &noise, 0, n);
    const SpectralScalar xi = random_scalar(g, 903);
    const SpectralScalar jxi = first_variation(stepper, path, xi, 0.0, n * cfg.dt);
    const double scale = std::max(1.0, norm_l2(jxi));

    auto flow = [&](const SpectralScalar& th0) {
        LimitState s(g);
        s.theta = th0;
        for (std::size_t i = 0; i < n; ++i)
            stepper.step(s, sample_increment(noise, g, cfg.dt, i, 0));
        return s.theta;
    };
    const SpectralScalar base = path.theta.back();
    auto fd_err = [&](double h) {
        SpectralScalar pert = theta0;
        pert.axpy(h, xi);
        SpectralScalar d = flow(pert);
        d -= base;
        d *= 1.0 / h;
        d -= jxi;
        return norm_l2(d);
    };
    const double e3 = fd_err(1e-3), e4 = fd_err(1e-4);
    const double ratio = e3 / e4;
    const bool first_ok = e3 <= 5.0 * 1e-3 * scale && e4 <= 5.0 * 1e-4 * scale + 1e-9 &&
                          ratio > 5.0 && ratio < 20.0;

    // second variation, central differences
    const SpectralScalar jj = second_variation(stepper, path, xi, xi, 0.0, n * cfg.dt);
    const double scale2 = std::max(1.0, norm_l2(jj));
    auto cd_err = [&](double h) {
        SpectralScalar up = theta0, dn = theta0;
        up.axpy(h, xi);
        dn.axpy(-h, xi);
        SpectralScalar acc = flow(up);
        acc.axpy(-2.0, base);
        acc += flow(dn);
        acc *= 1.0 / (h * h);
        acc -= jj;
        return norm_l2(acc);
    };
    const bool second_ok =
        cd_err(1e-2) <= 5.0 * 1e-2 * scale2 && cd_err(1e-3) <= 5.0 * 1e-3 * scale2 + 1e-6;

    return {first_ok && second_ok,
            "|J xi - FD|/h ratio " + fmt(ratio) + " (O(h), in [5,20]); errors " + fmt(e3) + "/" +
                fmt(e4) + "; 2nd variation central-difference ok = " +
                (second_ok ? "1" : "0")};
}

// --------------------------------------------------------------------------
// 10. Exponential martingale tails.
// --------------------------------------------------------------------------
Outcome criterion_10() {
    const std::vector<double> K_grid{0.5, 1.0, 2.0, 4.0};
    const auto brown = martingale_tail_brownian(1.0, K_grid, 2000, 20.0, 1e-2, 1001);
    bool ok = true;
    for (const auto& r : brown) ok = ok && r.ok;

    auto p = default_params(0.1, 0.1);
    NoiseConfig noise = default_noise_config(1002, 0.05);
    StepConfig cfg;
    cfg.dt = 1e-3;
    FullInitSpec init;
    init.theta.kind = InitSampler::Kind::GaussianLowMode;
    init.theta.amplitude = 0.2;
    init.theta.seed = 1003;
    const double s2 = std::pow(noise.hs_norm(), 2);
    const double gamma = p.kappa * p.kappa * p.nu / (4.0 * s2);
    const auto temp =
        martingale_tail_full(gamma, K_grid, 1000, make_grid(8), p, cfg, noise, init, 1.0);
    std::ostringstream os;
    os << "Brownian oracle tails";
    for (const auto& r : brown) {
        os << " " << fmt(r.empirical) << "<=" << fmt(r.bound) << "+3se";
        ok = ok && r.ok;
    }
    os << "; MHD temperature martingale (gamma = " << fmt(gamma) << ")";
    for (const auto& r : temp) {
        os << " " << fmt(r.empirical) << "<=" << fmt(r.bound) << "+3se";
        ok = ok && r.ok;
    }
    return {ok, os.str()};
}

// --------------------------------------------------------------------------
// 11. Wasserstein machinery and stationary-state convergence.
// --------------------------------------------------------------------------
Outcome criterion_11() {
    auto g = make_grid(8);
    auto p = default_params();
    MetricParams mp{0.01};

    // assignment vs brute force, n <= 6
    std::mt19937 rng(1101);
    std::uniform_real_distribution<double> unif(0.0, 5.0);
    bool assign_ok = true;
    for (int n = 2; n <= 6; ++n) {
        std::vector<std::vector<double>> cost(n, std::vector<double>(n));
        for (auto& row : cost)
            for (auto& c : row) c = unif(rng);
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        double best = 1e300;
        do {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += cost[i][perm[i]];
            best = std::min(best, acc);
        } while (std::next_permutation(perm.begin(), perm.end()));
        assign_ok = assign_ok && std::abs(solve_assignment(cost).cost - best) < 1e-12;
    }

    // metric sandwich on 100 random pairs
    bool sandwich_ok = true;
    for (unsigned seed = 0; seed < 100; ++seed) {
        const SpectralScalar a = random_scalar(g, 2000 + seed, 0.5);
        const SpectralScalar b = random_scalar(g, 3000 + seed, 0.5);
        const RhoBounds rb = rho_bounds(a, b, mp);
        sandwich_ok = sandwich_ok && rb.lower <= rb.path_upper && rb.path_upper <= rb.upper;
    }

    // stationary ensembles, eps = delta in {0.1, 0.01}
    ExperimentConfig cfg;
    cfg.system = "full";
    cfg.grid_n = 8;
    cfg.params = default_params();
    cfg.noise = default_noise_config(1102, 0.05);
    cfg.step.dt = 1e-3;
    cfg.samples = 128;
    cfg.burn_in = 10.0;
    cfg.init.kind = InitSampler::Kind::GaussianLowMode;
    cfg.init.amplitude = 0.2;
    cfg.init.seed = 1103;
    cfg.eps_delta_list = {{0.1, 0.1}, {0.01, 0.01}};
    const StationaryResult res = run_stationary(cfg);

    std::ostringstream os;
    os << "assignment oracle ok = " << assign_ok << ", sandwich 100/100 = " << sandwich_ok
       << ", W_rho~ upper: ";
    for (std::size_t i = 0; i < res.rows.size(); ++i)
        os << (i ? " -> " : "") << fmt(res.rows[i].w_upper);
    os << " (floor " << fmt(res.rows.back().floor_upper) << ")";
    return {assign_ok && sandwich_ok && res.upper_monotone, os.str()};
}

// --------------------------------------------------------------------------
// 12. Contraction probe for the limit dynamics.
// --------------------------------------------------------------------------
Outcome criterion_12() {
    ExperimentConfig cfg;
    cfg.system = "limit";
    cfg.grid_n = 8;
    cfg.params = default_params();
    cfg.noise = default_noise_config(1201, 0.05);
    cfg.step.dt = 1e-3;
    cfg.samples = 128;
    cfg.checkpoints = {1.0, 2.0, 4.0, 8.0};
    cfg.init.kind = InitSampler::Kind::GaussianLowMode;
    cfg.init.amplitude = 0.4;
    cfg.init.seed = 1202;
    cfg.init_b.kind = InitSampler::Kind::SingleMode;
    cfg.init_b.k = {1, 1, 0};
    cfg.init_b.parity = 0;
    cfg.init_b.amplitude = 1.5;
    const ContractionResult res = run_contraction_probe(cfg);
    std::ostringstream os;
    os << "W_rho upper at t/t_diss {1,2,4,8}: ";
    for (std::size_t i = 0; i < res.rows.size(); ++i)
        os << (i ? " -> " : "") << fmt(res.rows[i].w_upper);
    return {res.upper_decreasing, os.str()};
}

// --------------------------------------------------------------------------
// 13. Gronwall series evaluator.
// --------------------------------------------------------------------------
Outcome criterion_13() {
    const double eta = 0.4, C = 1.0, t = 1.0, gamma = 0.12;
    bool ok = true;
    // convergence against partial sum + tail
    const double rate = (1 - gamma) * eta - gamma * C * t;
    double s64 = 0.0;
    for (int k = 1; k <= 64; ++k)
        s64 += std::pow(k * 0.3 + double(k) * k * C * 0.05 * 1.4, gamma) * std::exp(-rate * k);
    const double got = gronwall_series_bound(0.3, C, 0.05, 0.4, eta, t, gamma);
    const double a65 = std::pow(65 * 0.3 + 65.0 * 65 * C * 0.05 * 1.4, gamma) *
                       std::exp(-rate * 65);
    const double q = std::pow(66.0 / 65.0, 2 * gamma) * std::exp(-rate);
    ok = ok && got >= s64 * (1 - 1e-10) && got <= s64 + a65 / (1 - q) + 1e-10 * got;

    // rejects divergent gamma
    bool rejected = false;
    try {
        gronwall_series_bound(0.3, C, 0.05, 0.4, eta, t, eta / (eta + C * t));
    } catch (const std::invalid_argument&) {
        rejected = true;
    }
    ok = ok && rejected;

    // (eps+delta)^gamma scaling under halving (T' = 0 isolates the term)
    const double v1 = gronwall_series_bound(0.0, C, 0.2, 0.4, eta, t, gamma);
    const double v2 = gronwall_series_bound(0.0, C, 0.1, 0.4, eta, t, gamma);
    const double ratio = v2 / v1;
    ok = ok && std::abs(ratio - std::pow(0.5, gamma)) < 1e-10;

    return {ok, "series converges (tail < 1e-10), rejects gamma >= eta/(eta+Ct), halving ratio " +
                    fmt(ratio) + " = 2^-gamma"};
}

}  // namespace

int main() {
    struct Entry {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Entry> criteria{
        {1, "constitutive-law oracle equivalence", criterion_1},
        {2, "smoothing orders of M_u and M_b", criterion_2},
        {3, "linear-law OU stationary moments", criterion_3},
        {4, "stationary energy balance at 16^3", criterion_4},
        {5, "bracket formula vs numerical Lie brackets", criterion_5},
        {6, "bracket closure coverage (N = 3)", criterion_6},
        {7, "finite-time convergence, matched data", criterion_7},
        {8, "finite-time convergence, O(1) mismatch", criterion_8},
        {9, "variation solvers vs flow differences", criterion_9},
        {10, "exponential martingale tails", criterion_10},
        {11, "Wasserstein machinery + stationary convergence", criterion_11},
        {12, "contraction probe", criterion_12},
        {13, "Gronwall series evaluator", criterion_13},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] criterion %2d: %s — %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", c.id,
                    c.name, out.detail.c_str(), secs);
        std::fflush(stdout);
        if (!out.pass) ++failures;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
                criteria.size());
    return failures;
}
