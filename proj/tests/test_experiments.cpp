#include <cmath>

#include "doctest.h"
#include "msmhd/experiments.hpp"
#include "test_support.hpp"

using namespace msmhd;

namespace {
const double kPi = 3.14159265358979323846;
}

TEST_CASE("degenerate configuration: eps = delta = 1, nonlinearities disabled") {
    // with advection off the temperature blocks of the two systems are the
    // same linear recursion driven by the same increments, so the error sits
    // at machine scale
    ExperimentConfig cfg;
    cfg.system = "full";
    cfg.grid_n = 8;
    cfg.params = make_params(1.0, 1.0, 0.1, 1.0, kPi / 4, {0, 0, 1});
    cfg.noise = default_noise_config(77, 0.2);
    cfg.step.dt = 1e-3;
    cfg.step.advection = false;
    cfg.horizon = 0.2;
    cfg.n_traj = 4;
    cfg.init.kind = InitSampler::Kind::GaussianLowMode;
    cfg.init.amplitude = 0.3;
    cfg.init.seed = 78;
    cfg.eps_delta_list = {{1.0, 1.0}};

    const ConvergenceResult res = run_convergence(cfg);
    REQUIRE(res.rows.size() == 1);
    CHECK(res.rows[0].mean_sup_theta_err < 1e-12);
}

TEST_CASE("convergence experiment: temperature error shrinks with eps + delta") {
    ExperimentConfig cfg;
    cfg.system = "full";
    cfg.grid_n = 8;
    cfg.params = make_params(1.0, 1.0, 0.1, 1.0, kPi / 4, {0, 0, 1});
    cfg.noise = default_noise_config(81, 0.05);
    cfg.step.dt = 1e-3;
    cfg.horizon = 0.25;
    cfg.n_traj = 8;
    cfg.init.kind = InitSampler::Kind::GaussianLowMode;
    cfg.init.amplitude = 0.3;
    cfg.init.seed = 82;
    cfg.eps_delta_list = {{0.1, 0.1}, {0.005, 0.005}};

    const ConvergenceResult res = run_convergence(cfg);
    REQUIRE(res.rows.size() == 2);
    CHECK(res.theta_decreasing);
    CHECK(res.slope_theta > 0.0);
    // rows come back sorted by decreasing eps + delta
    CHECK(res.rows[0].eps == 0.1);
    CHECK(res.rows[1].eps == 0.005);
}

TEST_CASE("contraction probe: coupled limit ensembles approach each other") {
    ExperimentConfig cfg;
    cfg.system = "limit";
    cfg.grid_n = 8;
    cfg.params = make_params(1.0, 1.0, 0.1, 1.0, kPi / 4, {0, 0, 1});
    cfg.noise = default_noise_config(91, 0.05);
    cfg.step.dt = 1e-3;
    cfg.samples = 16;
    cfg.checkpoints = {0.5, 1.0, 2.0};
    cfg.init.kind = InitSampler::Kind::GaussianLowMode;
    cfg.init.amplitude = 0.4;
    cfg.init.seed = 92;
    cfg.init_b.kind = InitSampler::Kind::SingleMode;
    cfg.init_b.k = {1, 1, 0};
    cfg.init_b.amplitude = 1.0;

    const ContractionResult res = run_contraction_probe(cfg);
    REQUIRE(res.rows.size() == 3);
    CHECK(res.upper_decreasing);
    CHECK(res.rows.back().w_upper < res.rows.front().w_upper);
}
