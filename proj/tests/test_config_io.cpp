#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "msmhd/config.hpp"
#include "msmhd/snapshot.hpp"
#include "test_support.hpp"

using namespace msmhd;

namespace {
ExperimentConfig sample_config() {
    ExperimentConfig cfg;
    cfg.system = "full";
    cfg.grid_n = 8;
    cfg.params = make_params(0.1, 0.05, 0.2, 0.7, 0.31, {0, 0.6, 0.8});
    cfg.noise = default_noise_config(42, 0.25);
    cfg.noise.entries.push_back({{2, 1, 0}, 1, 0.125});
    cfg.step.dt = 5e-4;
    cfg.step.advection = false;
    cfg.step.stop_l3sq = 100.0;
    cfg.horizon = 2.5;
    cfg.n_traj = 16;
    cfg.record_every = 10;
    cfg.init.kind = InitSampler::Kind::GaussianLowMode;
    cfg.init.amplitude = 0.3;
    cfg.init.kmax = 2;
    cfg.init.seed = 9;
    cfg.init_b.kind = InitSampler::Kind::SingleMode;
    cfg.init_b.k = {1, 1, 0};
    cfg.init_b.parity = 1;
    cfg.init_b.amplitude = 1.5;
    cfg.ub_mode = FullInitSpec::UB::Perturbed;
    cfg.perturb_amplitude = 0.75;
    cfg.eta = 0.013;
    cfg.eps_delta_list = {{0.1, 0.1}, {0.01, 0.01}};
    cfg.burn_in = 7.0;
    cfg.checkpoints = {1.0, 3.0, 9.0};
    cfg.samples = 64;
    cfg.shared_noise = false;
    cfg.out_dir = "results";
    cfg.write_final_snapshots = true;
    cfg.snapshot_times = {0.5, 1.0};
    return cfg;
}
}  // namespace

TEST_CASE("config round-trips losslessly") {
    const ExperimentConfig cfg = sample_config();
    const std::string text = serialize_config(cfg);
    const ExperimentConfig back = parse_config(text);
    CHECK(back == cfg);
    // and serialization is a fixed point
    CHECK(serialize_config(back) == text);
}

TEST_CASE("default config round-trips too") {
    ExperimentConfig cfg;
    const ExperimentConfig back = parse_config(serialize_config(cfg));
    CHECK(back == cfg);
}

TEST_CASE("config parse errors carry line numbers") {
    CHECK_THROWS_AS(parse_config("x = 1\n"), ConfigError);  // key outside section
    try {
        parse_config("[params]\neps = 0.1\nbogus_key = 3\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line == 3);
    }
    try {
        parse_config("[grid]\nn = eight\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line == 2);
    }
    CHECK_THROWS_AS(parse_config("[system]\ntype = warp\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[noise]\nmode = 1 0 0\n"), ConfigError);
}

TEST_CASE("eta and burn-in policy defaults") {
    ExperimentConfig cfg;
    cfg.noise = default_noise_config(0, 1.0);
    cfg.params.kappa = 1.0;
    cfg.params.nu = 0.1;
    const double s2 = cfg.noise.hs_norm() * cfg.noise.hs_norm();
    CHECK(cfg.eta_or_default() == doctest::Approx(std::min(0.1 / (4 * s2), 0.05)));
    cfg.eta = 0.02;
    CHECK(cfg.eta_or_default() == 0.02);
    CHECK(cfg.burn_in_or_default() == doctest::Approx(10.0));
    cfg.burn_in = 3.0;
    CHECK(cfg.burn_in_or_default() == 3.0);
}

TEST_CASE("ensemble CSV round-trip is exact") {
    auto g = make_grid(4);
    auto p = make_params(1.0, 1.0, 0.1, 1.0, 0.7, {0, 0, 1});
    StepConfig cfg;
    cfg.dt = 1e-3;
    NoiseConfig noise = default_noise_config(5, 0.4);
    RunSpec spec;
    spec.horizon = 0.02;
    spec.record_every = 4;
    spec.observables.push_back({Observable::Kind::ThetaCoeff, {1, 0, 0}, 0, 0});
    const EnsembleRecord rec = run_ensemble(spec, g, p, cfg, noise, InitSampler{}, 3);

    const std::string prefix = (std::filesystem::temp_directory_path() / "msmhd_csv_test").string();
    write_ensemble_csv(prefix, rec);
    const EnsembleRecord back = read_ensemble_csv(prefix);

    REQUIRE(back.columns == rec.columns);
    REQUIRE(back.trajectories.size() == rec.trajectories.size());
    for (std::size_t t = 0; t < rec.trajectories.size(); ++t) {
        REQUIRE(back.trajectories[t].rows.size() == rec.trajectories[t].rows.size());
        for (std::size_t r = 0; r < rec.trajectories[t].rows.size(); ++r)
            for (std::size_t c = 0; c < rec.trajectories[t].rows[r].size(); ++c)
                CHECK(back.trajectories[t].rows[r][c] == rec.trajectories[t].rows[r][c]);
        for (const auto& [k, v] : rec.trajectories[t].summary)
            CHECK(back.trajectories[t].summary.at(k) == v);
    }
    std::remove((prefix + "_rows.csv").c_str());
    std::remove((prefix + "_summary.csv").c_str());
}

TEST_CASE("field snapshots round-trip (binary, complex64)") {
    auto g = make_grid(8);
    auto p = make_params(0.1, 0.2, 0.3, 0.4, 0.5, {0, 0, 1});
    const std::string dir = std::filesystem::temp_directory_path().string();

    SUBCASE("scalar") {
        const SpectralScalar f = test::random_scalar(g, 11);
        const std::string path = dir + "/msmhd_snap_scalar.msf";
        write_scalar_snapshot(path, f, p, 1.25);
        const SnapshotInfo info = peek_snapshot(path);
        CHECK(info.n == 8);
        CHECK(info.kind == 0);
        CHECK(info.time == 1.25);
        CHECK(info.params.nu == 0.3);
        const SpectralScalar back = read_scalar_snapshot(path);
        double worst = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i)
            worst = std::max(worst, std::abs(f[i] - back[i]));
        CHECK(worst < 1e-6);  // complex64 storage
        std::remove(path.c_str());
    }

    SUBCASE("full state") {
        FullState s(g);
        s.U = test::random_solenoidal(g, 21);
        s.B = test::random_solenoidal(g, 22);
        s.Theta = test::random_scalar(g, 23);
        s.time = 3.5;
        const std::string path = dir + "/msmhd_snap_full.msf";
        write_full_snapshot(path, s, p);
        const FullState back = read_full_snapshot(path);
        CHECK(back.time == 3.5);
        SpectralVector du = back.U;
        du -= s.U;
        CHECK(norm_l2(du) < 1e-4);
        CHECK_THROWS(read_scalar_snapshot(path));  // kind mismatch
        std::remove(path.c_str());
    }
}

TEST_CASE("init sampler from snapshot file") {
    auto g = make_grid(8);
    auto p = make_params(1, 1, 0.1, 1, 0.7, {0, 0, 1});
    const SpectralScalar f = test::random_scalar(g, 31);
    const std::string path =
        (std::filesystem::temp_directory_path() / "msmhd_init_snap.msf").string();
    write_scalar_snapshot(path, f, p);
    InitSampler init;
    init.kind = InitSampler::Kind::Snapshot;
    init.snapshot_path = path;
    SpectralScalar got = sample_theta(init, g, 0);
    got -= f;
    CHECK(norm_l2(got) < 1e-4);
    std::remove(path.c_str());
}
