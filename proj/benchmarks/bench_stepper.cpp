#include <benchmark/benchmark.h>

#include "msmhd/ensemble.hpp"
#include "msmhd/stepper.hpp"

using namespace msmhd;

namespace {

PhysParams bench_params(double eps, double delta) {
    return make_params(eps, delta, 0.1, 1.0, 0.785, {0, 0, 1});
}

void BM_step_limit(benchmark::State& state) {
    auto g = make_grid(static_cast<int>(state.range(0)));
    auto p = bench_params(1.0, 1.0);
    StepConfig cfg;
    cfg.dt = 1e-3;
    LimitStepper stepper(g, p, cfg);
    NoiseConfig noise = default_noise_config(1, 0.05);
    InitSampler init;
    init.kind = InitSampler::Kind::GaussianLowMode;
    init.amplitude = 0.2;
    LimitState s(g);
    s.theta = sample_theta(init, g, 0);
    std::uint64_t n = 0;
    for (auto _ : state) stepper.step(s, sample_increment(noise, g, cfg.dt, n++, 0));
}
BENCHMARK(BM_step_limit)->Arg(8)->Arg(16);

void BM_step_full(benchmark::State& state) {
    auto g = make_grid(static_cast<int>(state.range(0)));
    auto p = bench_params(0.1, 0.1);
    StepConfig cfg;
    cfg.dt = 1e-3;
    FullStepper stepper(g, p, cfg);
    NoiseConfig noise = default_noise_config(1, 0.05);
    FullInitSpec init;
    init.theta.kind = InitSampler::Kind::GaussianLowMode;
    init.theta.amplitude = 0.2;
    FullState s = sample_full(init, g, p, 0);
    std::uint64_t n = 0;
    for (auto _ : state) stepper.step(s, sample_increment(noise, g, cfg.dt, n++, 0));
}
BENCHMARK(BM_step_full)->Arg(8)->Arg(16);

}  // namespace
