#include <benchmark/benchmark.h>

#include <random>

#include "msmhd/ops.hpp"

using namespace msmhd;

namespace {

PhysParams bench_params() { return make_params(1.0, 1.0, 0.1, 1.0, 0.785, {0, 0, 1}); }

SpectralScalar random_field(const GridPtr& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss;
    SpectralScalar f(g);
    for (std::size_t flat : g->half_modes()) {
        const Complex c{gauss(rng), gauss(rng)};
        f[flat] = c;
        f[g->conjugate_index(flat)] = std::conj(c);
    }
    return f;
}

void BM_transform_roundtrip(benchmark::State& state) {
    auto g = make_grid(static_cast<int>(state.range(0)));
    Transform tf(g);
    const SpectralScalar f = random_field(g, 1);
    std::vector<double> phys;
    SpectralScalar back;
    for (auto _ : state) {
        tf.inverse(f, phys);
        tf.forward(phys, back);
        benchmark::DoNotOptimize(back.data());
    }
}
BENCHMARK(BM_transform_roundtrip)->Arg(8)->Arg(16)->Arg(32);

void BM_advect(benchmark::State& state) {
    auto g = make_grid(static_cast<int>(state.range(0)));
    auto p = bench_params();
    SpectralWorkspace ws(g);
    const SpectralScalar theta = random_field(g, 2);
    SpectralVector u, b;
    apply_constitutive(theta, p, u, b);
    for (auto _ : state) {
        SpectralScalar w = advect(u, theta, ws);
        benchmark::DoNotOptimize(w.data());
    }
}
BENCHMARK(BM_advect)->Arg(8)->Arg(16)->Arg(32);

void BM_constitutive_vs_solve(benchmark::State& state) {
    auto g = make_grid(16);
    auto p = bench_params();
    const SpectralScalar theta = random_field(g, 3);
    if (state.range(0) == 0) {
        SpectralVector u, b;
        for (auto _ : state) {
            apply_constitutive(theta, p, u, b);
            benchmark::DoNotOptimize(u.x.data());
        }
    } else {
        for (auto _ : state) {
            SpectralVector u = apply_Q_inverse_drive(theta, p);
            benchmark::DoNotOptimize(u.x.data());
        }
    }
}
BENCHMARK(BM_constitutive_vs_solve)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
