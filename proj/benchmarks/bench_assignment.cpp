#include <benchmark/benchmark.h>

#include <random>

#include "msmhd/metrics.hpp"

using namespace msmhd;

namespace {

void BM_assignment(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::vector<double>> cost(n, std::vector<double>(n));
    for (auto& row : cost)
        for (auto& c : row) c = unif(rng);
    for (auto _ : state) {
        AssignmentResult res = solve_assignment(cost);
        benchmark::DoNotOptimize(res.cost);
    }
}
BENCHMARK(BM_assignment)->Arg(32)->Arg(128)->Arg(512);

}  // namespace
