#include <benchmark/benchmark.h>

#include "perseg/construction.hpp"
#include "perseg/eigen.hpp"
#include "perseg/elliptic.hpp"
#include "perseg/logistic.hpp"

using namespace perseg;

namespace {

const SegregatedState& state() {
    static const SegregatedState s = polish(assemble_v(2 * find_L_threshold(CoefficientProfile{}).L_bar,
                                                       CoefficientProfile{}, 1026));
    return s;
}

void BM_Phi(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(phi(1.0, 10.0, 0.7, 2.0, n));
}
BENCHMARK(BM_Phi)->Arg(1024)->Arg(4096)->Arg(16384);

void BM_Threshold(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(find_L_threshold(CoefficientProfile{}));
}
BENCHMARK(BM_Threshold)->Unit(benchmark::kMillisecond);

void BM_PrincipalScalar(benchmark::State& st) {
    const auto& s = state();
    const auto q = f1_of(s.v, s.coefficients, 1.0, 1.0);
    for (auto _ : st) benchmark::DoNotOptimize(principal_scalar(q).lambda);
}
BENCHMARK(BM_PrincipalScalar)->Unit(benchmark::kMillisecond);

void BM_SystemNewton(benchmark::State& st) {
    const auto& s = state();
    const double k = static_cast<double>(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(continue_in_k({k}, s).complete);
}
BENCHMARK(BM_SystemNewton)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
