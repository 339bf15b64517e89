#include <benchmark/benchmark.h>

#include "modlaw/algebra.hpp"
#include "modlaw/elimination.hpp"
#include "modlaw/experiments.hpp"

using namespace modlaw;

namespace {

LabelledGraph triangle() { return LabelledGraph::from_edges(0, 3, std::vector<Edge>{{0, 1}, {0, 2}, {1, 2}}); }

LabelledGraph c4() { return LabelledGraph::from_edges(0, 4, std::vector<Edge>{{0, 1}, {1, 2}, {2, 3}, {0, 3}}); }

void BM_CountInjTriangle(benchmark::State& state)
{
    auto g = sample_gnp(static_cast<int>(state.range(0)), 0.5, 1);
    const auto f = triangle();
    const std::vector<int> none;
    for (auto _ : state)
        benchmark::DoNotOptimize(count_inj(f, g, none));
}
BENCHMARK(BM_CountInjTriangle)->Arg(20)->Arg(40)->Arg(80);

void BM_CountCopiesFast(benchmark::State& state)
{
    auto g = sample_gnp(static_cast<int>(state.range(0)), 0.5, 1);
    const auto f = triangle();
    for (auto _ : state)
        benchmark::DoNotOptimize(count_copies_fast(f, g));
}
BENCHMARK(BM_CountCopiesFast)->Arg(30)->Arg(60)->Arg(120);

void BM_CountCopiesC4(benchmark::State& state)
{
    auto g = sample_gnp(static_cast<int>(state.range(0)), 0.5, 1);
    const auto f = c4();
    const std::vector<int> none;
    for (auto _ : state)
        benchmark::DoNotOptimize(count_copies(f, g, none));
}
BENCHMARK(BM_CountCopiesC4)->Arg(12)->Arg(24);

void BM_CanonicalForm(benchmark::State& state)
{
    auto g = sample_gnp(static_cast<int>(state.range(0)), 0.5, 7);
    for (auto _ : state)
        benchmark::DoNotOptimize(canonical_form(g));
}
BENCHMARK(BM_CanonicalForm)->Arg(6)->Arg(10)->Arg(14);

void BM_FreqVector(benchmark::State& state)
{
    auto g = sample_gnp(30, 0.5, 3);
    const std::vector<int> w{0};
    const int a = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(freq_vector(g, w, a, 2));
}
BENCHMARK(BM_FreqVector)->Arg(2)->Arg(3);

void BM_BuildPsi(benchmark::State& state)
{
    auto phi = parse("forall x. parity y. E(x,y)");
    for (auto _ : state)
        benchmark::DoNotOptimize(build_psi(*phi, 2));
}
BENCHMARK(BM_BuildPsi);

void BM_SampleGnp(benchmark::State& state)
{
    std::uint64_t seed = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(sample_gnp(static_cast<int>(state.range(0)), 0.5, seed++));
}
BENCHMARK(BM_SampleGnp)->Arg(30)->Arg(1000);

} // namespace

BENCHMARK_MAIN();
