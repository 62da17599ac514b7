#include <benchmark/benchmark.h>

#include "conewave/freeres.hpp"
#include "conewave/perturbres.hpp"
#include "conewave/propagate.hpp"
#include "conewave/specfun.hpp"

using namespace conewave;

static void BM_BesselJ(benchmark::State& st) {
    const double nu = static_cast<double>(st.range(0)) + 0.5;
    double x = 0.1;
    for (auto _ : st) {
        benchmark::DoNotOptimize(bessel(BesselKind::J, nu, x));
        x = x < 100.0 ? x * 1.07 : 0.1;
    }
}
BENCHMARK(BM_BesselJ)->Arg(0)->Arg(10)->Arg(60);

static void BM_BesselH1(benchmark::State& st) {
    const double nu = static_cast<double>(st.range(0)) + 0.5;
    double x = 0.1;
    for (auto _ : st) {
        benchmark::DoNotOptimize(bessel(BesselKind::H1, nu, x));
        x = x < 100.0 ? x * 1.07 : 0.1;
    }
}
BENCHMARK(BM_BesselH1)->Arg(0)->Arg(10)->Arg(60);

static void BM_SeparableApply(benchmark::State& st) {
    auto g = build_grid(3, 20.0, static_cast<int>(st.range(0)));
    const auto K = free_separable(g, 1.5, 3.0, KernelSign::Plus);
    const CVec f = CVec::Ones(static_cast<Eigen::Index>(g->size()));
    for (auto _ : st) benchmark::DoNotOptimize(K.apply(f));
    st.SetComplexityN(static_cast<std::int64_t>(g->size()));
}
BENCHMARK(BM_SeparableApply)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

static void BM_PerturbedSolve(benchmark::State& st) {
    auto g = build_grid(3, 20.0, static_cast<int>(st.range(0)));
    const auto V = make_potential("gaussian", {1.0, 1.0});
    const CVec f = CVec::Ones(static_cast<Eigen::Index>(g->size()));
    for (auto _ : st) {
        PerturbedSolver P(g, 0.5, 2.0, KernelSign::Plus, V);
        benchmark::DoNotOptimize(P.apply(f));
    }
    st.SetComplexityN(static_cast<std::int64_t>(g->size()));
}
BENCHMARK(BM_PerturbedSolve)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

static void BM_FredholmIndicator(benchmark::State& st) {
    auto g = build_grid(3, 20.0, static_cast<int>(st.range(0)));
    const auto V = make_potential("gaussian", {1.0, 1.0});
    PerturbedSolver P(g, 0.5, 2.0, KernelSign::Plus, V);
    for (auto _ : st) benchmark::DoNotOptimize(P.fredholm_indicator(1.0));
}
BENCHMARK(BM_FredholmIndicator)->Arg(600)->Arg(2400);

static void BM_SpectralTable(benchmark::State& st) {
    auto g = build_grid(3, 12.0, 400);
    const auto f = gaussian_profile(g, 4.0, 0.6);
    PropagatorRequest req;
    req.nu = 0.5;
    if (st.range(0) != 0) req.V = make_potential("gaussian", {0.3, 1.0}, 8.0);
    for (auto _ : st) benchmark::DoNotOptimize(spectral_table(req, f, {1.0, 2.0, 5.0}));
}
BENCHMARK(BM_SpectralTable)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_PropagateTable(benchmark::State& st) {
    auto g = build_grid(3, 12.0, 400);
    PropagatorRequest req;
    const auto T = spectral_table(req, gaussian_profile(g, 4.0, 0.6), {1.0, 2.0, 5.0});
    const std::vector<double> ts{10.0, 30.0, 100.0};
    for (auto _ : st) benchmark::DoNotOptimize(propagate_table(T, ts));
}
BENCHMARK(BM_PropagateTable)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
