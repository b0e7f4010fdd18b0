#include <numbers>
#include <random>

#include <benchmark/benchmark.h>

#include "iff/driver.hpp"
#include "iff/experiments.hpp"
#include "iff/hankel_focus.hpp"
#include "iff/localize.hpp"
#include "iff/signal_model.hpp"

using namespace iff;

namespace
{

MeasurementSet four_sources(double sigma)
{
    const SamplingGrid grid(1.0, 25);
    const IlluminationSpec law{UniformLaw{1.0, 1.0 + std::numbers::sqrt3}, 10};
    const SourceModel src = uniformly_spaced_sources(4, 0.5);
    const IlluminationMatrix L = draw_illumination(law, 4, 1);
    return add_noise(synthesize(src, L, grid), draw_noise({sigma, 2}, law.t_count, grid));
}

HankelStack stack_of(const MeasurementSet& y)
{
    return HankelStack::from_rows(y.data, y.grid.step(), y.grid.node(-y.grid.k_half()));
}

} // namespace

static void BM_FocusObjective(benchmark::State& state)
{
    const HankelStack s = stack_of(four_sources(1e-4));
    const HankelMatrix h = combine(s, FocusCoefficients(Eigen::VectorXd::Ones(s.t_count())));
    for (auto _ : state)
        benchmark::DoNotOptimize(focus_objective(h));
}
BENCHMARK(BM_FocusObjective);

static void BM_FocusValueAndGradient(benchmark::State& state)
{
    const HankelStack s = stack_of(four_sources(1e-4));
    const Eigen::VectorXd q = Eigen::VectorXd::LinSpaced(s.t_count(), 1.0, 2.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(focus_value_and_gradient(s, q));
}
BENCHMARK(BM_FocusValueAndGradient);

static void BM_FocusExcess(benchmark::State& state)
{
    const HankelStack s = stack_of(four_sources(1e-4));
    const Eigen::VectorXd q = Eigen::VectorXd::LinSpaced(s.t_count(), 1.0, 2.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(focus_excess(s, q));
}
BENCHMARK(BM_FocusExcess);

static void BM_MusicSingle(benchmark::State& state)
{
    const MeasurementSet y = four_sources(1e-4);
    const HankelMatrix h = build_hankel(y.data.row(0).transpose());
    const SearchWindow w = safe_window(std::numbers::pi, y.grid.step());
    const int coarse = default_coarse_points(w, 1.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(music_localize_single(h, y.grid.step(), w, coarse, -1.0));
}
BENCHMARK(BM_MusicSingle);

static void BM_RunIff(benchmark::State& state)
{
    const MeasurementSet y = four_sources(1e-4);
    const IFFConfig cfg = experiment_iff_config();
    for (auto _ : state)
        benchmark::DoNotOptimize(run_iff(y, 1e-4, cfg));
}
BENCHMARK(BM_RunIff)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
