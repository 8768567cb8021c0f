#include <benchmark/benchmark.h>

#include "rsma/channel.hpp"
#include "rsma/optimize.hpp"
#include "rsma/qcqp.hpp"
#include "rsma/wmmse.hpp"

using namespace rsma;

namespace {

SystemConfig bench_config(int M, int K)
{
    SystemConfig c;
    c.M = M;
    c.K = K;
    c.alpha = 0.5;
    c.snr_db = 20.0;
    c.qos_zero = 0.3;
    return c;
}

void BM_DrawSamples(benchmark::State& state)
{
    const SystemConfig c = bench_config(2, 3);
    const ChannelRealization r = draw_channel(c, 1);
    std::uint64_t seed = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(draw_conditional_samples(r, c, static_cast<int>(state.range(0)), ++seed));
}
BENCHMARK(BM_DrawSamples)->Arg(100)->Arg(1000);

void BM_SubproblemSolve(benchmark::State& state)
{
    const SystemConfig c = bench_config(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)) + 1);
    const ChannelRealization r = draw_channel(c, 2);
    const ChannelSampleSet s = draw_conditional_samples(r, c, 100, 3);
    const PrecoderSet init = init_precoders(r, c, Partitioning::PP, true, 4);
    const CoeffBundle cb = assemble_coefficients(s, mmse_state(s, init, c, Partitioning::PP));
    SubproblemOptions sub;
    sub.qos_zero = c.qos_zero;
    sub.power = c.snr_linear();
    const PpSubproblem sp = build_pp_subproblem(cb, c, sub);
    for (auto _ : state)
        benchmark::DoNotOptimize(solve(sp.problem, QcqpTolerances{1e-9, 1e-9, 200}));
}
BENCHMARK(BM_SubproblemSolve)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_PpRsmaAo(benchmark::State& state)
{
    const SystemConfig c = bench_config(2, 3);
    const ChannelRealization r = draw_channel(c, 5);
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_pp_asr(r, c, static_cast<int>(state.range(0)), 6));
}
BENCHMARK(BM_PpRsmaAo)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
