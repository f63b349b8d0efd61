#include "hdrelay/df.hpp"
#include "hdrelay/experiments.hpp"
#include "hdrelay/optimizer.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace hdrelay;

namespace {

// Two-relay DF rate over a free schedule and power split; 10 dims.
SearchSpec df_spec() {
    const double pos[] = {0.0, 0.35, 0.65, 1.0};
    const auto net = linear_network(pos, 4.0, 10.0, 1.0, Combining::NonCoherent);
    SearchSpec s;
    s.label = "bench-df";
    s.dims.assign(10, Dim{});
    s.blocks = {{ConstraintType::Simplex, {0, 1, 2, 3, 4, 5, 6, 7}}};
    s.objective = [net](int, std::span<const double> x) {
        StateDistribution d;
        d.num_relays = 2;
        d.pmf.assign(x.begin(), x.begin() + 8);
        PowerAllocation a(2);
        a.set_nu(0, 0, 1, x[8]);
        a.set_nu(0, 1, 1, 0.5 * (1.0 - x[8]));
        a.set_nu(0, 2, 1, 0.5 * (1.0 - x[8]));
        a.set_nu(1, 1, 1, x[9]);
        a.set_nu(1, 2, 1, 1.0 - x[9]);
        a.set_nu(2, 2, 1, 1.0);
        return df_rate(net, a, d, 1).total;
    };
    return s;
}

std::vector<std::vector<double>> random_points(const SearchSpec& s, std::size_t n) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<double>> pts(n, std::vector<double>(s.dims.size()));
    for (auto& p : pts)
        for (auto& v : p) v = u(rng);
    for (auto& p : pts) p = project(s, p);
    return pts;
}

void BM_BatchParallel(benchmark::State& st) {
    const auto s = df_spec();
    const auto pts = random_points(s, static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(evaluate_batch(s, 0, pts));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_BatchSerial(benchmark::State& st) {
    const auto s = df_spec();
    const auto pts = random_points(s, static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(evaluate_batch_serial(s, 0, pts));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

SweepSpec sweep() {
    SweepSpec s;
    s.kind = SweepKind::TwoRelayDistance;
    s.step = 0.25;
    s.budget = 300;
    s.protocols = {Protocol::DF, Protocol::CF, Protocol::Cutset};
    return s;
}

void BM_SweepParallel(benchmark::State& st) {
    const auto s = sweep();
    for (auto _ : st) benchmark::DoNotOptimize(run_sweep(s, true));
}

void BM_SweepSerial(benchmark::State& st) {
    const auto s = sweep();
    for (auto _ : st) benchmark::DoNotOptimize(run_sweep(s, false));
}

}  // namespace

BENCHMARK(BM_BatchParallel)->Arg(64)->Arg(512);
BENCHMARK(BM_BatchSerial)->Arg(64)->Arg(512);
BENCHMARK(BM_SweepParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
