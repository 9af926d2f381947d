#include <axrx/metrics.hpp>
#include <axrx/ops.hpp>
#include <axrx/rng.hpp>
#include <axrx/tape.hpp>
#include <benchmark/benchmark.h>

using namespace axrx;

namespace {

Tensor filled(Shape shape, std::uint64_t seed, bool grad = false) {
    Tensor t(std::move(shape), 0.0, grad);
    Rng rng(seed);
    for (auto& v : t.mutable_data()) v = rng.uniform();
    return t;
}

void BM_Conv2d(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Tensor x = filled({n, 8, 15, 15}, 1), w = filled({16, 8, 3, 3}, 2);
    for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, w));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Conv2d)->Arg(1)->Arg(32);

void BM_Conv2dBackward(benchmark::State& state) {
    Tensor x = filled({32, 8, 15, 15}, 1, true), w = filled({16, 8, 3, 3}, 2, true);
    for (auto _ : state) {
        Tape tape;
        tape.backward(sum(conv2d(x, w)));
    }
}
BENCHMARK(BM_Conv2dBackward);

void BM_Matmul(benchmark::State& state) {
    Tensor a = filled({64, 1024}, 3), b = filled({1024, 128}, 4);
    for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
}
BENCHMARK(BM_Matmul);

void BM_Auc(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<double> s(n);
    std::vector<std::uint8_t> y(n);
    Rng rng(5);
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = rng.uniform();
        y[i] = rng.bernoulli(0.3);
    }
    for (auto _ : state) benchmark::DoNotOptimize(auc(s, y));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Auc)->Arg(600)->Arg(100000);

}  // namespace
BENCHMARK_MAIN();
