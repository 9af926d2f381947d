#include <axrx/attacks.hpp>
#include <axrx/defenses.hpp>
#include <axrx/models.hpp>
#include <axrx/rng.hpp>
#include <benchmark/benchmark.h>

using namespace axrx;

namespace {

Tensor images(std::size_t n, std::uint64_t seed) {
    Tensor t({n, 1, 32, 32});
    Rng rng(seed);
    for (auto& v : t.mutable_data()) v = rng.uniform();
    return t;
}

Tensor labels(std::size_t n) {
    Tensor y({n, 6});
    Rng rng(7);
    for (auto& v : y.mutable_data()) v = rng.bernoulli(0.4) ? 1.0 : 0.0;
    return y;
}

void BM_Forward(benchmark::State& state) {
    const Model m(static_cast<Arch>(state.range(0)), 32, 6, 1);
    const Tensor x = images(64, 2);
    for (auto _ : state) benchmark::DoNotOptimize(predict(m, x));
    state.SetLabel(std::string(arch_name(m.arch())));
    state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_Forward)->DenseRange(0, 3);

void BM_Attack(benchmark::State& state) {
    const Model m(Arch::kCnnSmall, 32, 6, 1);
    const Tensor x = images(64, 3), y = labels(64);
    AttackSpec s;
    s.method = all_methods()[static_cast<std::size_t>(state.range(0))];
    s.iterations = 10;
    for (auto _ : state) benchmark::DoNotOptimize(run_attack(m, x, y, s));
    state.SetLabel(std::string(method_name(s.method)));
    state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_Attack)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);

void BM_Pdt(benchmark::State& state) {
    const Tensor x = images(64, 4);
    DefenseSpec s;
    for (auto _ : state) benchmark::DoNotOptimize(pdt_transform(x, s));
    state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_Pdt)->Unit(benchmark::kMillisecond);

}  // namespace
