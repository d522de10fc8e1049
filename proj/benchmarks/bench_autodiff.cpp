#include <benchmark/benchmark.h>

#include "rift/graph.hpp"
#include "rift/rng.hpp"

using namespace rift;

static void BM_MatmulForwardBackward(benchmark::State& state) {
    std::size_t n = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    Tensor a = Tensor::zeros({n, n}, true);
    Tensor b = Tensor::zeros({n, n}, true);
    for (double& v : a.values) v = rng.next_gaussian();
    for (double& v : b.values) v = rng.next_gaussian();
    for (auto _ : state) {
        autodiff::Graph g;
        auto na = g.leaf(a);
        auto nb = g.leaf(b);
        auto loss = g.mean_all(g.matmul(na, nb));
        g.backward(loss);
        benchmark::DoNotOptimize(g.grad(na).data());
    }
}
BENCHMARK(BM_MatmulForwardBackward)->Arg(16)->Arg(32)->Arg(64);

static void BM_SoftmaxRows(benchmark::State& state) {
    std::size_t rows = 32;
    std::size_t cols = static_cast<std::size_t>(state.range(0));
    Rng rng(2);
    Tensor logits = Tensor::zeros({rows, cols}, true);
    for (double& v : logits.values) v = rng.next_gaussian();
    for (auto _ : state) {
        autodiff::Graph g;
        auto x = g.leaf(logits);
        auto loss = g.mean_all(g.log_softmax_rows(x));
        g.backward(loss);
        benchmark::DoNotOptimize(g.grad(x).data());
    }
}
BENCHMARK(BM_SoftmaxRows)->Arg(16)->Arg(64)->Arg(256);
