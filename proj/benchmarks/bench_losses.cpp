#include <benchmark/benchmark.h>

#include "rift/losses.hpp"

using namespace rift;

namespace {

struct LossBench {
    Vocabulary vocab = Vocabulary::raw({"a", "b", "c", "d", "e", "f", "g", "h"});
    TokenSeq prompt{0};
    TabularPolicy policy{vocab, 8};
    std::vector<TrainSample> batch;

    LossBench() {
        policy.register_prompt(prompt);
        Rng rng(5);
        policy.randomize(rng, 0.8);
        for (int i = 0; i < 32; ++i) {
            TrainSample s;
            s.prompt = prompt;
            s.response = TokenSeq(8, static_cast<TokenId>(i % 8));
            s.reward = i % 4 == 0 ? 1.0 : -0.2;
            s.correct = s.reward > 0;
            batch.push_back(std::move(s));
        }
    }
};

}  // namespace

static void BM_RiftLossBackward(benchmark::State& state) {
    LossBench bench;
    for (auto _ : state) {
        autodiff::Graph g;
        auto binding = bench.policy.bind_parameters(g, true);
        LossGraph built =
            build_rift_loss(g, bench.policy, binding, bench.batch, LengthNorm::token_mean);
        g.backward(built.loss);
        benchmark::DoNotOptimize(g.grad(binding.nodes[0]).data());
    }
}
BENCHMARK(BM_RiftLossBackward);

static void BM_NaiveLossBackward(benchmark::State& state) {
    LossBench bench;
    for (auto _ : state) {
        autodiff::Graph g;
        auto binding = bench.policy.bind_parameters(g, true);
        LossGraph built =
            build_naive_signed_loss(g, bench.policy, binding, bench.batch, LengthNorm::token_mean);
        g.backward(built.loss);
        benchmark::DoNotOptimize(g.grad(binding.nodes[0]).data());
    }
}
BENCHMARK(BM_NaiveLossBackward);
