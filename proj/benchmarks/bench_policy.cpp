#include <benchmark/benchmark.h>

#include "rift/transformer_policy.hpp"

using namespace rift;

namespace {

Vocabulary bench_vocab() {
    std::vector<std::string> content;
    for (int i = 0; i < 24; ++i) content.push_back(std::to_string(i));
    return Vocabulary::standard(std::move(content));
}

}  // namespace

static void BM_TransformerForward(benchmark::State& state) {
    TransformerConfig cfg;
    cfg.d_model = 32;
    cfg.n_layers = 2;
    cfg.n_heads = 2;
    cfg.max_len = 32;
    TransformerPolicy policy(bench_vocab(), cfg, Rng(3));
    TokenSeq prompt{Vocabulary::kBos, 5, 4, 6, Vocabulary::kEquals};
    TokenSeq response{7, Vocabulary::kEos};
    for (auto _ : state) {
        LogProb lp = policy.log_prob(prompt, response);
        benchmark::DoNotOptimize(lp.total);
    }
}
BENCHMARK(BM_TransformerForward);

static void BM_TransformerSample(benchmark::State& state) {
    TransformerConfig cfg;
    cfg.d_model = 32;
    cfg.n_layers = 2;
    cfg.n_heads = 2;
    cfg.max_len = 32;
    TransformerPolicy policy(bench_vocab(), cfg, Rng(3));
    TokenSeq prompt{Vocabulary::kBos, 5, 4, 6, Vocabulary::kEquals};
    Rng rng(9);
    for (auto _ : state) {
        auto responses = policy.sample_responses(prompt, 8, 0.7, 1, rng);
        benchmark::DoNotOptimize(responses.size());
    }
}
BENCHMARK(BM_TransformerSample);
