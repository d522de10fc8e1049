#include <cmath>
#include <sstream>

#include "doctest.h"
#include "rift/buffer.hpp"
#include "rift/tabular_policy.hpp"

using namespace rift;

namespace {

/// Generator that always emits the gold solution of its problem.
class GoldEcho : public Policy {
public:
    GoldEcho(Vocabulary vocab, std::vector<Problem> problems)
        : vocab_(std::move(vocab)), problems_(std::move(problems)) {}

    const Vocabulary& vocab() const override { return vocab_; }
    std::string family() const override { return "gold_echo"; }
    std::vector<Tensor*> parameters() override { return {}; }
    std::vector<const Tensor*> parameters() const override { return {}; }

    LogProb log_prob(const TokenSeq&, const TokenSeq& response) const override {
        LogProb lp;
        lp.per_token.assign(response.size(), 0.0);
        return lp;
    }

    std::vector<SampledResponse> sample_responses(const TokenSeq& prompt,
                                                  int k,
                                                  double,
                                                  std::size_t,
                                                  Rng&) const override {
        for (const Problem& p : problems_) {
            if (p.prompt == prompt) {
                return std::vector<SampledResponse>(static_cast<std::size_t>(k),
                                                    SampledResponse{p.gold_solution, 0.0});
            }
        }
        throw InputError("unknown prompt");
    }

    GraphBinding bind_parameters(autodiff::Graph&, bool) const override { return {}; }
    autodiff::NodeId per_token_log_probs(autodiff::Graph&,
                                         const GraphBinding&,
                                         const TokenSeq&,
                                         const TokenSeq&) const override {
        throw InputError("not differentiable");
    }
    nlohmann::json to_json() const override { return {}; }
    std::unique_ptr<Policy> clone() const override {
        return std::make_unique<GoldEcho>(*this);
    }

private:
    Vocabulary vocab_;
    std::vector<Problem> problems_;
};

TaskSpec small_task() {
    TaskSpec spec;
    spec.kind = TaskKind::modular_addition;
    spec.modulus = 5;
    return spec;
}

}  // namespace

TEST_CASE("gold-emitting generator yields an all-positive buffer") {
    TaskSpec spec = small_task();
    auto problems = generate_problems(spec, 10, 0);
    GoldEcho gen(spec.vocabulary(), problems);
    Buffer buffer = build_buffer(gen, problems, 8, 0.7, 1.0, -0.2, 0, 4);
    BufferStats st = buffer_stats(buffer);
    CHECK(st.n_problems == 10);
    CHECK(st.n_total == 80);
    CHECK(st.pos_ratio == 1.0);
    CHECK(st.n_mixed == 0);
    for (const BufferGroup& g : buffer.groups) {
        CHECK(g.samples.size() == 8);
        for (const RewardedSample& s : g.samples) {
            CHECK(s.reward == 1.0);
            CHECK(s.correct);
        }
    }
}

TEST_CASE("rewards take only the configured constants") {
    TaskSpec spec = small_task();
    auto problems = generate_problems(spec, 6, 2);
    Vocabulary vocab = spec.vocabulary();
    TabularPolicy gen(vocab, 2);
    for (const Problem& p : problems) gen.register_prompt(p.prompt);
    Rng rng(4);
    gen.randomize(rng, 1.0);
    Buffer buffer = build_buffer(gen, problems, 8, 0.7, 1.0, -0.2, 9, 2);
    for (const BufferGroup& g : buffer.groups) {
        for (const RewardedSample& s : g.samples) {
            CHECK((s.reward == 1.0 || s.reward == -0.2));
            CHECK(s.reward == (s.correct ? 1.0 : -0.2));
            CHECK(s.generator_logprob <= 0.0);
        }
    }
}

TEST_CASE("pos_ratio tracks a known per-sample correctness probability") {
    // Tabular policy whose first response position is uniform over two tokens,
    // exactly one of which completes a correct answer.
    TaskSpec spec = small_task();
    Vocabulary vocab = spec.vocabulary();
    auto problems = generate_problems(spec, 200, 5);
    TabularPolicy gen(vocab, 2);
    for (const Problem& p : problems) {
        gen.register_prompt(p.prompt);
        Tensor& logits = gen.logits(p.prompt);
        // Position 0: mass split between the right digit and a wrong one.
        TokenId right = p.answer[0];
        TokenId wrong = right == 5 ? 6 : 5;
        for (std::size_t c = 0; c < vocab.size(); ++c) {
            logits.at(0, c) = -30.0;
            logits.at(1, c) = -30.0;
        }
        logits.at(0, static_cast<std::size_t>(right)) = 0.0;
        logits.at(0, static_cast<std::size_t>(wrong)) = 0.0;
        logits.at(1, Vocabulary::kEos) = 0.0;  // always EOS
    }
    Buffer buffer = build_buffer(gen, problems, 8, 1.0, 1.0, -0.2, 0, 2);
    BufferStats st = buffer_stats(buffer);
    double p = 0.5;
    double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(st.n_total));
    CHECK(std::abs(st.pos_ratio - p) <= 3.0 * sigma);
}

TEST_CASE("stats reproduce the reported ratios") {
    // 24,000 samples with 15,941 positive: pos_ratio 0.664.
    Buffer buffer;
    buffer.meta.k = 8;
    std::size_t pos_left = 15941;
    for (int pid = 0; pid < 3000; ++pid) {
        BufferGroup g;
        g.problem_id = pid;
        for (int i = 0; i < 8; ++i) {
            RewardedSample s;
            s.problem_id = pid;
            s.correct = pos_left > 0;
            if (pos_left > 0) --pos_left;
            s.reward = s.correct ? 1.0 : -0.2;
            g.samples.push_back(s);
        }
        buffer.groups.push_back(std::move(g));
    }
    BufferStats st = buffer_stats(buffer);
    CHECK(st.n_total == 24000);
    CHECK(st.n_pos == 15941);
    CHECK(st.n_neg == 8059);
    CHECK(st.pos_ratio == doctest::Approx(0.664).epsilon(5e-4));
    std::string csv = stats_to_csv(st, "qwen15b_math");
    CHECK(csv.find("0.6642") != std::string::npos);

    // 2,541 mixed groups of 3,000: mixed_ratio 0.847.
    Buffer mixed;
    mixed.meta.k = 2;
    for (int pid = 0; pid < 3000; ++pid) {
        BufferGroup g;
        g.problem_id = pid;
        bool is_mixed = pid < 2541;
        RewardedSample a;
        a.problem_id = pid;
        a.correct = true;
        a.reward = 1.0;
        RewardedSample b = a;
        if (is_mixed) {
            b.correct = false;
            b.reward = -0.2;
        }
        g.samples = {a, b};
        mixed.groups.push_back(std::move(g));
    }
    BufferStats mst = buffer_stats(mixed);
    CHECK(mst.n_mixed == 2541);
    CHECK(mst.mixed_ratio == doctest::Approx(0.847).epsilon(1e-12));
}

TEST_CASE("filter_positive keeps exactly the positive-reward samples") {
    Buffer buffer;
    buffer.meta.k = 8;
    for (int pid = 0; pid < 4; ++pid) {
        BufferGroup g;
        g.problem_id = pid;
        for (int i = 0; i < 8; ++i) {
            RewardedSample s;
            s.problem_id = pid;
            s.correct = i < 6;
            s.reward = s.correct ? 1.0 : -0.2;
            g.samples.push_back(s);
        }
        buffer.groups.push_back(std::move(g));
    }
    Buffer filtered = filter_positive(buffer);
    CHECK(filtered.meta.filtered);
    BufferStats st = buffer_stats(filtered);
    CHECK(st.n_neg == 0);
    CHECK(st.pos_ratio == 1.0);
    for (const BufferGroup& g : filtered.groups) {
        CHECK(g.samples.size() == 6);
    }

    // All-negative buffer filters to empty.
    for (BufferGroup& g : buffer.groups) {
        for (RewardedSample& s : g.samples) {
            s.correct = false;
            s.reward = -0.2;
        }
    }
    Buffer empty = filter_positive(buffer);
    CHECK(empty.groups.empty());
    CHECK(empty.total_samples() == 0);
}

TEST_CASE("identical builds serialize byte-identically") {
    TaskSpec spec = small_task();
    auto problems = generate_problems(spec, 8, 11);
    Vocabulary vocab = spec.vocabulary();
    TabularPolicy gen(vocab, 2);
    for (const Problem& p : problems) gen.register_prompt(p.prompt);
    Rng rng(6);
    gen.randomize(rng, 0.8);

    Buffer a = build_buffer(gen, problems, 4, 0.7, 1.0, -0.2, 42, 2);
    Buffer b = build_buffer(gen, problems, 4, 0.7, 1.0, -0.2, 42, 2);
    CHECK(buffer_to_jsonl(a) == buffer_to_jsonl(b));

    // Round trip through the JSONL form.
    std::istringstream in(buffer_to_jsonl(a));
    Buffer restored = buffer_from_jsonl(in);
    CHECK(buffer_to_jsonl(restored) == buffer_to_jsonl(a));
    CHECK(restored.meta.k == 4);
    CHECK(restored.meta.seed == 42);
}

TEST_CASE("mixed count is bounded by one-sided counts") {
    TaskSpec spec = small_task();
    auto problems = generate_problems(spec, 24, 13);
    Vocabulary vocab = spec.vocabulary();
    TabularPolicy gen(vocab, 2);
    for (const Problem& p : problems) gen.register_prompt(p.prompt);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(seed + 100);
        gen.randomize(rng, 2.0);
        Buffer buffer = build_buffer(gen, problems, 6, 1.0, 1.0, -0.2, seed, 2);
        std::size_t with_pos = 0;
        std::size_t with_neg = 0;
        for (const BufferGroup& g : buffer.groups) {
            bool any_pos = false;
            bool any_neg = false;
            for (const RewardedSample& s : g.samples) {
                (s.reward > 0 ? any_pos : any_neg) = true;
            }
            if (any_pos) ++with_pos;
            if (any_neg) ++with_neg;
        }
        BufferStats st = buffer_stats(buffer);
        CHECK(st.n_mixed <= std::min(with_pos, with_neg));
    }
}
