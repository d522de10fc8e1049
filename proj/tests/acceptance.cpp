// Acceptance suite: one pass/fail line per criterion, exit 0 only when all
// criteria hold. Heavier protocols (gradient matrix, collapse contrast,
// directional end-to-end) live here rather than in the unit tests.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "rift/checkpoint.hpp"
#include "rift/grad_check.hpp"
#include "rift/losses.hpp"
#include "rift/rewards.hpp"
#include "rift/trainer.hpp"
#include "rift/transformer_policy.hpp"
#include "riftlab/dispatch.hpp"
#include "riftlab/workflows.hpp"

using namespace rift;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::vector<double> flatten(const Policy& policy) {
    std::vector<double> out;
    for (const Tensor* t : policy.parameters()) {
        out.insert(out.end(), t->values.begin(), t->values.end());
    }
    return out;
}

void unflatten(Policy& policy, std::span<const double> flat) {
    std::size_t cursor = 0;
    for (Tensor* t : policy.parameters()) {
        std::copy(flat.begin() + static_cast<std::ptrdiff_t>(cursor),
                  flat.begin() + static_cast<std::ptrdiff_t>(cursor + t->numel()),
                  t->values.begin());
        cursor += t->numel();
    }
}

autodiff::DifferentiableFn loss_fn(Policy& policy,
                                   LossKind kind,
                                   const std::vector<TrainSample>& samples,
                                   LengthNorm norm) {
    return [&policy, kind, &samples, norm](std::span<const double> p,
                                           std::vector<double>* grad_out) {
        unflatten(policy, p);
        autodiff::Graph g;
        GraphBinding binding = policy.bind_parameters(g, grad_out != nullptr);
        LossGraph built{};
        switch (kind) {
            case LossKind::sft:
            case LossKind::rft:
                built = build_sft_loss(g, policy, binding, samples, norm);
                break;
            case LossKind::dft:
                built = build_dft_loss(g, policy, binding, samples, norm);
                break;
            case LossKind::naive_signed:
                built = build_naive_signed_loss(g, policy, binding, samples, norm);
                break;
            case LossKind::rift:
                built = build_rift_loss(g, policy, binding, samples, norm, NegTerm::faithful);
                break;
        }
        double value = g.scalar_value(built.loss);
        if (grad_out != nullptr) {
            g.backward(built.loss);
            grad_out->clear();
            for (autodiff::NodeId n : binding.nodes) {
                const auto& gv = g.grad(n);
                grad_out->insert(grad_out->end(), gv.begin(), gv.end());
            }
        }
        return value;
    };
}

/// DFT check: the value path freezes the per-token scale captured at the base
/// point (that is what "detached" means), the gradient path is the real dft
/// backward. Agreement confirms the scale carries no gradient.
autodiff::DifferentiableFn dft_frozen_fn(Policy& policy,
                                         const std::vector<TrainSample>& samples,
                                         LengthNorm norm) {
    std::vector<std::vector<double>> frozen;
    std::size_t total_tokens = 0;
    for (const TrainSample& s : samples) {
        LogProb lp = policy.log_prob(s.prompt, s.response);
        std::vector<double> probs(lp.per_token.size());
        for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = std::exp(lp.per_token[i]);
        total_tokens += probs.size();
        frozen.push_back(std::move(probs));
    }
    double normalizer = norm == LengthNorm::token_mean ? static_cast<double>(total_tokens)
                                                       : static_cast<double>(samples.size());
    auto real = loss_fn(policy, LossKind::dft, samples, norm);
    return [&policy, &samples, frozen, normalizer, real](std::span<const double> p,
                                                         std::vector<double>* grad_out) {
        if (grad_out != nullptr) {
            return real(p, grad_out);
        }
        unflatten(policy, p);
        double acc = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            LogProb lp = policy.log_prob(samples[i].prompt, samples[i].response);
            for (std::size_t t = 0; t < lp.per_token.size(); ++t) {
                acc += frozen[i][t] * lp.per_token[t];
            }
        }
        return -acc / normalizer;
    };
}

// ---------------------------------------------------------------------------
// Criterion 1: gradient correctness via central finite differences.
// ---------------------------------------------------------------------------
Check criterion_gradients() {
    Check check;
    const double eps = 1e-5;
    const double tol = 1e-4;
    const int draws = 20;

    {
        Vocabulary vocab = Vocabulary::raw({"t0", "t1", "t2", "t3"});
        TokenSeq prompt{0};
        std::vector<TrainSample> batch{
            {prompt, {0, 1, 2}, 1.0, true},
            {prompt, {2, 3, 0}, -0.2, false},
            {prompt, {1, 1, 3}, 1.0, true},
            {prompt, {3, 0, 2}, -0.2, false},
        };
        Rng rng(101);
        for (int d = 0; d < draws; ++d) {
            TabularPolicy policy(vocab, 3);
            policy.register_prompt(prompt);
            policy.randomize(rng, 0.8);
            std::vector<double> params = flatten(policy);
            for (LossKind kind :
                 {LossKind::sft, LossKind::naive_signed, LossKind::rift}) {
                double err = autodiff::finite_difference_check(
                    loss_fn(policy, kind, batch, LengthNorm::token_mean), params, eps);
                check.expect(err <= tol, "tabular " + loss_kind_name(kind) + " draw " +
                                             std::to_string(d) + " err " + std::to_string(err));
            }
            double derr = autodiff::finite_difference_check(
                dft_frozen_fn(policy, batch, LengthNorm::token_mean), params, eps);
            check.expect(derr <= tol, "tabular dft draw " + std::to_string(d));
        }
    }

    {
        Vocabulary vocab = Vocabulary::raw({"p", "a", "b", "c", "e"});
        TransformerConfig cfg;
        cfg.d_model = 16;
        cfg.n_layers = 1;
        cfg.n_heads = 2;
        cfg.max_len = 6;
        cfg.mlp_mult = 2;
        TokenSeq prompt{0, 1};
        std::vector<TrainSample> batch{
            {prompt, {1, 4}, 1.0, true},
            {prompt, {2, 3}, -0.2, false},
        };
        Rng seeds(202);
        for (int d = 0; d < draws; ++d) {
            TransformerPolicy policy(vocab, cfg, Rng(seeds.next_u64()));
            std::vector<double> params = flatten(policy);
            for (LossKind kind :
                 {LossKind::sft, LossKind::naive_signed, LossKind::rift}) {
                double err = autodiff::finite_difference_check(
                    loss_fn(policy, kind, batch, LengthNorm::token_mean), params, eps);
                check.expect(err <= tol, "transformer " + loss_kind_name(kind) + " draw " +
                                             std::to_string(d) + " err " + std::to_string(err));
            }
            double derr = autodiff::finite_difference_check(
                dft_frozen_fn(policy, batch, LengthNorm::token_mean), params, eps);
            check.expect(derr <= tol, "transformer dft draw " + std::to_string(d));
        }
    }
    return check;
}

// ---------------------------------------------------------------------------
// Criterion 2: boundedness of the linear negative term vs the naive term.
// ---------------------------------------------------------------------------
Check criterion_boundedness() {
    Check check;
    Rng rng(303);
    for (int i = 0; i < 10000; ++i) {
        double pi = rng.next_double01();
        if (pi == 0.0) pi = 0.5;
        double r = -rng.next_double01();
        if (r == 0.0) r = -0.5;
        double term = rift_negative_term(r, pi);
        check.expect(term >= 0.0 && term <= std::abs(r),
                     "rift term outside [0, |r|] at i=" + std::to_string(i));
    }
    // The naive per-sample loss term -r*log(pi) at (r=-0.2, pi=1e-30) is the
    // hand value -13.8, already past the -10 mark.
    double loss_contribution = naive_term(-0.2, 1e-30);
    check.expect(loss_contribution < -10.0, "naive contribution not < -10");
    check.expect(std::abs(loss_contribution - (-13.8155)) < 1e-3,
                 "naive contribution != -13.8 (got " + std::to_string(loss_contribution) + ")");
    return check;
}

// ---------------------------------------------------------------------------
// Criterion 3: collapse contrast on an adversarial mixed buffer.
// ---------------------------------------------------------------------------
Check criterion_collapse() {
    Check check;
    cli::ExperimentConfig cfg;
    cfg.output_dir = (fs::temp_directory_path() / "riftlab_acceptance" / "collapse").string();
    fs::remove_all(cfg.output_dir);
    cli::CollapseOutcome outcome = cli::run_collapse_demo(cfg, 500, 10000);

    bool grad_exceeded = false;
    bool loss_below = false;
    for (const MetricsRecord& m : outcome.naive) {
        if (m.max_neg_sample_grad > 1e4) grad_exceeded = true;
        if (m.loss < -10.0) loss_below = true;
    }
    check.expect(grad_exceeded, "naive max_neg_sample_grad never exceeded 1e4 in 500 steps");
    check.expect(loss_below, "naive loss never dropped below -10 in 500 steps");

    check.expect(outcome.rift.size() == 10000, "rift run did not complete 10000 steps");
    for (const MetricsRecord& m : outcome.rift) {
        check.expect(m.max_neg_sample_grad <= 1.0 + 1e-12,
                     "rift max_neg_sample_grad above max|r| at step " + std::to_string(m.step));
        check.expect(std::isfinite(m.loss), "rift loss not finite at step " + std::to_string(m.step));
        if (!check.ok) break;
    }
    return check;
}

// ---------------------------------------------------------------------------
// Criterion 4: reward lower bound over 1000 random tabular policies.
// ---------------------------------------------------------------------------
Check criterion_lower_bound() {
    Check check;
    Vocabulary vocab = Vocabulary::raw({"x", "y", "z"});
    TokenSeq prompt{0};

    TabularPolicy reference(vocab, 2);
    reference.register_prompt(prompt);
    Rng ref_rng(404);
    reference.randomize(ref_rng, 0.7);  // strictly positive everywhere

    auto reward = [](const TokenSeq& y) {
        // Deterministic signed rewards over the 9-sequence universe.
        double r = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            r += (y[i] == 0 ? 0.9 : (y[i] == 1 ? -0.6 : 0.25));
        }
        return r == 0.0 ? 0.1 : r;
    };

    Rng rng(505);
    for (int d = 0; d < 1000; ++d) {
        TabularPolicy theta(vocab, 2);
        theta.register_prompt(prompt);
        theta.randomize(rng, 1.5);
        LowerBoundReport report = check_reward_lower_bound(theta, reference, prompt, reward);
        check.expect(report.slack >= -1e-9,
                     "slack " + std::to_string(report.slack) + " at draw " + std::to_string(d));
        if (!check.ok) break;
    }
    return check;
}

// ---------------------------------------------------------------------------
// Criterion 5: reward strategy worked examples.
// ---------------------------------------------------------------------------
Check criterion_reward_strategies() {
    Check check;
    std::vector<double> group{1.0, 1.0, -0.2, -0.2};
    auto expect_group = [&check](const std::vector<double>& got,
                                 const std::vector<double>& want, const std::string& label) {
        for (std::size_t i = 0; i < want.size(); ++i) {
            check.expect(std::abs(got[i] - want[i]) <= 1e-12,
                         label + "[" + std::to_string(i) + "] = " + std::to_string(got[i]));
        }
    };
    RewardStrategy gaussian{RewardVariant::gaussian_norm, 1.0, -0.2};
    RewardStrategy gpg_mean{RewardVariant::gpg_mean, 1.0, -0.2};
    RewardStrategy gpg_scaled{RewardVariant::gpg_scaled, 1.0, -0.2};
    expect_group(normalize_group(group, gaussian), {1.0, 1.0, -1.0, -1.0}, "gaussian");
    expect_group(normalize_group(group, gpg_mean), {0.3, 0.3, -0.3, -0.3}, "gpg_mean");
    expect_group(normalize_group(group, gpg_scaled), {0.5, 0.5, -0.1, -0.1}, "gpg_scaled");
    expect_group(normalize_group(std::vector<double>{1.0, 1.0, 1.0}, gaussian), {0.0, 0.0, 0.0},
                 "sigma0");
    return check;
}

// ---------------------------------------------------------------------------
// Criterion 6: buffer statistics format checks.
// ---------------------------------------------------------------------------
Check criterion_buffer_stats() {
    Check check;
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
    check.expect(st.n_total == 24000 && st.n_pos == 15941, "counts mismatch");
    check.expect(std::abs(st.pos_ratio - 0.664) < 5e-4,
                 "pos_ratio " + std::to_string(st.pos_ratio));

    Buffer mixed;
    mixed.meta.k = 2;
    for (int pid = 0; pid < 3000; ++pid) {
        BufferGroup g;
        g.problem_id = pid;
        RewardedSample a;
        a.problem_id = pid;
        a.correct = true;
        a.reward = 1.0;
        RewardedSample b = a;
        if (pid < 2541) {
            b.correct = false;
            b.reward = -0.2;
        }
        g.samples = {a, b};
        mixed.groups.push_back(std::move(g));
    }
    BufferStats mst = buffer_stats(mixed);
    check.expect(mst.n_mixed == 2541, "mixed count mismatch");
    check.expect(std::abs(mst.mixed_ratio - 0.847) < 1e-12,
                 "mixed_ratio " + std::to_string(mst.mixed_ratio));

    BufferStats fst = buffer_stats(filter_positive(buffer));
    check.expect(fst.n_neg == 0, "filtered buffer still has negatives");
    return check;
}

// ---------------------------------------------------------------------------
// Criterion 7: directional end-to-end comparison on modular addition.
// ---------------------------------------------------------------------------
cli::ExperimentConfig e2e_config(const std::string& out_dir) {
    cli::ExperimentConfig cfg;
    cfg.task.kind = TaskKind::modular_addition;
    cfg.task.modulus = 23;
    cfg.task.vocab_padding = 21;
    cfg.problems.n_train = 200;
    cfg.problems.n_test = 100;
    cfg.problems.seed = 7;
    cfg.policy.family = "transformer";
    cfg.policy.transformer.d_model = 32;
    cfg.policy.transformer.n_layers = 2;
    cfg.policy.transformer.n_heads = 2;
    cfg.policy.transformer.max_len = 16;
    cfg.buffer.k = 8;
    cfg.buffer.temperature = 0.7;
    cfg.buffer.r_pos = 1.0;
    cfg.buffer.r_neg = -0.2;
    cfg.buffer.max_new_tokens = 0;  // resolves to the 1-token answer
    cfg.train.epochs = 3;
    cfg.train.batch_size = 8;
    cfg.train.lr_peak = 3e-3;
    cfg.train.warmup_frac = 0.05;
    cfg.eval.k = 8;
    cfg.eval.temperature = 0.7;
    cfg.eval.seed = 0;
    cfg.output_dir = out_dir;
    return cfg;
}

Check criterion_end_to_end() {
    Check check;
    cli::ExperimentConfig cfg =
        e2e_config((fs::temp_directory_path() / "riftlab_acceptance" / "e2e").string());
    fs::remove_all(cfg.output_dir);
    cli::CompareOutcome outcome = cli::run_compare(cfg, {"rft", "rift"}, {0, 1, 2});

    int rift_wins = 0;
    for (std::uint64_t seed : {0ULL, 1ULL, 2ULL}) {
        const cli::CompareCell* base = outcome.find("base", seed);
        const cli::CompareCell* rft = outcome.find("rft", seed);
        const cli::CompareCell* rift = outcome.find("rift", seed);
        check.expect(base && rft && rift, "missing cells for seed " + std::to_string(seed));
        if (!check.ok) return check;
        if (rift->mean_at_k >= rft->mean_at_k) ++rift_wins;
        check.expect(rft->mean_at_k > base->mean_at_k,
                     "rft did not beat base at seed " + std::to_string(seed) + " (" +
                         std::to_string(rft->mean_at_k) + " vs " +
                         std::to_string(base->mean_at_k) + ")");
        check.expect(rift->mean_at_k > base->mean_at_k,
                     "rift did not beat base at seed " + std::to_string(seed) + " (" +
                         std::to_string(rift->mean_at_k) + " vs " +
                         std::to_string(base->mean_at_k) + ")");
    }
    check.expect(rift_wins >= 2,
                 "rift >= rft in only " + std::to_string(rift_wins) + " of 3 seeds");
    return check;
}

// ---------------------------------------------------------------------------
// Criterion 8: reduction identities.
// ---------------------------------------------------------------------------
Check criterion_reduction() {
    Check check;
    TaskSpec spec;
    spec.kind = TaskKind::modular_addition;
    spec.modulus = 7;
    auto problems = generate_problems(spec, 20, 3);
    Vocabulary vocab = spec.vocabulary();

    auto gold_data = train_data_from_gold(problems);

    TrainConfig tc;
    tc.lr_peak = 0.05;
    tc.epochs = 2;
    tc.batch_size = 4;
    tc.seed = 11;

    for (LengthNorm norm : {LengthNorm::token_mean, LengthNorm::sequence_sum}) {
        tc.length_norm = norm;
        TabularPolicy a(vocab, 2);
        TabularPolicy b(vocab, 2);
        for (const Problem& p : problems) {
            a.register_prompt(p.prompt);
            b.register_prompt(p.prompt);
        }
        Rng ra(77);
        Rng rb(77);
        a.randomize(ra, 0.5);
        b.randomize(rb, 0.5);

        TrainConfig rift_cfg = tc;
        rift_cfg.loss = LossKind::rift;
        auto rift_metrics = train(a, gold_data, rift_cfg);
        TrainConfig sft_cfg = tc;
        sft_cfg.loss = LossKind::sft;
        auto sft_metrics = train(b, gold_data, sft_cfg);
        check.expect(rift_metrics.size() == sft_metrics.size(), "step count mismatch");
        for (std::size_t i = 0; i < rift_metrics.size(); ++i) {
            check.expect(std::abs(rift_metrics[i].loss - sft_metrics[i].loss) <= 1e-12,
                         "loss differs at step " + std::to_string(i));
        }
    }

    // rft == sft over the positive-filtered buffer, bit for bit.
    std::vector<TrainSample> mixed = gold_data;
    for (std::size_t i = 0; i < mixed.size(); ++i) {
        if (i % 3 == 0) {
            mixed[i].reward = -0.2;
            mixed[i].correct = false;
        }
    }
    std::vector<TrainSample> positives;
    for (const TrainSample& s : mixed) {
        if (s.reward > 0) positives.push_back(s);
    }

    TabularPolicy a(vocab, 2);
    TabularPolicy b(vocab, 2);
    for (const Problem& p : problems) {
        a.register_prompt(p.prompt);
        b.register_prompt(p.prompt);
    }
    Rng ra(99);
    Rng rb(99);
    a.randomize(ra, 0.5);
    b.randomize(rb, 0.5);

    TrainConfig rft_cfg = tc;
    rft_cfg.loss = LossKind::rft;
    auto rft_metrics = train(a, mixed, rft_cfg);
    TrainConfig sft_cfg = tc;
    sft_cfg.loss = LossKind::sft;
    auto sft_metrics = train(b, positives, sft_cfg);

    check.expect(flatten(a) == flatten(b), "rft and sft parameters differ");
    check.expect(rft_metrics.size() == sft_metrics.size(), "rft/sft step counts differ");
    for (std::size_t i = 0; i < rft_metrics.size(); ++i) {
        check.expect(rft_metrics[i].loss == sft_metrics[i].loss,
                     "rft/sft loss differs at step " + std::to_string(i));
    }
    return check;
}

// ---------------------------------------------------------------------------
// Criterion 9: CLI determinism from config snapshots.
// ---------------------------------------------------------------------------
Check criterion_determinism() {
    Check check;
    fs::path root = fs::temp_directory_path() / "riftlab_acceptance" / "determinism";
    fs::remove_all(root);
    fs::create_directories(root);

    nlohmann::json cfg{
        {"task", {{"kind", "modular_addition"}, {"modulus", 5}}},
        {"problems", {{"n_train", 6}, {"n_test", 4}, {"seed", 7}}},
        {"policy",
         {{"family", "tabular"}, {"tabular_init_std", 0.5}, {"init_seed", 1},
          {"tabular_response_length", 2}}},
        {"buffer", {{"k", 4}, {"temperature", 0.7}, {"seed", 3}, {"max_new_tokens", 2}}},
        {"train",
         {{"loss", "rift"}, {"lr_peak", 0.05}, {"epochs", 2}, {"batch_size", 8}, {"seed", 5}}},
        {"eval", {{"k", 4}, {"temperature", 0.7}, {"seed", 0}}},
        {"output_dir", (root / "gen").string()},
    };
    fs::path cfg_path = root / "config.json";
    std::ofstream(cfg_path) << cfg.dump(2);

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };

    check.expect(cli::dispatch({"gen-buffer", "--config", cfg_path.string()}) == 0, "gen failed");

    cfg["output_dir"] = (root / "train1").string();
    cfg["buffer"]["path"] = (root / "gen" / "buffer.jsonl").string();
    fs::path train_cfg = root / "train_config.json";
    std::ofstream(train_cfg) << cfg.dump(2);
    check.expect(cli::dispatch({"train", "--config", train_cfg.string()}) == 0, "train failed");
    check.expect(cli::dispatch({"train", "--config", (root / "train1" / "config.json").string(),
                                "--out", (root / "train2").string()}) == 0,
                 "train rerun failed");
    check.expect(slurp(root / "train1" / "metrics.jsonl") ==
                     slurp(root / "train2" / "metrics.jsonl"),
                 "metrics differ across reruns");

    cfg["output_dir"] = (root / "eval1").string();
    fs::path eval_cfg = root / "eval_config.json";
    std::ofstream(eval_cfg) << cfg.dump(2);
    check.expect(cli::dispatch({"eval", "--config", eval_cfg.string(), "--checkpoint",
                                (root / "train1" / "checkpoint.json").string()}) == 0,
                 "eval failed");
    check.expect(cli::dispatch({"eval", "--config", (root / "eval1" / "config.json").string(),
                                "--checkpoint", (root / "train1" / "checkpoint.json").string(),
                                "--out", (root / "eval2").string()}) == 0,
                 "eval rerun failed");
    check.expect(slurp(root / "eval1" / "report.csv") == slurp(root / "eval2" / "report.csv"),
                 "eval csv differs across reruns");

    check.expect(cli::dispatch({"gen-buffer", "--config",
                                (root / "gen" / "config.json").string(), "--out",
                                (root / "gen2").string()}) == 0,
                 "gen rerun failed");
    check.expect(slurp(root / "gen" / "buffer.jsonl") == slurp(root / "gen2" / "buffer.jsonl"),
                 "buffer differs across reruns");
    return check;
}

// ---------------------------------------------------------------------------
// Criterion 10: K-ablation harness.
// ---------------------------------------------------------------------------
Check criterion_ablation() {
    Check check;
    cli::ExperimentConfig cfg;
    cfg.task.kind = TaskKind::modular_addition;
    cfg.task.modulus = 11;
    cfg.problems.n_train = 30;
    cfg.problems.n_test = 10;
    cfg.problems.seed = 7;
    cfg.policy.family = "tabular";
    cfg.policy.tabular_response_length = 2;
    cfg.buffer.max_new_tokens = 2;
    cfg.train.epochs = 1;
    cfg.train.batch_size = 16;
    cfg.train.lr_peak = 0.05;
    cfg.eval.k = 4;
    cfg.output_dir = (fs::temp_directory_path() / "riftlab_acceptance" / "ablate").string();
    fs::remove_all(cfg.output_dir);

    auto rows = cli::run_ablate_k(cfg, {2, 4, 8, 16}, true);
    check.expect(rows.size() == 4, "expected 4 rows");
    for (const cli::AblateRow& row : rows) {
        check.expect(row.stats.n_problems == 30, "problem count wrong at K=" + std::to_string(row.k));
        check.expect(row.stats.n_total ==
                         30u * static_cast<std::size_t>(row.k),
                     "group size not exactly K=" + std::to_string(row.k));
        check.expect(row.stats.n_pos + row.stats.n_neg == row.stats.n_total,
                     "counts inconsistent at K=" + std::to_string(row.k));
        check.expect(row.stats.pos_ratio >= 0.0 && row.stats.pos_ratio <= 1.0 &&
                         row.stats.mixed_ratio >= 0.0 && row.stats.mixed_ratio <= 1.0,
                     "ratios out of range at K=" + std::to_string(row.k));
    }
    std::ifstream csv(fs::path(cfg.output_dir) / "ablate.csv");
    std::string header;
    std::getline(csv, header);
    check.expect(header.rfind("k,n_problems,n_total,n_pos,n_neg,pos_ratio,n_mixed,mixed_ratio",
                              0) == 0,
                 "ablate.csv schema mismatch");
    return check;
}

struct Criterion {
    int number;
    const char* title;
    std::function<Check()> run;
};

}  // namespace

int main() {
    std::vector<Criterion> criteria{
        {1, "gradient correctness (finite differences, 20 draws x 4 losses x 2 families)",
         criterion_gradients},
        {2, "negative-term boundedness and naive divergence value", criterion_boundedness},
        {3, "collapse contrast: naive explodes, linear term stays bounded", criterion_collapse},
        {4, "reward lower bound over 1000 random tabular policies", criterion_lower_bound},
        {5, "reward strategy worked examples", criterion_reward_strategies},
        {6, "buffer statistics format checks", criterion_buffer_stats},
        {7, "directional end-to-end: rift vs rft vs base on modular addition",
         criterion_end_to_end},
        {8, "reduction identities (rift->sft, rft==sft over positives)", criterion_reduction},
        {9, "byte-identical reruns from config snapshots", criterion_determinism},
        {10, "K-ablation harness emits the stats schema", criterion_ablation},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        Check result;
        try {
            result = c.run();
        } catch (const std::exception& e) {
            result.ok = false;
            result.detail = std::string("exception: ") + e.what();
        }
        auto t1 = std::chrono::steady_clock::now();
        double secs = std::chrono::duration<double>(t1 - t0).count();
        std::printf("[%s] criterion %2d: %s (%.1fs)%s%s\n", result.ok ? "PASS" : "FAIL", c.number,
                    c.title, secs, result.detail.empty() ? "" : " -- ",
                    result.detail.c_str());
        if (!result.ok) ++failures;
    }
    if (failures > 0) {
        std::printf("%d of %zu criteria failed\n", failures, criteria.size());
        return 1;
    }
    std::printf("all %zu criteria passed\n", criteria.size());
    return 0;
}
