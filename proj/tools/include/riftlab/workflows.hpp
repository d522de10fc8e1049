#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "riftlab/experiment.hpp"

namespace rift::cli {

/// Buffer generation: rolls out the generator over the train split, rewards
/// by final-answer verification, and writes problems.jsonl, buffer.jsonl and
/// buffer_stats.csv next to the config snapshot.
void run_gen_buffer(const ExperimentConfig& config);

/// Trains per config.train.loss: sft/dft on gold solutions, rft/naive/rift on
/// the reward-strategy-adjusted buffer at config.buffer.path. Emits
/// metrics.jsonl (deterministic), timings.jsonl (wall time sidecar) and a
/// final checkpoint.json.
void run_train(const ExperimentConfig& config);

/// Evaluates a checkpoint (or the fresh base policy) on the held-out split.
EvalReport run_eval(const ExperimentConfig& config, const std::string& checkpoint);

struct CompareCell {
    std::string method;
    std::uint64_t seed = 0;
    double mean_at_k = 0.0;
    double pass_at_k = 0.0;
};

struct CompareOutcome {
    std::vector<CompareCell> cells;

    const CompareCell* find(const std::string& method, std::uint64_t seed) const;
};

/// One shared buffer per seed, one base initialization per seed, and an
/// independent training stream per method. All methods are evaluated on the
/// same held-out split with the configured eval seed.
CompareOutcome run_compare(const ExperimentConfig& config,
                           const std::vector<std::string>& methods,
                           const std::vector<std::uint64_t>& seeds);

struct AblateRow {
    int k = 0;
    BufferStats stats;
    double mean_at_k = 0.0;
    double pass_at_k = 0.0;
};

/// Buffer statistics and a rift train+eval cycle for each K.
std::vector<AblateRow> run_ablate_k(const ExperimentConfig& config,
                                    const std::vector<int>& ks,
                                    bool with_eval = true);

struct CollapseOutcome {
    std::vector<MetricsRecord> naive;
    std::vector<MetricsRecord> rift;
};

/// Twin training runs on one adversarial mixed buffer: the signed log loss
/// for `naive_steps` steps against the linear-negative-term loss for
/// `rift_steps` steps, plus SVG curves of loss and the per-sample
/// probability-derivative magnitude.
CollapseOutcome run_collapse_demo(const ExperimentConfig& config,
                                  std::size_t naive_steps,
                                  std::size_t rift_steps);

/// Line charts (loss, lr, grad_norm, max_neg_sample_grad) from metrics files.
void run_plot(const std::vector<std::string>& metrics_files,
              const std::filesystem::path& out_dir);

/// Deterministic child seed for a compare/ablate sub-run.
std::uint64_t derive_seed(std::uint64_t master, RngTag tag, std::uint64_t salt = 0);

}  // namespace rift::cli
