#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rift/eval.hpp"
#include "rift/rewards.hpp"
#include "rift/tasks.hpp"
#include "rift/trainer.hpp"
#include "rift/transformer_policy.hpp"

namespace rift::cli {

struct ProblemsConfig {
    std::size_t n_train = 200;
    std::size_t n_test = 100;
    std::uint64_t seed = 7;
};

struct PolicyConfigSection {
    std::string family = "transformer";
    TransformerConfig transformer;
    /// 0: use the task's gold response length.
    std::size_t tabular_response_length = 0;
    double tabular_init_std = 0.5;
    std::uint64_t init_seed = 0;
};

struct BufferConfigSection {
    int k = 8;
    double temperature = 0.7;
    double r_pos = 1.0;
    double r_neg = -0.2;
    std::uint64_t seed = 0;
    /// 0: use the task's answer length.
    std::size_t max_new_tokens = 0;
    std::string path;                  // existing buffer to consume (train)
    std::string generator_checkpoint;  // generate with this policy instead of a fresh one
};

struct EvalConfigSection {
    std::size_t k = 8;
    double temperature = 0.7;
    std::uint64_t seed = 0;
    std::size_t pass_threshold = 1;
};

/// Fully-resolved experiment description. Every run writes its resolved form
/// as config.json before doing any work; re-running from that snapshot
/// reproduces the run bit-for-bit.
struct ExperimentConfig {
    int version = 1;
    TaskSpec task;
    ProblemsConfig problems;
    PolicyConfigSection policy;
    BufferConfigSection buffer;
    RewardStrategy reward;
    TrainConfig train;
    EvalConfigSection eval;
    std::string init_checkpoint;  // optional policy to start train runs from
    std::string output_dir;

    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::filesystem::path& path);
    void validate() const;

    std::size_t resolved_max_new_tokens() const {
        return buffer.max_new_tokens == 0 ? task.answer_length() : buffer.max_new_tokens;
    }
    std::size_t resolved_tabular_length() const {
        return policy.tabular_response_length == 0 ? task.gold_response_length()
                                                   : policy.tabular_response_length;
    }
};

/// Train/test split: disjoint draws from one problem stream.
struct ProblemSplit {
    std::vector<Problem> train;
    std::vector<Problem> test;
};
ProblemSplit split_problems(const ExperimentConfig& config);

/// Fresh policy per config (tabular policies get every split prompt
/// registered and a seeded perturbation).
std::unique_ptr<Policy> make_base_policy(const ExperimentConfig& config,
                                         const ProblemSplit& split);

/// Base policy or, when set, the checkpoint from `path`.
std::unique_ptr<Policy> load_policy_or_base(const std::string& path,
                                            const ExperimentConfig& config,
                                            const ProblemSplit& split);

}  // namespace rift::cli
