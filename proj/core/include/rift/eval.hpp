#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rift/policy.hpp"
#include "rift/tasks.hpp"

namespace rift {

struct EvalReport {
    std::vector<int> problem_ids;
    std::vector<std::vector<bool>> correct;  // one row per problem, k columns
    std::size_t k = 0;
    double temperature = 0.0;
    std::uint64_t seed = 0;
    std::size_t pass_threshold = 1;
    double mean_at_k = 0.0;
    double pass_at_k = 0.0;

    nlohmann::json to_json() const;
    std::string to_csv(const std::string& task_label) const;
};

/// mean@k: average per-row fraction of correct entries. pass@k: fraction of
/// rows with at least `threshold` correct entries (standard usage is 1).
/// Throws InputError on a ragged matrix.
std::pair<double, double> mean_pass_at_k(const std::vector<std::vector<bool>>& correct,
                                         std::size_t threshold = 1);

/// k rollouts per problem, verified and aggregated. Per-problem streams are
/// keyed by (seed, problem_id), so results are invariant to problem order.
EvalReport evaluate(const Policy& policy,
                    std::span<const Problem> problems,
                    std::size_t k,
                    double temperature,
                    std::uint64_t seed,
                    std::size_t max_new_tokens,
                    std::size_t pass_threshold = 1);

}  // namespace rift
