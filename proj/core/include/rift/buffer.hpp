#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rift/policy.hpp"
#include "rift/tasks.hpp"

namespace rift {

/// One (prompt, response, reward) record plus the generator's canonical
/// log-probability of the response, stored at build time so reference-policy
/// quantities never require re-running the generator.
struct RewardedSample {
    int problem_id = 0;
    TokenSeq response;
    bool correct = false;
    double reward = 0.0;
    double generator_logprob = 0.0;
};

struct BufferMeta {
    int k = 8;
    double temperature = 0.7;
    std::string generator_id;
    std::uint64_t seed = 0;
    std::string reward_strategy = "constant_negative";
    std::size_t max_new_tokens = 0;
    bool filtered = false;

    nlohmann::json to_json() const;
    static BufferMeta from_json(const nlohmann::json& j);
};

struct BufferGroup {
    int problem_id = 0;
    std::vector<RewardedSample> samples;
};

/// Off-policy training buffer: per-problem groups of rewarded rollouts.
/// Groups hold exactly K samples unless the buffer was positive-filtered
/// (meta.filtered), which may shrink or drop groups.
struct Buffer {
    BufferMeta meta;
    std::vector<BufferGroup> groups;

    std::size_t total_samples() const;
    const BufferGroup* find_group(int problem_id) const;
};

struct BufferStats {
    std::size_t n_problems = 0;
    std::size_t n_total = 0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    double pos_ratio = 0.0;
    std::size_t n_mixed = 0;
    double mixed_ratio = 0.0;
};

/// K rollouts per problem at the given temperature; rewards are r_pos for
/// verified-correct responses and r_neg otherwise. Each problem samples from
/// its own stream derived from (seed, problem_id), so construction is
/// order-independent and parallelizable.
Buffer build_buffer(const Policy& generator,
                    std::span<const Problem> problems,
                    int k,
                    double temperature,
                    double r_pos,
                    double r_neg,
                    std::uint64_t seed,
                    std::size_t max_new_tokens,
                    const std::string& generator_id = "");

BufferStats buffer_stats(const Buffer& buffer);

/// Keep only reward > 0 samples. Groups may shrink below K or disappear; the
/// result is flagged filtered and the exact-K invariant is waived.
Buffer filter_positive(const Buffer& buffer);

/// JSONL: a meta header line, then one sample per line. Byte-stable for a
/// given buffer, so identical builds serialize identically.
std::string buffer_to_jsonl(const Buffer& buffer);
Buffer buffer_from_jsonl(std::istream& in);
Buffer load_buffer(const std::string& path);

/// One-row CSV in the style of the buffer statistics tables.
std::string stats_to_csv(const BufferStats& stats, const std::string& label);

}  // namespace rift
