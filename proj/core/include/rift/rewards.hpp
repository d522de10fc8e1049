#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rift/buffer.hpp"

namespace rift {

enum class RewardVariant {
    constant_negative,
    gaussian_norm,
    gpg_mean,
    gpg_scaled,
};

std::string reward_variant_name(RewardVariant v);
RewardVariant reward_variant_from_name(const std::string& name);

/// Reward assignment strategy. constant_negative keeps the raw positive
/// reward and rewrites every incorrect sample's reward to r_neg; the three
/// normalization variants rescale rewards per problem group:
///   gaussian_norm  r' = (r - mu) / sigma      (population sigma; sigma=0 -> 0)
///   gpg_mean       r' = alpha * (r - mu),     alpha = N+ / N
///   gpg_scaled     r' = alpha * r,            alpha = N+ / N
struct RewardStrategy {
    RewardVariant variant = RewardVariant::constant_negative;
    double r_pos = 1.0;
    double r_neg = -0.2;

    std::string id() const;
    nlohmann::json to_json() const;
    static RewardStrategy from_json(const nlohmann::json& j);
};

/// Rescale one group's raw rewards. Raw rewards are the +-(r_pos, r_neg)
/// signal, so positive entries count as correct for N+.
std::vector<double> normalize_group(std::span<const double> raw, const RewardStrategy& strategy);

/// Per-group reward rewrite over an unfiltered buffer. Correctness flags are
/// untouched; the strategy id is recorded in the buffer meta. Normalization
/// may flip the sign partition used by sign-aware losses; zero rewards mean
/// "no contrastive signal" and are dropped by training-data assembly.
Buffer apply_strategy(const Buffer& buffer, const RewardStrategy& strategy);

}  // namespace rift
