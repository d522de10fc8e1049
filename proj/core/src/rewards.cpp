#include "rift/rewards.hpp"

#include <cmath>

#include "rift/errors.hpp"

namespace rift {

std::string reward_variant_name(RewardVariant v) {
    switch (v) {
        case RewardVariant::constant_negative: return "constant_negative";
        case RewardVariant::gaussian_norm: return "gaussian_norm";
        case RewardVariant::gpg_mean: return "gpg_mean";
        case RewardVariant::gpg_scaled: return "gpg_scaled";
    }
    return "?";
}

RewardVariant reward_variant_from_name(const std::string& name) {
    if (name == "constant_negative") return RewardVariant::constant_negative;
    if (name == "gaussian_norm") return RewardVariant::gaussian_norm;
    if (name == "gpg_mean") return RewardVariant::gpg_mean;
    if (name == "gpg_scaled") return RewardVariant::gpg_scaled;
    throw InputError("unknown reward strategy: " + name);
}

std::string RewardStrategy::id() const {
    if (variant == RewardVariant::constant_negative) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "constant_negative(%g)", r_neg);
        return buf;
    }
    return reward_variant_name(variant);
}

nlohmann::json RewardStrategy::to_json() const {
    return nlohmann::json{
        {"variant", reward_variant_name(variant)},
        {"r_pos", r_pos},
        {"r_neg", r_neg},
    };
}

RewardStrategy RewardStrategy::from_json(const nlohmann::json& j) {
    RewardStrategy s;
    s.variant = reward_variant_from_name(j.at("variant").get<std::string>());
    s.r_pos = j.value("r_pos", 1.0);
    s.r_neg = j.value("r_neg", -0.2);
    if (!(s.r_pos > 0.0) || !(s.r_neg < 0.0)) {
        throw InputError("reward strategy requires r_pos > 0 > r_neg");
    }
    return s;
}

std::vector<double> normalize_group(std::span<const double> raw, const RewardStrategy& strategy) {
    if (raw.empty()) {
        throw InputError("normalize_group requires a non-empty group");
    }
    std::vector<double> out(raw.begin(), raw.end());
    if (strategy.variant == RewardVariant::constant_negative) {
        for (double& r : out) {
            if (r < 0.0) r = strategy.r_neg;
        }
        return out;
    }

    double n = static_cast<double>(raw.size());
    double mu = 0.0;
    std::size_t n_pos = 0;
    for (double r : raw) {
        mu += r;
        if (r > 0.0) ++n_pos;
    }
    mu /= n;

    switch (strategy.variant) {
        case RewardVariant::gaussian_norm: {
            double var = 0.0;
            for (double r : raw) var += (r - mu) * (r - mu);
            double sigma = std::sqrt(var / n);  // population sigma
            if (sigma == 0.0) {
                // Uniform group carries no contrastive signal.
                for (double& r : out) r = 0.0;
            } else {
                for (double& r : out) r = (r - mu) / sigma;
            }
            return out;
        }
        case RewardVariant::gpg_mean: {
            double alpha = static_cast<double>(n_pos) / n;
            for (double& r : out) r = alpha * (r - mu);
            return out;
        }
        case RewardVariant::gpg_scaled: {
            double alpha = static_cast<double>(n_pos) / n;
            for (double& r : out) r = alpha * r;
            return out;
        }
        case RewardVariant::constant_negative:
            break;
    }
    return out;
}

Buffer apply_strategy(const Buffer& buffer, const RewardStrategy& strategy) {
    if (buffer.meta.filtered) {
        throw InputError("apply_strategy requires an unfiltered buffer");
    }
    Buffer out = buffer;
    out.meta.reward_strategy = strategy.id();
    for (BufferGroup& g : out.groups) {
        std::vector<double> raw;
        raw.reserve(g.samples.size());
        for (const RewardedSample& s : g.samples) raw.push_back(s.reward);
        std::vector<double> rewritten = normalize_group(raw, strategy);
        for (std::size_t i = 0; i < g.samples.size(); ++i) {
            g.samples[i].reward = rewritten[i];
        }
    }
    return out;
}

}  // namespace rift
