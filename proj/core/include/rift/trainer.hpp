#pragma once

#include <functional>
#include <optional>

#include <nlohmann/json.hpp>

#include "rift/buffer.hpp"
#include "rift/losses.hpp"

namespace rift {

struct TrainConfig {
    LossKind loss = LossKind::rift;
    LengthNorm length_norm = LengthNorm::token_mean;
    NegTerm neg_term = NegTerm::faithful;
    double lr_peak = 1e-3;
    double warmup_frac = 0.05;
    std::size_t epochs = 3;
    std::size_t batch_size = 64;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
    std::uint64_t seed = 0;
    std::optional<double> grad_clip;
    std::size_t checkpoint_every = 0;  // 0: final checkpoint only

    nlohmann::json to_json() const;
    static TrainConfig from_json(const nlohmann::json& j);
    void validate() const;
};

struct MetricsRecord {
    std::size_t step = 0;   // 1-based global optimizer step
    std::size_t epoch = 0;  // 0-based
    double lr = 0.0;
    double loss = 0.0;
    double grad_norm = 0.0;
    /// |dL/dpi| over the batch's negative-reward samples, from the analytic
    /// per-sample derivative; 0 when the loss has no negative samples.
    double max_neg_sample_grad = 0.0;
    double wall_ms = 0.0;

    /// wall_ms is measurement, not state, and would break byte-identical
    /// reruns; it is serialized only when include_timing is set.
    nlohmann::json to_json(bool include_timing = false) const;
};

/// Linear ramp 0 -> lr_peak over ceil(warmup_frac * total) steps, then cosine
/// decay to exactly 0 at total_steps.
double lr_schedule(std::size_t step, std::size_t total_steps, const TrainConfig& config);

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::size_t t = 0;
};

/// Decoupled-weight-decay adaptive update: moment estimates with bias
/// correction, then p -= lr * wd * p applied separately.
void optimizer_step(std::span<double> params,
                    std::span<const double> grads,
                    AdamState& state,
                    double lr,
                    const TrainConfig& config);

struct TrainCallbacks {
    std::function<void(const MetricsRecord&)> on_metrics;
    std::function<void(const Policy&, std::size_t step)> on_checkpoint;
};

/// Optimize the policy in place over epochs x ceil(n / batch) steps with a
/// per-epoch shuffle seeded from (config.seed, epoch). rft trains the sft
/// objective over the positive-reward subset; zero-reward samples (possible
/// after group normalization) are excluded from the signed losses.
std::vector<MetricsRecord> train(Policy& policy,
                                 std::vector<TrainSample> data,
                                 const TrainConfig& config,
                                 const TrainCallbacks& callbacks = {});

std::vector<TrainSample> train_data_from_buffer(const Buffer& buffer,
                                                std::span<const Problem> problems);
std::vector<TrainSample> train_data_from_gold(std::span<const Problem> problems);

}  // namespace rift
