#include "rift/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "rift/errors.hpp"
#include "rift/rng.hpp"

namespace rift {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::size_t total_param_count(const std::vector<Tensor*>& params) {
    std::size_t n = 0;
    for (const Tensor* t : params) n += t->numel();
    return n;
}

}  // namespace

nlohmann::json TrainConfig::to_json() const {
    nlohmann::json j{
        {"loss", loss_kind_name(loss)},
        {"length_norm", length_norm_name(length_norm)},
        {"neg_term", neg_term_name(neg_term)},
        {"lr_peak", lr_peak},
        {"warmup_frac", warmup_frac},
        {"epochs", epochs},
        {"batch_size", batch_size},
        {"beta1", beta1},
        {"beta2", beta2},
        {"eps", eps},
        {"weight_decay", weight_decay},
        {"seed", seed},
        {"checkpoint_every", checkpoint_every},
    };
    if (grad_clip) {
        j["grad_clip"] = *grad_clip;
    }
    return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.loss = loss_kind_from_name(j.value("loss", std::string{"rift"}));
    c.length_norm = length_norm_from_name(j.value("length_norm", std::string{"token_mean"}));
    c.neg_term = neg_term_from_name(j.value("neg_term", std::string{"faithful"}));
    c.lr_peak = j.value("lr_peak", 1e-3);
    c.warmup_frac = j.value("warmup_frac", 0.05);
    c.epochs = j.value("epochs", std::size_t{3});
    c.batch_size = j.value("batch_size", std::size_t{64});
    c.beta1 = j.value("beta1", 0.9);
    c.beta2 = j.value("beta2", 0.999);
    c.eps = j.value("eps", 1e-8);
    c.weight_decay = j.value("weight_decay", 0.0);
    c.seed = j.value("seed", std::uint64_t{0});
    c.checkpoint_every = j.value("checkpoint_every", std::size_t{0});
    if (j.contains("grad_clip") && !j.at("grad_clip").is_null()) {
        c.grad_clip = j.at("grad_clip").get<double>();
    }
    c.validate();
    return c;
}

void TrainConfig::validate() const {
    if (!(lr_peak > 0.0)) {
        throw ConfigError("lr_peak must be positive");
    }
    if (batch_size < 1) {
        throw ConfigError("batch_size must be >= 1");
    }
    if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0)) {
        throw ConfigError("betas must be in (0, 1)");
    }
    if (warmup_frac < 0.0 || warmup_frac >= 1.0) {
        throw ConfigError("warmup_frac must be in [0, 1)");
    }
}

nlohmann::json MetricsRecord::to_json(bool include_timing) const {
    nlohmann::json j{
        {"step", step},
        {"epoch", epoch},
        {"lr", lr},
        {"loss", loss},
        {"grad_norm", grad_norm},
        {"max_neg_sample_grad", max_neg_sample_grad},
    };
    if (include_timing) {
        j["wall_ms"] = wall_ms;
    }
    return j;
}

double lr_schedule(std::size_t step, std::size_t total_steps, const TrainConfig& config) {
    if (step > total_steps) {
        throw PreconditionError("lr_schedule: step beyond total_steps");
    }
    std::size_t warmup =
        static_cast<std::size_t>(std::ceil(config.warmup_frac * static_cast<double>(total_steps)));
    if (warmup == total_steps) {
        throw PreconditionError("lr_schedule: warmup covers the whole run");
    }
    if (step <= warmup) {
        if (warmup == 0) {
            // Fall through to the cosine branch at step 0.
        } else {
            return config.lr_peak * static_cast<double>(step) / static_cast<double>(warmup);
        }
    }
    double progress = static_cast<double>(step - warmup) / static_cast<double>(total_steps - warmup);
    return config.lr_peak * 0.5 * (1.0 + std::cos(kPi * progress));
}

void optimizer_step(std::span<double> params,
                    std::span<const double> grads,
                    AdamState& state,
                    double lr,
                    const TrainConfig& config) {
    if (params.size() != grads.size()) {
        throw InputError("optimizer_step: parameter/gradient size mismatch");
    }
    if (state.m.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    if (state.m.size() != params.size()) {
        throw InputError("optimizer_step: state size mismatch");
    }
    for (double g : grads) {
        if (std::isnan(g)) {
            throw NumericError("optimizer_step: NaN gradient; step aborted");
        }
    }
    state.t += 1;
    double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.t));
    double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        double g = grads[i];
        state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
        state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
        double m_hat = state.m[i] / bc1;
        double v_hat = state.v[i] / bc2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + config.eps);
        params[i] -= lr * config.weight_decay * params[i];
    }
}

std::vector<TrainSample> train_data_from_buffer(const Buffer& buffer,
                                                std::span<const Problem> problems) {
    std::vector<TrainSample> out;
    out.reserve(buffer.total_samples());
    for (const BufferGroup& g : buffer.groups) {
        const Problem* problem = nullptr;
        for (const Problem& p : problems) {
            if (p.id == g.problem_id) {
                problem = &p;
                break;
            }
        }
        if (problem == nullptr) {
            throw InputError("buffer references problem id " + std::to_string(g.problem_id) +
                             " missing from the problem set");
        }
        for (const RewardedSample& s : g.samples) {
            TrainSample t;
            t.prompt = problem->prompt;
            t.response = s.response;
            t.reward = s.reward;
            t.correct = s.correct;
            out.push_back(std::move(t));
        }
    }
    return out;
}

std::vector<TrainSample> train_data_from_gold(std::span<const Problem> problems) {
    std::vector<TrainSample> out;
    out.reserve(problems.size());
    for (const Problem& p : problems) {
        TrainSample t;
        t.prompt = p.prompt;
        t.response = p.gold_solution;
        t.reward = 1.0;
        t.correct = true;
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<MetricsRecord> train(Policy& policy,
                                 std::vector<TrainSample> data,
                                 const TrainConfig& config,
                                 const TrainCallbacks& callbacks) {
    config.validate();
    if (data.empty()) {
        throw ConfigError("train requires a non-empty dataset");
    }

    LossKind effective = config.loss;
    if (config.loss == LossKind::rft) {
        std::vector<TrainSample> kept;
        for (TrainSample& s : data) {
            if (s.reward > 0.0) kept.push_back(std::move(s));
        }
        if (kept.empty()) {
            throw ConfigError(
                "rft training found no positive-reward samples; filter_positive left nothing to "
                "train on");
        }
        data = std::move(kept);
        effective = LossKind::sft;
    } else if (config.loss == LossKind::naive_signed || config.loss == LossKind::rift) {
        // Group normalization can zero out degenerate groups; such samples
        // have no defined term in the signed losses.
        std::vector<TrainSample> kept;
        for (TrainSample& s : data) {
            if (s.reward != 0.0) kept.push_back(std::move(s));
        }
        if (kept.empty()) {
            throw ConfigError("all rewards are zero after normalization; nothing to train on");
        }
        data = std::move(kept);
    }

    std::vector<MetricsRecord> metrics;
    if (config.epochs == 0) {
        return metrics;
    }

    std::vector<Tensor*> params = policy.parameters();
    std::size_t flat_size = total_param_count(params);
    std::vector<double> flat_grad(flat_size, 0.0);
    AdamState state;

    std::size_t batches_per_epoch = (data.size() + config.batch_size - 1) / config.batch_size;
    std::size_t total_steps = config.epochs * batches_per_epoch;
    metrics.reserve(total_steps);

    Rng shuffle_root(config.seed);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);

    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        Rng shuffle_rng = shuffle_root.derive(RngTag::shuffle, epoch);
        shuffle_rng.shuffle(order);
        for (std::size_t b = 0; b < batches_per_epoch; ++b) {
            auto t0 = std::chrono::steady_clock::now();
            std::size_t begin = b * config.batch_size;
            std::size_t end = std::min(begin + config.batch_size, data.size());
            std::vector<TrainSample> batch;
            batch.reserve(end - begin);
            for (std::size_t i = begin; i < end; ++i) {
                batch.push_back(data[order[i]]);
            }

            autodiff::Graph g;
            GraphBinding binding = policy.bind_parameters(g, /*requires_grad=*/true);
            LossGraph built{};
            switch (effective) {
                case LossKind::sft:
                case LossKind::rft:
                    built = build_sft_loss(g, policy, binding, batch, config.length_norm);
                    break;
                case LossKind::dft:
                    built = build_dft_loss(g, policy, binding, batch, config.length_norm);
                    break;
                case LossKind::naive_signed:
                    built = build_naive_signed_loss(g, policy, binding, batch, config.length_norm);
                    break;
                case LossKind::rift:
                    built = build_rift_loss(g, policy, binding, batch, config.length_norm,
                                            config.neg_term);
                    break;
            }
            g.backward(built.loss);

            std::size_t cursor = 0;
            for (std::size_t p = 0; p < params.size(); ++p) {
                const std::vector<double>& gv = g.grad(binding.nodes[p]);
                std::copy(gv.begin(), gv.end(), flat_grad.begin() + static_cast<std::ptrdiff_t>(cursor));
                cursor += gv.size();
            }

            double grad_norm = 0.0;
            for (double v : flat_grad) grad_norm += v * v;
            grad_norm = std::sqrt(grad_norm);
            if (config.grad_clip && grad_norm > *config.grad_clip && grad_norm > 0.0) {
                double scale = *config.grad_clip / grad_norm;
                for (double& v : flat_grad) v *= scale;
            }

            double max_neg_grad = 0.0;
            if (effective == LossKind::naive_signed || effective == LossKind::rift) {
                for (std::size_t i = 0; i < batch.size(); ++i) {
                    if (batch[i].reward >= 0.0) continue;
                    if (effective == LossKind::rift) {
                        max_neg_grad = std::max(
                            max_neg_grad, std::abs(rift_negative_term_dprob(batch[i].reward)));
                    } else {
                        double logp = g.scalar_value(built.sample_log_probs[i]);
                        // Guard the exponent so the diagnostic stays finite
                        // even when the sequence probability underflows.
                        double prob = std::exp(std::max(logp, -700.0));
                        max_neg_grad = std::max(
                            max_neg_grad, std::abs(naive_term_dprob(batch[i].reward, prob)));
                    }
                }
            }

            ++step;
            double lr = lr_schedule(step, total_steps, config);

            // One shared Adam state over the concatenated parameter vector,
            // aligned with flat_grad regardless of tensor boundaries.
            std::vector<double> flat_params(flat_size);
            std::size_t c = 0;
            for (Tensor* t : params) {
                std::copy(t->values.begin(), t->values.end(),
                          flat_params.begin() + static_cast<std::ptrdiff_t>(c));
                c += t->values.size();
            }
            optimizer_step(flat_params, flat_grad, state, lr, config);
            c = 0;
            for (Tensor* t : params) {
                std::copy(flat_params.begin() + static_cast<std::ptrdiff_t>(c),
                          flat_params.begin() + static_cast<std::ptrdiff_t>(c + t->values.size()),
                          t->values.begin());
                c += t->values.size();
            }

            auto t1 = std::chrono::steady_clock::now();
            MetricsRecord rec;
            rec.step = step;
            rec.epoch = epoch;
            rec.lr = lr;
            rec.loss = g.scalar_value(built.loss);
            rec.grad_norm = grad_norm;
            rec.max_neg_sample_grad = max_neg_grad;
            rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            metrics.push_back(rec);
            if (callbacks.on_metrics) {
                callbacks.on_metrics(rec);
            }
            if (callbacks.on_checkpoint && config.checkpoint_every > 0 &&
                step % config.checkpoint_every == 0) {
                callbacks.on_checkpoint(policy, step);
            }
        }
    }
    if (callbacks.on_checkpoint) {
        callbacks.on_checkpoint(policy, step);
    }
    return metrics;
}

}  // namespace rift
