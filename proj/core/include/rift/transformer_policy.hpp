#pragma once

#include "rift/policy.hpp"

namespace rift {

struct TransformerConfig {
    std::size_t d_model = 32;
    std::size_t n_layers = 2;
    std::size_t n_heads = 2;
    std::size_t max_len = 32;
    std::size_t mlp_mult = 4;
    double init_std = 0.08;

    nlohmann::json to_json() const;
    static TransformerConfig from_json(const nlohmann::json& j);
};

/// Decoder-only transformer sized for minutes-scale CPU training: learned
/// token + position embeddings, per-head attention projections, relu MLP,
/// rms-normalized pre-activations, no biases, no KV cache.
class TransformerPolicy : public Policy {
public:
    TransformerPolicy(Vocabulary vocab, TransformerConfig config, Rng init_rng);

    const TransformerConfig& config() const { return config_; }

    /// Logits over the vocabulary for every position of `input_ids` (T, V).
    autodiff::NodeId logits_node(autodiff::Graph& g,
                                 const GraphBinding& binding,
                                 const TokenSeq& input_ids) const;

    const Vocabulary& vocab() const override { return vocab_; }
    std::string family() const override { return "transformer"; }
    std::vector<Tensor*> parameters() override;
    std::vector<const Tensor*> parameters() const override;
    LogProb log_prob(const TokenSeq& prompt, const TokenSeq& response) const override;
    std::vector<SampledResponse> sample_responses(const TokenSeq& prompt,
                                                  int k,
                                                  double temperature,
                                                  std::size_t max_new_tokens,
                                                  Rng& rng) const override;
    GraphBinding bind_parameters(autodiff::Graph& g, bool requires_grad = true) const override;
    autodiff::NodeId per_token_log_probs(autodiff::Graph& g,
                                         const GraphBinding& binding,
                                         const TokenSeq& prompt,
                                         const TokenSeq& response) const override;
    nlohmann::json to_json() const override;
    static std::unique_ptr<TransformerPolicy> from_json(const nlohmann::json& j);
    std::unique_ptr<Policy> clone() const override;

private:
    struct LayerSlots {
        std::size_t wq0, wk0, wv0, wo0;  // first head's slot; heads are contiguous
        std::size_t w1, w2;
    };

    void build_parameters();
    std::size_t head_dim() const { return config_.d_model / config_.n_heads; }
    /// Last-row logits for an input prefix, evaluated without gradients.
    std::vector<double> next_token_logits(const TokenSeq& input_ids) const;

    Vocabulary vocab_;
    TransformerConfig config_;
    std::vector<Tensor> params_;
    std::size_t slot_wte_ = 0;
    std::size_t slot_wpe_ = 0;
    std::size_t slot_wlm_ = 0;
    std::vector<LayerSlots> layers_;
};

}  // namespace rift
