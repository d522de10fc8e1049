#pragma once

#include <map>

#include "rift/policy.hpp"

namespace rift {

/// Per-prompt categorical policy: one logit row per response position,
/// conditioned on the prompt only. The full sequence distribution factorizes
/// over positions and is exactly enumerable, which makes this family the
/// brute-force oracle for the loss-bound checks.
class TabularPolicy : public Policy {
public:
    TabularPolicy(Vocabulary vocab, std::size_t response_length);

    std::size_t response_length() const { return response_length_; }

    /// Ensure a logits table exists for the prompt (zero-initialized).
    void register_prompt(const TokenSeq& prompt);
    bool has_prompt(const TokenSeq& prompt) const;
    std::size_t prompt_count() const { return tables_.size(); }

    /// Gaussian-perturb every registered table.
    void randomize(Rng& rng, double stddev);

    Tensor& logits(const TokenSeq& prompt);
    const Tensor& logits(const TokenSeq& prompt) const;

    /// Exact map response -> probability over the whole length-L universe.
    /// Requires vocab^L <= 1e6.
    std::map<TokenSeq, double> enumerate_sequence_distribution(const TokenSeq& prompt) const;

    const Vocabulary& vocab() const override { return vocab_; }
    std::string family() const override { return "tabular"; }
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
    static std::unique_ptr<TabularPolicy> from_json(const nlohmann::json& j);
    std::unique_ptr<Policy> clone() const override;

private:
    std::size_t table_index(const TokenSeq& prompt) const;
    /// Row-wise log-softmax of a prompt's logit table.
    std::vector<double> log_prob_table(std::size_t table) const;

    Vocabulary vocab_;
    std::size_t response_length_;
    std::map<TokenSeq, std::size_t> prompt_index_;
    std::vector<TokenSeq> prompts_;
    std::vector<Tensor> tables_;  // each (response_length, vocab)
};

}  // namespace rift
