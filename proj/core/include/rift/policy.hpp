#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rift/graph.hpp"
#include "rift/rng.hpp"
#include "rift/vocabulary.hpp"

namespace rift {

struct LogProb {
    std::vector<double> per_token;
    double total = 0.0;
};

struct SampledResponse {
    TokenSeq tokens;
    /// Canonical (temperature-1) log-probability of the sampled sequence.
    double log_prob = 0.0;
};

/// Leaf nodes for a policy's parameters inside one graph, parallel to
/// parameters() order. All samples of a batch share one binding so gradients
/// accumulate across samples.
struct GraphBinding {
    std::vector<autodiff::NodeId> nodes;
};

/// Autoregressive token policy pi(y|x). Policies are immutable during
/// inference; log_prob and sample_responses may run concurrently on a shared
/// instance. Training mutates parameters and requires exclusive access.
class Policy {
public:
    virtual ~Policy() = default;

    virtual const Vocabulary& vocab() const = 0;
    virtual std::string family() const = 0;

    virtual std::vector<Tensor*> parameters() = 0;
    virtual std::vector<const Tensor*> parameters() const = 0;

    /// Per-token log-probabilities of `response` given `prompt` and their sum.
    virtual LogProb log_prob(const TokenSeq& prompt, const TokenSeq& response) const = 0;

    /// K responses drawn at the given temperature. Temperature 0 is greedy
    /// argmax with ties broken by lowest token id. Responses terminate with
    /// EOS or are truncated at max_new_tokens. Deterministic given the stream.
    virtual std::vector<SampledResponse> sample_responses(const TokenSeq& prompt,
                                                          int k,
                                                          double temperature,
                                                          std::size_t max_new_tokens,
                                                          Rng& rng) const = 0;

    /// Create parameter leaves in `g`; requires_grad=false gives a value-only
    /// forward pass.
    virtual GraphBinding bind_parameters(autodiff::Graph& g, bool requires_grad = true) const = 0;

    /// Node holding the per-token log-probabilities of `response` (shape:
    /// response length). Summing it yields log pi(y|x).
    virtual autodiff::NodeId per_token_log_probs(autodiff::Graph& g,
                                                 const GraphBinding& binding,
                                                 const TokenSeq& prompt,
                                                 const TokenSeq& response) const = 0;

    virtual nlohmann::json to_json() const = 0;
    virtual std::unique_ptr<Policy> clone() const = 0;
};

}  // namespace rift
