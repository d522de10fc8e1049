#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rift/policy.hpp"
#include "rift/tabular_policy.hpp"

namespace rift {

enum class LossKind { sft, dft, rft, naive_signed, rift };
enum class LengthNorm { token_mean, sequence_sum };
/// Treatment of the sequence probability in the linear negative-sample term:
/// `faithful` uses exp(sum of token log-probs); `geometric_mean` uses
/// exp(mean of token log-probs), a length-normalized variant.
enum class NegTerm { faithful, geometric_mean };

std::string loss_kind_name(LossKind k);
LossKind loss_kind_from_name(const std::string& name);
std::string length_norm_name(LengthNorm n);
LengthNorm length_norm_from_name(const std::string& name);
std::string neg_term_name(NegTerm n);
NegTerm neg_term_from_name(const std::string& name);

/// One training example. Rewards are +1 placeholders for the demonstration
/// losses (sft/dft), which ignore them.
struct TrainSample {
    TokenSeq prompt;
    TokenSeq response;
    double reward = 1.0;
    bool correct = true;
};

struct LossGraph {
    autodiff::NodeId loss;
    /// Sum of per-token log-probs for each sample (log pi(y|x)), in input
    /// order; read values after forward for per-sample diagnostics.
    std::vector<autodiff::NodeId> sample_log_probs;
};

/// Negative log-likelihood of the responses:
///   sum of -log p over all tokens, divided by the total token count
///   (token_mean) or the sample count (sequence_sum).
LossGraph build_sft_loss(autodiff::Graph& g,
                         const Policy& policy,
                         const GraphBinding& binding,
                         std::span<const TrainSample> samples,
                         LengthNorm norm);

/// SFT rescaled at each token by its own probability; the scale factor is
/// detached and carries no gradient.
LossGraph build_dft_loss(autodiff::Graph& g,
                         const Policy& policy,
                         const GraphBinding& binding,
                         std::span<const TrainSample> samples,
                         LengthNorm norm);

/// Signed reward-weighted log-likelihood over all samples:
///   -mean_i r_i * L_i, with L_i the summed (sequence_sum) or token-averaged
///   (token_mean) log-prob. Unbounded below when negative rewards exist.
LossGraph build_naive_signed_loss(autodiff::Graph& g,
                                  const Policy& policy,
                                  const GraphBinding& binding,
                                  std::span<const TrainSample> samples,
                                  LengthNorm norm);

/// Reward-informed loss: the log term above over positive-reward samples plus
/// a linear probability term -mean_i r_i * pi_i over negative-reward samples.
/// Each mean is over its own within-batch count; an empty side contributes 0.
/// The linear term keeps every negative sample's contribution inside
/// [0, |r|], which is what prevents the collapse of the naive loss.
LossGraph build_rift_loss(autodiff::Graph& g,
                          const Policy& policy,
                          const GraphBinding& binding,
                          std::span<const TrainSample> samples,
                          LengthNorm norm,
                          NegTerm neg_term = NegTerm::faithful);

/// Value-only convenience for tests and diagnostics.
double loss_value(LossKind kind,
                  const Policy& policy,
                  std::span<const TrainSample> samples,
                  LengthNorm norm,
                  NegTerm neg_term = NegTerm::faithful);

/// Per-sample analytic terms and their derivatives in the sequence
/// probability. The contrast between the two derivatives is the stability
/// argument in executable form: |d naive / d pi| = |r|/pi blows up as the
/// policy succeeds at suppression, while the linear term's derivative is the
/// constant -r.
double naive_term(double reward, double prob);
double naive_term_dprob(double reward, double prob);
double rift_negative_term(double reward, double prob);
double rift_negative_term_dprob(double reward);

struct LowerBoundReport {
    double expected_reward = 0.0;  // exact E_{y~pi_theta}[r(y)] by enumeration
    double bound = 0.0;
    double slack = 0.0;            // expected_reward - bound
    double c1 = 0.0;
    double c2 = 0.0;
    bool holds = false;            // slack >= -1e-9
};

/// Executable form of the importance-sampling lower bound: with reference
/// probabilities bounded below by C2 = min_y ref(y) and
/// C1 = sum_{r>0} ref(y) r (1 - log ref(y)), the expected reward satisfies
///   J >= sum_{r>0} ref(y) r log pi(y) + (1/C2) sum_{r<0} ref(y) r pi(y) + C1.
/// Both distributions are enumerated exactly over the response universe.
LowerBoundReport check_reward_lower_bound(const TabularPolicy& policy,
                                          const TabularPolicy& reference,
                                          const TokenSeq& prompt,
                                          const std::function<double(const TokenSeq&)>& reward);

}  // namespace rift
