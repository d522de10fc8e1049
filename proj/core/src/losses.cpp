#include "rift/losses.hpp"

#include <cmath>

#include "rift/errors.hpp"

namespace rift {

namespace {

using autodiff::Graph;
using autodiff::NodeId;

struct SampleNodes {
    NodeId per_token;
    NodeId seq_sum;
    std::size_t tokens;
};

std::vector<SampleNodes> forward_samples(Graph& g,
                                         const Policy& policy,
                                         const GraphBinding& binding,
                                         std::span<const TrainSample> samples) {
    if (samples.empty()) {
        throw InputError("loss requires a non-empty batch");
    }
    std::vector<SampleNodes> out;
    out.reserve(samples.size());
    for (const TrainSample& s : samples) {
        SampleNodes n{};
        n.per_token = policy.per_token_log_probs(g, binding, s.prompt, s.response);
        n.seq_sum = g.sum_all(n.per_token);
        n.tokens = g.value(n.per_token).numel();
        out.push_back(n);
    }
    return out;
}

std::vector<NodeId> collect_log_probs(const std::vector<SampleNodes>& nodes) {
    std::vector<NodeId> out;
    out.reserve(nodes.size());
    for (const SampleNodes& n : nodes) out.push_back(n.seq_sum);
    return out;
}

NodeId add_chain(Graph& g, const std::vector<NodeId>& terms) {
    if (terms.empty()) {
        return g.constant_scalar(0.0);
    }
    NodeId acc = terms[0];
    for (std::size_t i = 1; i < terms.size(); ++i) {
        acc = g.add(acc, terms[i]);
    }
    return acc;
}

void require_nonzero_rewards(std::span<const TrainSample> samples) {
    for (const TrainSample& s : samples) {
        if (s.reward == 0.0) {
            throw PreconditionError("reward-weighted losses require nonzero rewards");
        }
    }
}

}  // namespace

std::string loss_kind_name(LossKind k) {
    switch (k) {
        case LossKind::sft: return "sft";
        case LossKind::dft: return "dft";
        case LossKind::rft: return "rft";
        case LossKind::naive_signed: return "naive_signed";
        case LossKind::rift: return "rift";
    }
    return "?";
}

LossKind loss_kind_from_name(const std::string& name) {
    if (name == "sft") return LossKind::sft;
    if (name == "dft") return LossKind::dft;
    if (name == "rft") return LossKind::rft;
    if (name == "naive_signed") return LossKind::naive_signed;
    if (name == "rift") return LossKind::rift;
    throw InputError("unknown loss kind: " + name);
}

std::string length_norm_name(LengthNorm n) {
    return n == LengthNorm::token_mean ? "token_mean" : "sequence_sum";
}

LengthNorm length_norm_from_name(const std::string& name) {
    if (name == "token_mean") return LengthNorm::token_mean;
    if (name == "sequence_sum") return LengthNorm::sequence_sum;
    throw InputError("unknown length norm: " + name);
}

std::string neg_term_name(NegTerm n) {
    return n == NegTerm::faithful ? "faithful" : "geometric_mean";
}

NegTerm neg_term_from_name(const std::string& name) {
    if (name == "faithful") return NegTerm::faithful;
    if (name == "geometric_mean") return NegTerm::geometric_mean;
    throw InputError("unknown neg_term: " + name);
}

LossGraph build_sft_loss(Graph& g,
                         const Policy& policy,
                         const GraphBinding& binding,
                         std::span<const TrainSample> samples,
                         LengthNorm norm) {
    auto nodes = forward_samples(g, policy, binding, samples);
    std::size_t total_tokens = 0;
    std::vector<NodeId> sums;
    sums.reserve(nodes.size());
    for (const SampleNodes& n : nodes) {
        sums.push_back(n.seq_sum);
        total_tokens += n.tokens;
    }
    double normalizer = norm == LengthNorm::token_mean ? static_cast<double>(total_tokens)
                                                       : static_cast<double>(nodes.size());
    LossGraph out;
    out.loss = g.scale(add_chain(g, sums), -1.0 / normalizer);
    out.sample_log_probs = collect_log_probs(nodes);
    return out;
}

LossGraph build_dft_loss(Graph& g,
                         const Policy& policy,
                         const GraphBinding& binding,
                         std::span<const TrainSample> samples,
                         LengthNorm norm) {
    auto nodes = forward_samples(g, policy, binding, samples);
    std::size_t total_tokens = 0;
    std::vector<NodeId> sums;
    sums.reserve(nodes.size());
    for (const SampleNodes& n : nodes) {
        NodeId probs = g.detach(g.exp(n.per_token));
        sums.push_back(g.sum_all(g.mul(probs, n.per_token)));
        total_tokens += n.tokens;
    }
    double normalizer = norm == LengthNorm::token_mean ? static_cast<double>(total_tokens)
                                                       : static_cast<double>(nodes.size());
    LossGraph out;
    out.loss = g.scale(add_chain(g, sums), -1.0 / normalizer);
    out.sample_log_probs = collect_log_probs(nodes);
    return out;
}

LossGraph build_naive_signed_loss(Graph& g,
                                  const Policy& policy,
                                  const GraphBinding& binding,
                                  std::span<const TrainSample> samples,
                                  LengthNorm norm) {
    require_nonzero_rewards(samples);
    auto nodes = forward_samples(g, policy, binding, samples);
    std::vector<NodeId> terms;
    terms.reserve(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        NodeId logp = norm == LengthNorm::token_mean ? g.mean_all(nodes[i].per_token)
                                                     : nodes[i].seq_sum;
        terms.push_back(g.scale(logp, samples[i].reward));
    }
    LossGraph out;
    out.loss = g.scale(add_chain(g, terms), -1.0 / static_cast<double>(nodes.size()));
    out.sample_log_probs = collect_log_probs(nodes);
    return out;
}

LossGraph build_rift_loss(Graph& g,
                          const Policy& policy,
                          const GraphBinding& binding,
                          std::span<const TrainSample> samples,
                          LengthNorm norm,
                          NegTerm neg_term) {
    require_nonzero_rewards(samples);
    auto nodes = forward_samples(g, policy, binding, samples);
    std::vector<NodeId> pos_terms;
    std::vector<NodeId> neg_terms;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (samples[i].reward > 0.0) {
            NodeId logp = norm == LengthNorm::token_mean ? g.mean_all(nodes[i].per_token)
                                                         : nodes[i].seq_sum;
            pos_terms.push_back(g.scale(logp, samples[i].reward));
        } else {
            NodeId logp = neg_term == NegTerm::faithful ? nodes[i].seq_sum
                                                        : g.mean_all(nodes[i].per_token);
            neg_terms.push_back(g.scale(g.exp(logp), samples[i].reward));
        }
    }
    NodeId pos = pos_terms.empty()
                     ? g.constant_scalar(0.0)
                     : g.scale(add_chain(g, pos_terms), -1.0 / static_cast<double>(pos_terms.size()));
    NodeId neg = neg_terms.empty()
                     ? g.constant_scalar(0.0)
                     : g.scale(add_chain(g, neg_terms), -1.0 / static_cast<double>(neg_terms.size()));
    LossGraph out;
    out.loss = g.add(pos, neg);
    out.sample_log_probs = collect_log_probs(nodes);
    return out;
}

double loss_value(LossKind kind,
                  const Policy& policy,
                  std::span<const TrainSample> samples,
                  LengthNorm norm,
                  NegTerm neg_term) {
    autodiff::Graph g;
    GraphBinding binding = policy.bind_parameters(g, /*requires_grad=*/false);
    LossGraph built{};
    switch (kind) {
        case LossKind::sft:
        case LossKind::rft:
            built = build_sft_loss(g, policy, binding, samples, norm);
            break;
        case LossKind::dft:
            built = build_dft_loss(g, policy, binding, samples, norm);
            break;
        case LossKind::naive_signed:
            built = build_naive_signed_loss(g, policy, binding, samples, norm);
            break;
        case LossKind::rift:
            built = build_rift_loss(g, policy, binding, samples, norm, neg_term);
            break;
    }
    return g.scalar_value(built.loss);
}

double naive_term(double reward, double prob) {
    return -reward * std::log(prob);
}

double naive_term_dprob(double reward, double prob) {
    return -reward / prob;
}

double rift_negative_term(double reward, double prob) {
    return -reward * prob;
}

double rift_negative_term_dprob(double reward) {
    return -reward;
}

LowerBoundReport check_reward_lower_bound(const TabularPolicy& policy,
                                          const TabularPolicy& reference,
                                          const TokenSeq& prompt,
                                          const std::function<double(const TokenSeq&)>& reward) {
    auto theta = policy.enumerate_sequence_distribution(prompt);
    auto ref = reference.enumerate_sequence_distribution(prompt);
    if (theta.size() != ref.size()) {
        throw PreconditionError("policy and reference enumerate different universes");
    }

    double c2 = 1.0;
    for (const auto& [seq, p] : ref) {
        c2 = std::min(c2, p);
    }
    if (!(c2 > 0.0)) {
        throw PreconditionError("reference distribution must be strictly positive (C2 > 0)");
    }

    LowerBoundReport report;
    report.c2 = c2;
    double pos_part = 0.0;
    double neg_part = 0.0;
    for (const auto& [seq, p_theta] : theta) {
        double r = reward(seq);
        report.expected_reward += p_theta * r;
        if (r == 0.0) continue;
        double p_ref = ref.at(seq);
        if (r > 0.0) {
            pos_part += p_ref * r * std::log(p_theta);
            report.c1 += p_ref * r * (1.0 - std::log(p_ref));
        } else {
            neg_part += p_ref * r * p_theta;
        }
    }
    report.bound = pos_part + neg_part / c2 + report.c1;
    report.slack = report.expected_reward - report.bound;
    report.holds = report.slack >= -1e-9;
    return report;
}

}  // namespace rift
