#include "rift/transformer_policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rift/errors.hpp"

namespace rift {

namespace {

constexpr double kMaskValue = -1e9;

void check_sequence(const Vocabulary& vocab, const TokenSeq& seq, const char* what) {
    if (seq.empty()) {
        throw InputError(std::string(what) + " must be non-empty");
    }
    vocab.require(seq);
}

}  // namespace

nlohmann::json TransformerConfig::to_json() const {
    return nlohmann::json{
        {"d_model", d_model},   {"n_layers", n_layers}, {"n_heads", n_heads},
        {"max_len", max_len},   {"mlp_mult", mlp_mult}, {"init_std", init_std},
    };
}

TransformerConfig TransformerConfig::from_json(const nlohmann::json& j) {
    TransformerConfig c;
    c.d_model = j.at("d_model").get<std::size_t>();
    c.n_layers = j.at("n_layers").get<std::size_t>();
    c.n_heads = j.at("n_heads").get<std::size_t>();
    c.max_len = j.at("max_len").get<std::size_t>();
    c.mlp_mult = j.value("mlp_mult", std::size_t{4});
    c.init_std = j.value("init_std", 0.08);
    return c;
}

TransformerPolicy::TransformerPolicy(Vocabulary vocab, TransformerConfig config, Rng init_rng)
    : vocab_(std::move(vocab)), config_(config) {
    if (config_.d_model == 0 || config_.n_heads == 0 || config_.n_layers == 0 ||
        config_.max_len == 0 || config_.mlp_mult == 0) {
        throw InputError("transformer config requires positive dimensions");
    }
    if (config_.d_model % config_.n_heads != 0) {
        throw InputError("d_model must be divisible by n_heads");
    }
    build_parameters();
    for (Tensor& t : params_) {
        for (double& v : t.values) v = init_rng.next_gaussian() * config_.init_std;
    }
}

void TransformerPolicy::build_parameters() {
    std::size_t d = config_.d_model;
    std::size_t dh = head_dim();
    std::size_t v = vocab_.size();
    std::size_t mlp = d * config_.mlp_mult;

    auto push = [&](std::size_t rows, std::size_t cols) {
        Tensor t = Tensor::zeros({rows, cols});
        t.requires_grad = true;
        params_.push_back(std::move(t));
        return params_.size() - 1;
    };

    slot_wte_ = push(v, d);
    slot_wpe_ = push(config_.max_len, d);
    layers_.clear();
    for (std::size_t l = 0; l < config_.n_layers; ++l) {
        LayerSlots slots{};
        slots.wq0 = params_.size();
        for (std::size_t h = 0; h < config_.n_heads; ++h) push(d, dh);
        slots.wk0 = params_.size();
        for (std::size_t h = 0; h < config_.n_heads; ++h) push(d, dh);
        slots.wv0 = params_.size();
        for (std::size_t h = 0; h < config_.n_heads; ++h) push(d, dh);
        slots.wo0 = params_.size();
        for (std::size_t h = 0; h < config_.n_heads; ++h) push(dh, d);
        slots.w1 = push(d, mlp);
        slots.w2 = push(mlp, d);
        layers_.push_back(slots);
    }
    slot_wlm_ = push(d, v);
}

std::vector<Tensor*> TransformerPolicy::parameters() {
    std::vector<Tensor*> out;
    out.reserve(params_.size());
    for (Tensor& t : params_) out.push_back(&t);
    return out;
}

std::vector<const Tensor*> TransformerPolicy::parameters() const {
    std::vector<const Tensor*> out;
    out.reserve(params_.size());
    for (const Tensor& t : params_) out.push_back(&t);
    return out;
}

GraphBinding TransformerPolicy::bind_parameters(autodiff::Graph& g, bool requires_grad) const {
    GraphBinding b;
    b.nodes.reserve(params_.size());
    for (const Tensor& t : params_) {
        Tensor copy = t;
        copy.requires_grad = requires_grad;
        copy.grad.reset();
        b.nodes.push_back(g.leaf(std::move(copy)));
    }
    return b;
}

autodiff::NodeId TransformerPolicy::logits_node(autodiff::Graph& g,
                                                const GraphBinding& binding,
                                                const TokenSeq& input_ids) const {
    check_sequence(vocab_, input_ids, "transformer input");
    std::size_t t = input_ids.size();
    if (t > config_.max_len) {
        throw InputError("response exceeds max_len");
    }
    using autodiff::NodeId;

    std::vector<std::int32_t> token_rows(input_ids.begin(), input_ids.end());
    std::vector<std::int32_t> pos_rows(t);
    std::iota(pos_rows.begin(), pos_rows.end(), 0);

    NodeId x = g.add(g.gather_rows(binding.nodes[slot_wte_], token_rows),
                     g.gather_rows(binding.nodes[slot_wpe_], pos_rows));

    // Strictly-causal mask: position i attends to j <= i only.
    Tensor mask = Tensor::zeros({t, t});
    for (std::size_t i = 0; i < t; ++i) {
        for (std::size_t j = i + 1; j < t; ++j) {
            mask.at(i, j) = kMaskValue;
        }
    }
    NodeId mask_node = g.constant(std::move(mask));

    double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(head_dim()));
    for (const LayerSlots& layer : layers_) {
        NodeId h = g.rms_norm_rows(x);
        NodeId attn{};
        bool first = true;
        for (std::size_t head = 0; head < config_.n_heads; ++head) {
            NodeId q = g.matmul(h, binding.nodes[layer.wq0 + head]);
            NodeId k = g.matmul(h, binding.nodes[layer.wk0 + head]);
            NodeId v = g.matmul(h, binding.nodes[layer.wv0 + head]);
            NodeId scores = g.add(g.scale(g.matmul_nt(q, k), inv_sqrt_dh), mask_node);
            NodeId weights = g.softmax_rows(scores);
            NodeId head_out = g.matmul(g.matmul(weights, v), binding.nodes[layer.wo0 + head]);
            attn = first ? head_out : g.add(attn, head_out);
            first = false;
        }
        x = g.add(x, attn);
        NodeId h2 = g.rms_norm_rows(x);
        NodeId m = g.relu(g.matmul(h2, binding.nodes[layer.w1]));
        x = g.add(x, g.matmul(m, binding.nodes[layer.w2]));
    }
    return g.matmul(g.rms_norm_rows(x), binding.nodes[slot_wlm_]);
}

autodiff::NodeId TransformerPolicy::per_token_log_probs(autodiff::Graph& g,
                                                        const GraphBinding& binding,
                                                        const TokenSeq& prompt,
                                                        const TokenSeq& response) const {
    check_sequence(vocab_, prompt, "prompt");
    check_sequence(vocab_, response, "response");
    // Position i predicts token i+1, so the last response token is not fed in.
    TokenSeq input = prompt;
    input.insert(input.end(), response.begin(), response.end() - 1);
    autodiff::NodeId lp = g.log_softmax_rows(logits_node(g, binding, input));
    lp = g.slice_rows(lp, prompt.size() - 1, input.size());
    std::vector<std::int32_t> ids(response.begin(), response.end());
    return g.take_per_row(lp, std::move(ids));
}

LogProb TransformerPolicy::log_prob(const TokenSeq& prompt, const TokenSeq& response) const {
    autodiff::Graph g;
    GraphBinding binding = bind_parameters(g, /*requires_grad=*/false);
    autodiff::NodeId per_token = per_token_log_probs(g, binding, prompt, response);
    LogProb out;
    out.per_token = g.value(per_token).values;
    for (double v : out.per_token) out.total += v;
    return out;
}

std::vector<double> TransformerPolicy::next_token_logits(const TokenSeq& input_ids) const {
    autodiff::Graph g;
    GraphBinding binding = bind_parameters(g, /*requires_grad=*/false);
    autodiff::NodeId logits = logits_node(g, binding, input_ids);
    const Tensor& v = g.value(logits);
    std::size_t cols = v.shape[1];
    std::size_t last = v.shape[0] - 1;
    return std::vector<double>(v.values.begin() + static_cast<std::ptrdiff_t>(last * cols),
                               v.values.begin() + static_cast<std::ptrdiff_t>((last + 1) * cols));
}

std::vector<SampledResponse> TransformerPolicy::sample_responses(const TokenSeq& prompt,
                                                                 int k,
                                                                 double temperature,
                                                                 std::size_t max_new_tokens,
                                                                 Rng& rng) const {
    check_sequence(vocab_, prompt, "prompt");
    if (k < 1) {
        throw InputError("sample_responses requires k >= 1");
    }
    if (temperature < 0.0) {
        throw InputError("temperature must be >= 0");
    }
    if (max_new_tokens == 0) {
        throw InputError("sample_responses requires max_new_tokens >= 1");
    }
    if (prompt.size() >= config_.max_len) {
        throw InputError("prompt leaves no room under max_len");
    }

    std::size_t vsize = vocab_.size();
    std::vector<SampledResponse> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int s = 0; s < k; ++s) {
        SampledResponse r;
        TokenSeq input = prompt;
        while (r.tokens.size() < max_new_tokens && input.size() < config_.max_len) {
            std::vector<double> logits = next_token_logits(input);
            // Canonical log-prob of the pick is accumulated at temperature 1.
            double mx = *std::max_element(logits.begin(), logits.end());
            double lse = 0.0;
            for (double l : logits) lse += std::exp(l - mx);
            lse = mx + std::log(lse);

            TokenId tok;
            if (temperature == 0.0) {
                std::size_t best = 0;
                for (std::size_t i = 1; i < vsize; ++i) {
                    if (logits[i] > logits[best]) best = i;
                }
                tok = static_cast<TokenId>(best);
            } else {
                std::vector<double> probs(vsize);
                double smx = mx / temperature;
                double ssum = 0.0;
                for (std::size_t i = 0; i < vsize; ++i) {
                    probs[i] = std::exp(logits[i] / temperature - smx);
                    ssum += probs[i];
                }
                for (double& p : probs) p /= ssum;
                tok = static_cast<TokenId>(rng.next_categorical(probs));
            }
            r.log_prob += logits[static_cast<std::size_t>(tok)] - lse;
            r.tokens.push_back(tok);
            input.push_back(tok);
            if (tok == Vocabulary::kEos) break;
        }
        out.push_back(std::move(r));
    }
    return out;
}

nlohmann::json TransformerPolicy::to_json() const {
    nlohmann::json params = nlohmann::json::array();
    for (const Tensor& t : params_) {
        params.push_back(t.values);
    }
    return nlohmann::json{
        {"version", 1},
        {"family", family()},
        {"config", config_.to_json()},
        {"vocab", vocab_.to_json()},
        {"params", std::move(params)},
    };
}

std::unique_ptr<TransformerPolicy> TransformerPolicy::from_json(const nlohmann::json& j) {
    auto policy = std::make_unique<TransformerPolicy>(Vocabulary::from_json(j.at("vocab")),
                                                      TransformerConfig::from_json(j.at("config")),
                                                      Rng(0));
    const auto& params = j.at("params");
    if (params.size() != policy->params_.size()) {
        throw InputError("transformer checkpoint has wrong parameter count");
    }
    for (std::size_t i = 0; i < policy->params_.size(); ++i) {
        auto values = params[i].get<std::vector<double>>();
        if (values.size() != policy->params_[i].values.size()) {
            throw InputError("transformer checkpoint has wrong tensor size");
        }
        policy->params_[i].values = std::move(values);
    }
    return policy;
}

std::unique_ptr<Policy> TransformerPolicy::clone() const {
    return std::make_unique<TransformerPolicy>(*this);
}

}  // namespace rift
