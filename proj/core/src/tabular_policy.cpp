#include "rift/tabular_policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rift/errors.hpp"

namespace rift {

namespace {

constexpr std::size_t kEnumerationCap = 1000000;

void log_softmax_row(const double* logits, std::size_t n, double* out) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, logits[i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += std::exp(logits[i] - mx);
    double lse = mx + std::log(sum);
    for (std::size_t i = 0; i < n; ++i) out[i] = logits[i] - lse;
}

}  // namespace

TabularPolicy::TabularPolicy(Vocabulary vocab, std::size_t response_length)
    : vocab_(std::move(vocab)), response_length_(response_length) {
    if (response_length_ == 0) {
        throw InputError("tabular policy requires response_length >= 1");
    }
}

void TabularPolicy::register_prompt(const TokenSeq& prompt) {
    vocab_.require(prompt);
    if (prompt_index_.contains(prompt)) return;
    prompt_index_[prompt] = tables_.size();
    prompts_.push_back(prompt);
    Tensor t = Tensor::zeros({response_length_, vocab_.size()});
    t.requires_grad = true;
    tables_.push_back(std::move(t));
}

bool TabularPolicy::has_prompt(const TokenSeq& prompt) const {
    return prompt_index_.contains(prompt);
}

std::size_t TabularPolicy::table_index(const TokenSeq& prompt) const {
    auto it = prompt_index_.find(prompt);
    if (it == prompt_index_.end()) {
        throw InputError("tabular policy has no logits for this prompt");
    }
    return it->second;
}

void TabularPolicy::randomize(Rng& rng, double stddev) {
    for (Tensor& t : tables_) {
        for (double& v : t.values) v = rng.next_gaussian() * stddev;
    }
}

Tensor& TabularPolicy::logits(const TokenSeq& prompt) {
    return tables_[table_index(prompt)];
}

const Tensor& TabularPolicy::logits(const TokenSeq& prompt) const {
    return tables_[table_index(prompt)];
}

std::vector<Tensor*> TabularPolicy::parameters() {
    std::vector<Tensor*> out;
    out.reserve(tables_.size());
    for (Tensor& t : tables_) out.push_back(&t);
    return out;
}

std::vector<const Tensor*> TabularPolicy::parameters() const {
    std::vector<const Tensor*> out;
    out.reserve(tables_.size());
    for (const Tensor& t : tables_) out.push_back(&t);
    return out;
}

std::vector<double> TabularPolicy::log_prob_table(std::size_t table) const {
    const Tensor& t = tables_[table];
    std::size_t v = vocab_.size();
    std::vector<double> out(t.values.size());
    for (std::size_t pos = 0; pos < response_length_; ++pos) {
        log_softmax_row(t.values.data() + pos * v, v, out.data() + pos * v);
    }
    return out;
}

LogProb TabularPolicy::log_prob(const TokenSeq& prompt, const TokenSeq& response) const {
    vocab_.require(response);
    if (response.empty()) {
        throw InputError("log_prob requires a non-empty response");
    }
    if (response.size() > response_length_) {
        throw InputError("response exceeds tabular response_length");
    }
    std::size_t table = table_index(prompt);
    std::vector<double> lp = log_prob_table(table);
    LogProb out;
    out.per_token.reserve(response.size());
    std::size_t v = vocab_.size();
    for (std::size_t pos = 0; pos < response.size(); ++pos) {
        double l = lp[pos * v + static_cast<std::size_t>(response[pos])];
        out.per_token.push_back(l);
        out.total += l;
    }
    return out;
}

std::vector<SampledResponse> TabularPolicy::sample_responses(const TokenSeq& prompt,
                                                             int k,
                                                             double temperature,
                                                             std::size_t /*max_new_tokens*/,
                                                             Rng& rng) const {
    if (k < 1) {
        throw InputError("sample_responses requires k >= 1");
    }
    if (temperature < 0.0) {
        throw InputError("temperature must be >= 0");
    }
    std::size_t table = table_index(prompt);
    const Tensor& t = tables_[table];
    std::size_t v = vocab_.size();
    std::vector<double> canonical = log_prob_table(table);

    // Per-position sampling distributions at the requested temperature.
    std::vector<double> probs(t.values.size());
    std::vector<TokenId> greedy(response_length_);
    for (std::size_t pos = 0; pos < response_length_; ++pos) {
        const double* row = t.values.data() + pos * v;
        if (temperature == 0.0) {
            std::size_t best = 0;
            for (std::size_t i = 1; i < v; ++i) {
                if (row[i] > row[best]) best = i;
            }
            greedy[pos] = static_cast<TokenId>(best);
        } else {
            std::vector<double> scaled(v);
            for (std::size_t i = 0; i < v; ++i) scaled[i] = row[i] / temperature;
            log_softmax_row(scaled.data(), v, probs.data() + pos * v);
            for (std::size_t i = 0; i < v; ++i) {
                probs[pos * v + i] = std::exp(probs[pos * v + i]);
            }
        }
    }

    std::vector<SampledResponse> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int s = 0; s < k; ++s) {
        SampledResponse r;
        r.tokens.resize(response_length_);
        for (std::size_t pos = 0; pos < response_length_; ++pos) {
            TokenId tok;
            if (temperature == 0.0) {
                tok = greedy[pos];
            } else {
                std::span<const double> row(probs.data() + pos * v, v);
                tok = static_cast<TokenId>(rng.next_categorical(row));
            }
            r.tokens[pos] = tok;
            r.log_prob += canonical[pos * v + static_cast<std::size_t>(tok)];
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::map<TokenSeq, double> TabularPolicy::enumerate_sequence_distribution(
    const TokenSeq& prompt) const {
    std::size_t v = vocab_.size();
    double count = std::pow(static_cast<double>(v), static_cast<double>(response_length_));
    if (count > static_cast<double>(kEnumerationCap)) {
        throw CapacityError("sequence universe exceeds the enumeration cap");
    }
    std::size_t table = table_index(prompt);
    std::vector<double> lp = log_prob_table(table);

    std::map<TokenSeq, double> out;
    TokenSeq seq(response_length_, 0);
    while (true) {
        double total = 0.0;
        for (std::size_t pos = 0; pos < response_length_; ++pos) {
            total += lp[pos * v + static_cast<std::size_t>(seq[pos])];
        }
        out[seq] = std::exp(total);
        // Odometer increment over the token universe.
        std::size_t pos = response_length_;
        while (pos > 0) {
            --pos;
            if (static_cast<std::size_t>(seq[pos]) + 1 < v) {
                ++seq[pos];
                std::fill(seq.begin() + static_cast<std::ptrdiff_t>(pos) + 1, seq.end(), 0);
                break;
            }
            if (pos == 0) return out;
        }
    }
}

GraphBinding TabularPolicy::bind_parameters(autodiff::Graph& g, bool requires_grad) const {
    GraphBinding b;
    b.nodes.reserve(tables_.size());
    for (const Tensor& t : tables_) {
        Tensor copy = t;
        copy.requires_grad = requires_grad;
        copy.grad.reset();
        b.nodes.push_back(g.leaf(std::move(copy)));
    }
    return b;
}

autodiff::NodeId TabularPolicy::per_token_log_probs(autodiff::Graph& g,
                                                    const GraphBinding& binding,
                                                    const TokenSeq& prompt,
                                                    const TokenSeq& response) const {
    vocab_.require(response);
    if (response.empty()) {
        throw InputError("log_prob requires a non-empty response");
    }
    if (response.size() > response_length_) {
        throw InputError("response exceeds tabular response_length");
    }
    std::size_t table = table_index(prompt);
    autodiff::NodeId logits = binding.nodes.at(table);
    autodiff::NodeId lp = g.log_softmax_rows(logits);
    if (response.size() < response_length_) {
        lp = g.slice_rows(lp, 0, response.size());
    }
    std::vector<std::int32_t> ids(response.begin(), response.end());
    return g.take_per_row(lp, std::move(ids));
}

nlohmann::json TabularPolicy::to_json() const {
    nlohmann::json tables = nlohmann::json::array();
    for (std::size_t i = 0; i < prompts_.size(); ++i) {
        tables.push_back(nlohmann::json{
            {"prompt", prompts_[i]},
            {"logits", tables_[i].values},
        });
    }
    return nlohmann::json{
        {"version", 1},
        {"family", family()},
        {"response_length", response_length_},
        {"vocab", vocab_.to_json()},
        {"tables", std::move(tables)},
    };
}

std::unique_ptr<TabularPolicy> TabularPolicy::from_json(const nlohmann::json& j) {
    auto policy = std::make_unique<TabularPolicy>(Vocabulary::from_json(j.at("vocab")),
                                                  j.at("response_length").get<std::size_t>());
    for (const auto& entry : j.at("tables")) {
        TokenSeq prompt = entry.at("prompt").get<TokenSeq>();
        policy->register_prompt(prompt);
        auto values = entry.at("logits").get<std::vector<double>>();
        Tensor& t = policy->logits(prompt);
        if (values.size() != t.values.size()) {
            throw InputError("tabular checkpoint has wrong logits size");
        }
        t.values = std::move(values);
    }
    return policy;
}

std::unique_ptr<Policy> TabularPolicy::clone() const {
    return std::make_unique<TabularPolicy>(*this);
}

}  // namespace rift
