#include "rift/buffer.hpp"

#include <fstream>
#include <sstream>

#include "rift/errors.hpp"

namespace rift {

nlohmann::json BufferMeta::to_json() const {
    return nlohmann::json{
        {"k", k},
        {"temperature", temperature},
        {"generator_id", generator_id},
        {"seed", seed},
        {"reward_strategy", reward_strategy},
        {"max_new_tokens", max_new_tokens},
        {"filtered", filtered},
    };
}

BufferMeta BufferMeta::from_json(const nlohmann::json& j) {
    BufferMeta m;
    m.k = j.at("k").get<int>();
    m.temperature = j.at("temperature").get<double>();
    m.generator_id = j.value("generator_id", std::string{});
    m.seed = j.at("seed").get<std::uint64_t>();
    m.reward_strategy = j.value("reward_strategy", std::string{});
    m.max_new_tokens = j.value("max_new_tokens", std::size_t{0});
    m.filtered = j.value("filtered", false);
    return m;
}

std::size_t Buffer::total_samples() const {
    std::size_t n = 0;
    for (const BufferGroup& g : groups) n += g.samples.size();
    return n;
}

const BufferGroup* Buffer::find_group(int problem_id) const {
    for (const BufferGroup& g : groups) {
        if (g.problem_id == problem_id) return &g;
    }
    return nullptr;
}

Buffer build_buffer(const Policy& generator,
                    std::span<const Problem> problems,
                    int k,
                    double temperature,
                    double r_pos,
                    double r_neg,
                    std::uint64_t seed,
                    std::size_t max_new_tokens,
                    const std::string& generator_id) {
    if (k < 1) {
        throw InputError("build_buffer requires k >= 1");
    }
    if (!(r_pos > 0.0) || !(r_neg < 0.0)) {
        throw InputError("build_buffer requires r_pos > 0 > r_neg");
    }
    Buffer buffer;
    buffer.meta.k = k;
    buffer.meta.temperature = temperature;
    buffer.meta.generator_id = generator_id.empty() ? generator.family() : generator_id;
    buffer.meta.seed = seed;
    buffer.meta.max_new_tokens = max_new_tokens;
    buffer.groups.reserve(problems.size());

    Rng root(seed);
    for (const Problem& p : problems) {
        Rng stream = root.derive(RngTag::sample, static_cast<std::uint64_t>(p.id));
        auto responses = generator.sample_responses(p.prompt, k, temperature, max_new_tokens, stream);
        BufferGroup group;
        group.problem_id = p.id;
        group.samples.reserve(responses.size());
        for (SampledResponse& r : responses) {
            RewardedSample s;
            s.problem_id = p.id;
            s.correct = verify_response(p, r.tokens);
            s.reward = s.correct ? r_pos : r_neg;
            s.generator_logprob = r.log_prob;
            s.response = std::move(r.tokens);
            group.samples.push_back(std::move(s));
        }
        buffer.groups.push_back(std::move(group));
    }
    return buffer;
}

BufferStats buffer_stats(const Buffer& buffer) {
    BufferStats st;
    st.n_problems = buffer.groups.size();
    for (const BufferGroup& g : buffer.groups) {
        bool any_pos = false;
        bool any_neg = false;
        for (const RewardedSample& s : g.samples) {
            ++st.n_total;
            if (s.reward > 0.0) {
                ++st.n_pos;
                any_pos = true;
            } else {
                ++st.n_neg;
                any_neg = true;
            }
        }
        if (any_pos && any_neg) ++st.n_mixed;
    }
    if (st.n_total > 0) {
        st.pos_ratio = static_cast<double>(st.n_pos) / static_cast<double>(st.n_total);
    }
    if (st.n_problems > 0) {
        st.mixed_ratio = static_cast<double>(st.n_mixed) / static_cast<double>(st.n_problems);
    }
    return st;
}

Buffer filter_positive(const Buffer& buffer) {
    Buffer out;
    out.meta = buffer.meta;
    out.meta.filtered = true;
    for (const BufferGroup& g : buffer.groups) {
        BufferGroup kept;
        kept.problem_id = g.problem_id;
        for (const RewardedSample& s : g.samples) {
            if (s.reward > 0.0) kept.samples.push_back(s);
        }
        if (!kept.samples.empty()) {
            out.groups.push_back(std::move(kept));
        }
    }
    return out;
}

std::string buffer_to_jsonl(const Buffer& buffer) {
    std::ostringstream out;
    out << nlohmann::json{{"meta", buffer.meta.to_json()}}.dump() << '\n';
    for (const BufferGroup& g : buffer.groups) {
        for (const RewardedSample& s : g.samples) {
            nlohmann::json j{
                {"problem_id", s.problem_id},
                {"response", s.response},
                {"correct", s.correct},
                {"reward", s.reward},
                {"generator_logprob", s.generator_logprob},
            };
            out << j.dump() << '\n';
        }
    }
    return out.str();
}

Buffer buffer_from_jsonl(std::istream& in) {
    Buffer buffer;
    std::string line;
    if (!std::getline(in, line)) {
        throw InputError("buffer stream is empty");
    }
    buffer.meta = BufferMeta::from_json(nlohmann::json::parse(line).at("meta"));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        RewardedSample s;
        s.problem_id = j.at("problem_id").get<int>();
        s.response = j.at("response").get<TokenSeq>();
        s.correct = j.at("correct").get<bool>();
        s.reward = j.at("reward").get<double>();
        s.generator_logprob = j.at("generator_logprob").get<double>();
        if (buffer.groups.empty() || buffer.groups.back().problem_id != s.problem_id) {
            buffer.groups.push_back(BufferGroup{s.problem_id, {}});
        }
        buffer.groups.back().samples.push_back(std::move(s));
    }
    return buffer;
}

Buffer load_buffer(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open buffer file: " + path);
    }
    return buffer_from_jsonl(in);
}

std::string stats_to_csv(const BufferStats& stats, const std::string& label) {
    std::ostringstream out;
    out << "label,n_problems,n_total,n_pos,n_neg,pos_ratio,n_mixed,mixed_ratio\n";
    char line[256];
    std::snprintf(line, sizeof(line), "%s,%zu,%zu,%zu,%zu,%.4f,%zu,%.4f\n", label.c_str(),
                  stats.n_problems, stats.n_total, stats.n_pos, stats.n_neg, stats.pos_ratio,
                  stats.n_mixed, stats.mixed_ratio);
    out << line;
    return out.str();
}

}  // namespace rift
