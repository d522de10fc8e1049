#include "riftlab/experiment.hpp"

#include <fstream>

#include "rift/checkpoint.hpp"
#include "rift/errors.hpp"
#include "rift/tabular_policy.hpp"

namespace rift::cli {

nlohmann::json ExperimentConfig::to_json() const {
    return nlohmann::json{
        {"version", version},
        {"task", task.to_json()},
        {"problems",
         {{"n_train", problems.n_train}, {"n_test", problems.n_test}, {"seed", problems.seed}}},
        {"policy",
         {{"family", policy.family},
          {"transformer", policy.transformer.to_json()},
          {"tabular_response_length", policy.tabular_response_length},
          {"tabular_init_std", policy.tabular_init_std},
          {"init_seed", policy.init_seed}}},
        {"buffer",
         {{"k", buffer.k},
          {"temperature", buffer.temperature},
          {"r_pos", buffer.r_pos},
          {"r_neg", buffer.r_neg},
          {"seed", buffer.seed},
          {"max_new_tokens", buffer.max_new_tokens},
          {"path", buffer.path},
          {"generator_checkpoint", buffer.generator_checkpoint}}},
        {"reward", reward.to_json()},
        {"train", train.to_json()},
        {"eval",
         {{"k", eval.k},
          {"temperature", eval.temperature},
          {"seed", eval.seed},
          {"pass_threshold", eval.pass_threshold}}},
        {"init_checkpoint", init_checkpoint},
        {"output_dir", output_dir},
    };
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.version = j.value("version", 1);
    if (c.version != 1) {
        throw ConfigError("unsupported config version " + std::to_string(c.version));
    }
    if (j.contains("task")) c.task = TaskSpec::from_json(j.at("task"));
    if (j.contains("problems")) {
        const auto& p = j.at("problems");
        c.problems.n_train = p.value("n_train", c.problems.n_train);
        c.problems.n_test = p.value("n_test", c.problems.n_test);
        c.problems.seed = p.value("seed", c.problems.seed);
    }
    if (j.contains("policy")) {
        const auto& p = j.at("policy");
        c.policy.family = p.value("family", c.policy.family);
        if (p.contains("transformer")) {
            c.policy.transformer = TransformerConfig::from_json(p.at("transformer"));
        }
        c.policy.tabular_response_length =
            p.value("tabular_response_length", c.policy.tabular_response_length);
        c.policy.tabular_init_std = p.value("tabular_init_std", c.policy.tabular_init_std);
        c.policy.init_seed = p.value("init_seed", c.policy.init_seed);
    }
    if (j.contains("buffer")) {
        const auto& b = j.at("buffer");
        c.buffer.k = b.value("k", c.buffer.k);
        c.buffer.temperature = b.value("temperature", c.buffer.temperature);
        c.buffer.r_pos = b.value("r_pos", c.buffer.r_pos);
        c.buffer.r_neg = b.value("r_neg", c.buffer.r_neg);
        c.buffer.seed = b.value("seed", c.buffer.seed);
        c.buffer.max_new_tokens = b.value("max_new_tokens", c.buffer.max_new_tokens);
        c.buffer.path = b.value("path", c.buffer.path);
        c.buffer.generator_checkpoint =
            b.value("generator_checkpoint", c.buffer.generator_checkpoint);
    }
    if (j.contains("reward")) c.reward = RewardStrategy::from_json(j.at("reward"));
    if (j.contains("train")) c.train = TrainConfig::from_json(j.at("train"));
    if (j.contains("eval")) {
        const auto& e = j.at("eval");
        c.eval.k = e.value("k", c.eval.k);
        c.eval.temperature = e.value("temperature", c.eval.temperature);
        c.eval.seed = e.value("seed", c.eval.seed);
        c.eval.pass_threshold = e.value("pass_threshold", c.eval.pass_threshold);
    }
    c.init_checkpoint = j.value("init_checkpoint", std::string{});
    c.output_dir = j.value("output_dir", std::string{});
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed config JSON: " + std::string(e.what()));
    }
    return from_json(j);
}

void ExperimentConfig::validate() const {
    if (problems.n_train < 1) {
        throw ConfigError("problems.n_train must be >= 1");
    }
    if (problems.n_train + problems.n_test > task.universe_size()) {
        throw ConfigError("train+test problems exceed the task universe");
    }
    if (policy.family != "transformer" && policy.family != "tabular") {
        throw ConfigError("policy.family must be transformer or tabular");
    }
    if (buffer.k < 1) {
        throw ConfigError("buffer.k must be >= 1");
    }
    if (buffer.temperature < 0.0) {
        throw ConfigError("buffer.temperature must be >= 0");
    }
    if (!(buffer.r_pos > 0.0) || !(buffer.r_neg < 0.0)) {
        throw ConfigError("buffer rewards must satisfy r_pos > 0 > r_neg");
    }
    if (eval.k < 1) {
        throw ConfigError("eval.k must be >= 1");
    }
    train.validate();
    if (policy.family == "transformer") {
        std::size_t longest_prompt = task.kind == TaskKind::modular_addition
                                         ? 5
                                         : static_cast<std::size_t>(task.length) + 2;
        if (longest_prompt + resolved_max_new_tokens() > policy.transformer.max_len) {
            throw ConfigError("max_len too small for prompt plus sampled tokens");
        }
        if (longest_prompt + task.gold_response_length() > policy.transformer.max_len + 1) {
            throw ConfigError("max_len too small for gold responses");
        }
    }
}

ProblemSplit split_problems(const ExperimentConfig& config) {
    ProblemSplit split;
    split.train = generate_problems(config.task, config.problems.n_train, config.problems.seed);
    if (config.problems.n_test > 0) {
        split.test = generate_problems(config.task, config.problems.n_test, config.problems.seed,
                                       config.problems.n_train);
    }
    return split;
}

std::unique_ptr<Policy> make_base_policy(const ExperimentConfig& config,
                                         const ProblemSplit& split) {
    Vocabulary vocab = config.task.vocabulary();
    Rng rng = Rng(config.policy.init_seed).derive(RngTag::init);
    if (config.policy.family == "transformer") {
        return std::make_unique<TransformerPolicy>(vocab, config.policy.transformer, rng);
    }
    auto tab = std::make_unique<TabularPolicy>(vocab, config.resolved_tabular_length());
    for (const Problem& p : split.train) tab->register_prompt(p.prompt);
    for (const Problem& p : split.test) tab->register_prompt(p.prompt);
    tab->randomize(rng, config.policy.tabular_init_std);
    return tab;
}

std::unique_ptr<Policy> load_policy_or_base(const std::string& path,
                                            const ExperimentConfig& config,
                                            const ProblemSplit& split) {
    if (path.empty()) {
        return make_base_policy(config, split);
    }
    return load_checkpoint(path);
}

}  // namespace rift::cli
