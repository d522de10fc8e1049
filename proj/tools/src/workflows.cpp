#include "riftlab/workflows.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "rift/checkpoint.hpp"
#include "rift/errors.hpp"
#include "riftlab/svg_plot.hpp"

namespace rift::cli {

namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write file: " + path.string());
    }
    out << content;
}

fs::path prepare_output_dir(const ExperimentConfig& config) {
    if (config.output_dir.empty()) {
        throw ConfigError("output_dir is not set");
    }
    fs::path dir(config.output_dir);
    fs::create_directories(dir);
    return dir;
}

/// Snapshot first: a run directory always carries the exact resolved config
/// that produced it.
fs::path snapshot(const ExperimentConfig& config) {
    fs::path dir = prepare_output_dir(config);
    write_text(dir / "config.json", config.to_json().dump(2) + "\n");
    return dir;
}

void write_metrics_files(const fs::path& dir, const std::vector<MetricsRecord>& metrics,
                         const std::string& stem = "metrics") {
    std::ostringstream main_out;
    std::ostringstream timing_out;
    for (const MetricsRecord& m : metrics) {
        main_out << m.to_json().dump() << '\n';
        timing_out << nlohmann::json{{"step", m.step}, {"wall_ms", m.wall_ms}}.dump() << '\n';
    }
    write_text(dir / (stem + ".jsonl"), main_out.str());
    write_text(dir / ("timings_" + stem + ".jsonl"), timing_out.str());
}

bool needs_buffer(LossKind kind) {
    return kind == LossKind::rft || kind == LossKind::naive_signed || kind == LossKind::rift;
}

Buffer strategy_adjusted(const Buffer& raw, const RewardStrategy& strategy) {
    if (raw.meta.filtered) {
        return raw;
    }
    return apply_strategy(raw, strategy);
}

std::vector<MetricsRecord> train_into(Policy& policy,
                                      std::vector<TrainSample> data,
                                      const TrainConfig& tc,
                                      const fs::path& dir) {
    TrainCallbacks callbacks;
    callbacks.on_checkpoint = [&dir, &tc](const Policy& p, std::size_t step) {
        if (tc.checkpoint_every > 0 && step % tc.checkpoint_every == 0) {
            save_checkpoint(p, dir / ("checkpoint_step_" + std::to_string(step) + ".json"));
        }
    };
    auto metrics = train(policy, std::move(data), tc, callbacks);
    save_checkpoint(policy, dir / "checkpoint.json");
    return metrics;
}

std::string format_ratio(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

/// Rotating every content letter by the same offset yields negatives that
/// differ from gold at every position, the regime where suppressing them
/// drives the log term without bound.
Buffer adversarial_mixed_buffer(const std::vector<Problem>& problems,
                                const TaskSpec& spec,
                                const Policy& generator,
                                int negatives_per_problem,
                                double r_pos,
                                double r_neg) {
    Buffer buffer;
    buffer.meta.k = negatives_per_problem + 1;
    buffer.meta.temperature = 0.0;
    buffer.meta.generator_id = "adversarial";
    buffer.meta.seed = 0;
    for (const Problem& p : problems) {
        BufferGroup group;
        group.problem_id = p.id;
        RewardedSample gold;
        gold.problem_id = p.id;
        gold.response = p.gold_solution;
        gold.correct = true;
        gold.reward = r_pos;
        gold.generator_logprob = generator.log_prob(p.prompt, gold.response).total;
        group.samples.push_back(std::move(gold));
        for (int k = 1; k <= negatives_per_problem; ++k) {
            RewardedSample neg;
            neg.problem_id = p.id;
            neg.response = p.gold_solution;
            for (std::size_t i = 0; i + 1 < neg.response.size(); ++i) {
                TokenId letter = neg.response[i] - 5;  // content tokens start at id 5
                neg.response[i] = 5 + ((letter + k) % spec.alphabet);
            }
            neg.correct = verify_response(p, neg.response);
            neg.reward = neg.correct ? r_pos : r_neg;
            neg.generator_logprob = generator.log_prob(p.prompt, neg.response).total;
            group.samples.push_back(std::move(neg));
        }
        buffer.groups.push_back(std::move(group));
    }
    return buffer;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, RngTag tag, std::uint64_t salt) {
    return Rng(master).derive(tag, salt).next_u64();
}

void run_gen_buffer(const ExperimentConfig& config) {
    ProblemSplit split = split_problems(config);
    auto generator = load_policy_or_base(config.buffer.generator_checkpoint, config, split);

    fs::path dir = snapshot(config);
    Buffer buffer = build_buffer(*generator, split.train, config.buffer.k,
                                 config.buffer.temperature, config.buffer.r_pos,
                                 config.buffer.r_neg, config.buffer.seed,
                                 config.resolved_max_new_tokens(),
                                 config.buffer.generator_checkpoint.empty()
                                     ? "base:" + generator->family()
                                     : config.buffer.generator_checkpoint);
    buffer.meta.reward_strategy = config.reward.id();

    write_text(dir / "problems.jsonl", problems_to_jsonl(split.train, config.task.vocabulary()));
    write_text(dir / "buffer.jsonl", buffer_to_jsonl(buffer));
    write_text(dir / "buffer_stats.csv",
               stats_to_csv(buffer_stats(buffer), buffer.meta.generator_id));
}

void run_train(const ExperimentConfig& config) {
    ProblemSplit split = split_problems(config);
    std::vector<TrainSample> data;
    if (needs_buffer(config.train.loss)) {
        if (config.buffer.path.empty()) {
            throw ConfigError("loss '" + loss_kind_name(config.train.loss) +
                              "' requires buffer.path");
        }
        Buffer raw = load_buffer(config.buffer.path);
        Buffer adjusted = strategy_adjusted(raw, config.reward);
        data = train_data_from_buffer(adjusted, split.train);
    } else {
        data = train_data_from_gold(split.train);
    }
    auto policy = load_policy_or_base(config.init_checkpoint, config, split);

    fs::path dir = snapshot(config);
    auto metrics = train_into(*policy, std::move(data), config.train, dir);
    write_metrics_files(dir, metrics);
}

EvalReport run_eval(const ExperimentConfig& config, const std::string& checkpoint) {
    ProblemSplit split = split_problems(config);
    if (split.test.empty()) {
        throw ConfigError("eval requires problems.n_test >= 1");
    }
    auto policy = load_policy_or_base(checkpoint, config, split);

    fs::path dir = snapshot(config);
    EvalReport report = evaluate(*policy, split.test, config.eval.k, config.eval.temperature,
                                 config.eval.seed, config.resolved_max_new_tokens(),
                                 config.eval.pass_threshold);
    write_text(dir / "report.json", report.to_json().dump(2) + "\n");
    write_text(dir / "report.csv", report.to_csv(task_kind_name(config.task.kind)));
    return report;
}

const CompareCell* CompareOutcome::find(const std::string& method, std::uint64_t seed) const {
    for (const CompareCell& c : cells) {
        if (c.method == method && c.seed == seed) return &c;
    }
    return nullptr;
}

CompareOutcome run_compare(const ExperimentConfig& config,
                           const std::vector<std::string>& methods,
                           const std::vector<std::uint64_t>& seeds) {
    if (methods.empty() || seeds.empty()) {
        throw ConfigError("compare requires at least one method and one seed");
    }
    std::map<std::string, std::uint64_t> method_salt{
        {"sft", 1}, {"dft", 2}, {"rft", 3}, {"naive_signed", 4}, {"rift", 5}};
    for (const std::string& m : methods) {
        if (!method_salt.contains(m)) {
            throw ConfigError("unknown compare method: " + m);
        }
    }

    ProblemSplit split = split_problems(config);
    fs::path dir = snapshot(config);

    CompareOutcome outcome;
    for (std::uint64_t seed : seeds) {
        ExperimentConfig seed_cfg = config;
        seed_cfg.policy.init_seed = derive_seed(seed, RngTag::init);
        seed_cfg.buffer.seed = derive_seed(seed, RngTag::buffer);

        fs::path seed_dir = dir / ("seed" + std::to_string(seed));
        fs::create_directories(seed_dir);

        auto base = make_base_policy(seed_cfg, split);
        Buffer raw = build_buffer(*base, split.train, seed_cfg.buffer.k,
                                  seed_cfg.buffer.temperature, seed_cfg.buffer.r_pos,
                                  seed_cfg.buffer.r_neg, seed_cfg.buffer.seed,
                                  seed_cfg.resolved_max_new_tokens(), "base:" + base->family());
        raw.meta.reward_strategy = config.reward.id();
        write_text(seed_dir / "buffer.jsonl", buffer_to_jsonl(raw));
        write_text(seed_dir / "buffer_stats.csv",
                   stats_to_csv(buffer_stats(raw), "seed" + std::to_string(seed)));

        EvalReport base_report =
            evaluate(*base, split.test, config.eval.k, config.eval.temperature, config.eval.seed,
                     config.resolved_max_new_tokens(), config.eval.pass_threshold);
        outcome.cells.push_back({"base", seed, base_report.mean_at_k, base_report.pass_at_k});

        for (const std::string& method : methods) {
            fs::path method_dir = seed_dir / method;
            fs::create_directories(method_dir);

            TrainConfig tc = config.train;
            tc.loss = loss_kind_from_name(method);
            tc.seed = derive_seed(seed, RngTag::train, method_salt.at(method));

            std::vector<TrainSample> data;
            if (needs_buffer(tc.loss)) {
                data = train_data_from_buffer(strategy_adjusted(raw, config.reward), split.train);
            } else {
                data = train_data_from_gold(split.train);
            }

            auto policy = base->clone();
            auto metrics = train_into(*policy, std::move(data), tc, method_dir);
            write_metrics_files(method_dir, metrics);

            EvalReport report =
                evaluate(*policy, split.test, config.eval.k, config.eval.temperature,
                         config.eval.seed, config.resolved_max_new_tokens(),
                         config.eval.pass_threshold);
            write_text(method_dir / "report.json", report.to_json().dump(2) + "\n");
            outcome.cells.push_back({method, seed, report.mean_at_k, report.pass_at_k});
        }
    }

    std::ostringstream csv;
    csv << "method,seed,mean_at_" << config.eval.k << ",pass_at_" << config.eval.k << "\n";
    for (const CompareCell& c : outcome.cells) {
        csv << c.method << ',' << c.seed << ',' << format_ratio(c.mean_at_k) << ','
            << format_ratio(c.pass_at_k) << '\n';
    }
    write_text(dir / "compare.csv", csv.str());

    std::ostringstream summary;
    summary << "method,mean_at_" << config.eval.k << "_avg,pass_at_" << config.eval.k << "_avg\n";
    std::vector<std::string> rows{"base"};
    rows.insert(rows.end(), methods.begin(), methods.end());
    for (const std::string& method : rows) {
        double mean = 0.0;
        double pass = 0.0;
        for (std::uint64_t seed : seeds) {
            const CompareCell* c = outcome.find(method, seed);
            mean += c->mean_at_k;
            pass += c->pass_at_k;
        }
        mean /= static_cast<double>(seeds.size());
        pass /= static_cast<double>(seeds.size());
        summary << method << ',' << format_ratio(mean) << ',' << format_ratio(pass) << '\n';
    }
    write_text(dir / "compare_summary.csv", summary.str());
    return outcome;
}

std::vector<AblateRow> run_ablate_k(const ExperimentConfig& config,
                                    const std::vector<int>& ks,
                                    bool with_eval) {
    if (ks.empty()) {
        throw ConfigError("ablate-k requires at least one K");
    }
    ProblemSplit split = split_problems(config);
    fs::path dir = snapshot(config);
    auto base = make_base_policy(config, split);

    std::vector<AblateRow> rows;
    for (int k : ks) {
        AblateRow row;
        row.k = k;
        Buffer raw = build_buffer(*base, split.train, k, config.buffer.temperature,
                                  config.buffer.r_pos, config.buffer.r_neg, config.buffer.seed,
                                  config.resolved_max_new_tokens(), "base:" + base->family());
        raw.meta.reward_strategy = config.reward.id();
        row.stats = buffer_stats(raw);

        fs::path k_dir = dir / ("k" + std::to_string(k));
        fs::create_directories(k_dir);
        write_text(k_dir / "buffer.jsonl", buffer_to_jsonl(raw));

        if (with_eval) {
            TrainConfig tc = config.train;
            tc.loss = LossKind::rift;
            auto policy = base->clone();
            auto data = train_data_from_buffer(strategy_adjusted(raw, config.reward), split.train);
            auto metrics = train_into(*policy, std::move(data), tc, k_dir);
            write_metrics_files(k_dir, metrics);
            EvalReport report =
                evaluate(*policy, split.test, config.eval.k, config.eval.temperature,
                         config.eval.seed, config.resolved_max_new_tokens(),
                         config.eval.pass_threshold);
            row.mean_at_k = report.mean_at_k;
            row.pass_at_k = report.pass_at_k;
        }
        rows.push_back(row);
    }

    std::ostringstream csv;
    csv << "k,n_problems,n_total,n_pos,n_neg,pos_ratio,n_mixed,mixed_ratio";
    if (with_eval) {
        csv << ",mean_at_" << config.eval.k << ",pass_at_" << config.eval.k;
    }
    csv << "\n";
    for (const AblateRow& r : rows) {
        csv << r.k << ',' << r.stats.n_problems << ',' << r.stats.n_total << ',' << r.stats.n_pos
            << ',' << r.stats.n_neg << ',' << format_ratio(r.stats.pos_ratio) << ','
            << r.stats.n_mixed << ',' << format_ratio(r.stats.mixed_ratio);
        if (with_eval) {
            csv << ',' << format_ratio(r.mean_at_k) << ',' << format_ratio(r.pass_at_k);
        }
        csv << '\n';
    }
    write_text(dir / "ablate.csv", csv.str());
    return rows;
}

CollapseOutcome run_collapse_demo(const ExperimentConfig& config,
                                  std::size_t naive_steps,
                                  std::size_t rift_steps) {
    // Self-contained adversarial protocol: a copy task long enough that the
    // log term dominates, one gold and seven fully-rotated negatives per
    // problem, full-batch steps, no decay, no clipping.
    ExperimentConfig demo = config;
    demo.task.kind = TaskKind::copy_sequence;
    demo.task.alphabet = 8;
    demo.task.length = 15;
    demo.task.vocab_padding = 0;
    demo.problems.n_train = 4;
    demo.problems.n_test = 0;
    demo.policy.family = "tabular";
    demo.policy.tabular_response_length = 0;
    demo.buffer.k = 8;
    demo.train.loss = LossKind::naive_signed;
    demo.train.lr_peak = 1e-2;
    demo.train.warmup_frac = 0.0;
    demo.train.weight_decay = 0.0;
    demo.train.grad_clip.reset();
    demo.train.batch_size = demo.problems.n_train * static_cast<std::size_t>(demo.buffer.k);
    demo.train.epochs = naive_steps;  // full-batch: one step per epoch

    ProblemSplit split = split_problems(demo);
    fs::path dir = snapshot(demo);

    auto init = make_base_policy(demo, split);
    Buffer buffer = adversarial_mixed_buffer(split.train, demo.task, *init, demo.buffer.k - 1,
                                             demo.buffer.r_pos, demo.buffer.r_neg);
    write_text(dir / "buffer.jsonl", buffer_to_jsonl(buffer));
    auto data = train_data_from_buffer(buffer, split.train);

    CollapseOutcome outcome;
    {
        auto policy = init->clone();
        TrainConfig tc = demo.train;
        outcome.naive = train(*policy, data, tc);
        write_metrics_files(dir, outcome.naive, "metrics_naive");
    }
    {
        auto policy = init->clone();
        TrainConfig tc = demo.train;
        tc.loss = LossKind::rift;
        tc.epochs = rift_steps;
        outcome.rift = train(*policy, data, tc);
        write_metrics_files(dir, outcome.rift, "metrics_rift");
    }

    auto curve = [](const std::vector<MetricsRecord>& records, auto get) {
        Series s;
        for (const MetricsRecord& m : records) {
            s.x.push_back(static_cast<double>(m.step));
            s.y.push_back(get(m));
        }
        return s;
    };
    auto loss_of = [](const MetricsRecord& m) { return m.loss; };
    auto grad_of = [](const MetricsRecord& m) { return m.max_neg_sample_grad; };

    Series naive_loss = curve(outcome.naive, loss_of);
    naive_loss.label = "naive_signed";
    Series rift_loss = curve(outcome.rift, loss_of);
    rift_loss.label = "rift";
    PlotOptions loss_opts;
    loss_opts.title = "Training loss: naive signed weighting vs linear negative term";
    loss_opts.x_label = "step";
    loss_opts.y_label = "loss";
    write_text(dir / "collapse_loss.svg", render_line_plot({naive_loss, rift_loss}, loss_opts));

    Series naive_grad = curve(outcome.naive, grad_of);
    naive_grad.label = "naive_signed";
    Series rift_grad = curve(outcome.rift, grad_of);
    rift_grad.label = "rift";
    PlotOptions grad_opts;
    grad_opts.title = "Max |dL/dpi| over negative samples";
    grad_opts.x_label = "step";
    grad_opts.y_label = "log10 |dL/dpi|";
    grad_opts.log_y = true;
    write_text(dir / "collapse_grad.svg", render_line_plot({naive_grad, rift_grad}, grad_opts));

    return outcome;
}

void run_plot(const std::vector<std::string>& metrics_files, const fs::path& out_dir) {
    if (metrics_files.empty()) {
        throw ConfigError("plot requires at least one metrics file");
    }
    fs::create_directories(out_dir);
    struct Metric {
        const char* key;
        const char* file;
        bool log_y;
    };
    const Metric metrics[] = {
        {"loss", "plot_loss.svg", false},
        {"lr", "plot_lr.svg", false},
        {"grad_norm", "plot_grad_norm.svg", false},
        {"max_neg_sample_grad", "plot_max_neg_sample_grad.svg", true},
    };
    for (const Metric& metric : metrics) {
        std::vector<Series> series;
        for (const std::string& file : metrics_files) {
            std::ifstream in(file);
            if (!in) {
                throw InputError("cannot open metrics file: " + file);
            }
            Series s;
            s.label = fs::path(file).stem().string();
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                nlohmann::json j = nlohmann::json::parse(line);
                s.x.push_back(j.at("step").get<double>());
                s.y.push_back(j.at(metric.key).get<double>());
            }
            if (s.x.empty()) {
                throw InputError("metrics file has no records: " + file);
            }
            series.push_back(std::move(s));
        }
        PlotOptions opts;
        opts.title = metric.key;
        opts.x_label = "step";
        opts.y_label = metric.log_y ? std::string("log10 ") + metric.key : metric.key;
        opts.log_y = metric.log_y;
        write_text(out_dir / metric.file, render_line_plot(series, opts));
    }
}

}  // namespace rift::cli
