#include "riftlab/dispatch.hpp"

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "rift/errors.hpp"
#include "riftlab/workflows.hpp"

namespace rift::cli {

namespace {

std::string default_output_root() {
    const char* env = std::getenv("RIFTLAB_OUT");
    return env != nullptr && *env != '\0' ? env : "runs";
}

/// Load the config file (when given) and fold flag overrides on top.
struct ConfigCli {
    std::string config_path;
    std::string out_dir;

    // Optional overrides; CLI11 tracks presence via ->count().
    std::uint64_t seed = 0;
    int k = 0;
    double temperature = 0.0;
    double lr = 0.0;
    std::size_t epochs = 0;
    std::size_t batch_size = 0;
    std::string loss;
    std::string buffer_path;
    std::string init_checkpoint;
    std::string generator_checkpoint;

    CLI::Option* seed_opt = nullptr;
    CLI::Option* k_opt = nullptr;
    CLI::Option* temp_opt = nullptr;
    CLI::Option* lr_opt = nullptr;
    CLI::Option* epochs_opt = nullptr;
    CLI::Option* batch_opt = nullptr;

    void attach_common(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config JSON");
        cmd->add_option("--out", out_dir, "output directory (overrides config)");
    }

    void attach_buffer_flags(CLI::App* cmd) {
        seed_opt = cmd->add_option("--seed", seed, "buffer sampling seed");
        k_opt = cmd->add_option("--k", k, "rollouts per problem");
        temp_opt = cmd->add_option("--temperature", temperature, "sampling temperature");
        cmd->add_option("--generator", generator_checkpoint, "generator checkpoint");
    }

    void attach_train_flags(CLI::App* cmd) {
        cmd->add_option("--loss", loss, "sft|dft|rft|naive_signed|rift");
        cmd->add_option("--buffer", buffer_path, "buffer JSONL path");
        cmd->add_option("--init", init_checkpoint, "initial policy checkpoint");
        seed_opt = cmd->add_option("--seed", seed, "training seed");
        lr_opt = cmd->add_option("--lr", lr, "peak learning rate");
        epochs_opt = cmd->add_option("--epochs", epochs, "training epochs");
        batch_opt = cmd->add_option("--batch-size", batch_size, "batch size");
    }

    ExperimentConfig resolve(const std::string& subcommand) const {
        ExperimentConfig cfg;
        if (!config_path.empty()) {
            cfg = ExperimentConfig::load(config_path);
        }
        if (!out_dir.empty()) {
            cfg.output_dir = out_dir;
        } else if (cfg.output_dir.empty()) {
            cfg.output_dir = default_output_root() + "/" + subcommand;
        }
        if (seed_opt && seed_opt->count() > 0) {
            cfg.buffer.seed = seed;
            cfg.train.seed = seed;
        }
        if (k_opt && k_opt->count() > 0) cfg.buffer.k = k;
        if (temp_opt && temp_opt->count() > 0) cfg.buffer.temperature = temperature;
        if (lr_opt && lr_opt->count() > 0) cfg.train.lr_peak = lr;
        if (epochs_opt && epochs_opt->count() > 0) cfg.train.epochs = epochs;
        if (batch_opt && batch_opt->count() > 0) cfg.train.batch_size = batch_size;
        if (!loss.empty()) cfg.train.loss = loss_kind_from_name(loss);
        if (!buffer_path.empty()) cfg.buffer.path = buffer_path;
        if (!init_checkpoint.empty()) cfg.init_checkpoint = init_checkpoint;
        if (!generator_checkpoint.empty()) cfg.buffer.generator_checkpoint = generator_checkpoint;
        cfg.validate();
        return cfg;
    }
};

std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
    std::vector<std::uint64_t> out;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        std::size_t comma = csv.find(',', pos);
        if (comma == std::string::npos) comma = csv.size();
        out.push_back(std::stoull(csv.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return out;
}

std::vector<std::string> parse_name_list(const std::string& csv) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        std::size_t comma = csv.find(',', pos);
        if (comma == std::string::npos) comma = csv.size();
        out.push_back(csv.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    for (std::uint64_t v : parse_seed_list(csv)) out.push_back(static_cast<int>(v));
    return out;
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"riftlab: reward-informed fine-tuning laboratory"};
    app.require_subcommand(1);

    ConfigCli gen_cli;
    CLI::App* gen = app.add_subcommand("gen-buffer", "sample a rewarded rollout buffer");
    gen_cli.attach_common(gen);
    gen_cli.attach_buffer_flags(gen);

    ConfigCli train_cli;
    CLI::App* tr = app.add_subcommand("train", "train a policy");
    train_cli.attach_common(tr);
    train_cli.attach_train_flags(tr);

    ConfigCli eval_cli;
    std::string eval_checkpoint;
    CLI::App* ev = app.add_subcommand("eval", "evaluate a policy on the held-out split");
    eval_cli.attach_common(ev);
    ev->add_option("--checkpoint", eval_checkpoint, "policy checkpoint (default: fresh base)");

    ConfigCli cmp_cli;
    std::string methods_csv = "sft,dft,rft,rift";
    std::string seeds_csv = "0,1,2";
    CLI::App* cmp = app.add_subcommand("compare", "train and evaluate several methods");
    cmp_cli.attach_common(cmp);
    cmp->add_option("--methods", methods_csv, "comma list of methods");
    cmp->add_option("--seeds", seeds_csv, "comma list of seeds");

    ConfigCli abl_cli;
    std::string ks_csv = "2,4,8,16";
    bool no_eval = false;
    CLI::App* abl = app.add_subcommand("ablate-k", "buffer statistics and eval across K");
    abl_cli.attach_common(abl);
    abl->add_option("--k", ks_csv, "comma list of K values");
    abl->add_flag("--stats-only", no_eval, "skip the per-K train+eval cycle");

    ConfigCli col_cli;
    std::size_t naive_steps = 500;
    std::size_t rift_steps = 10000;
    CLI::App* col = app.add_subcommand("collapse-demo",
                                       "twin naive/rift runs on an adversarial buffer");
    col_cli.attach_common(col);
    col->add_option("--naive-steps", naive_steps, "steps for the naive run");
    col->add_option("--rift-steps", rift_steps, "steps for the rift run");

    std::vector<std::string> metrics_files;
    std::string plot_out;
    CLI::App* plot = app.add_subcommand("plot", "render SVG curves from metrics JSONL");
    plot->add_option("--metrics", metrics_files, "metrics files")->required();
    plot->add_option("--out", plot_out, "output directory");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            // --help
            std::cout << app.help() << std::flush;
            return 0;
        }
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (gen->parsed()) {
            run_gen_buffer(gen_cli.resolve("gen-buffer"));
        } else if (tr->parsed()) {
            run_train(train_cli.resolve("train"));
        } else if (ev->parsed()) {
            run_eval(eval_cli.resolve("eval"), eval_checkpoint);
        } else if (cmp->parsed()) {
            run_compare(cmp_cli.resolve("compare"), parse_name_list(methods_csv),
                        parse_seed_list(seeds_csv));
        } else if (abl->parsed()) {
            run_ablate_k(abl_cli.resolve("ablate-k"), parse_int_list(ks_csv), !no_eval);
        } else if (col->parsed()) {
            run_collapse_demo(col_cli.resolve("collapse-demo"), naive_steps, rift_steps);
        } else if (plot->parsed()) {
            std::string out = plot_out.empty() ? default_output_root() + "/plot" : plot_out;
            run_plot(metrics_files, out);
        }
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

int dispatch(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return dispatch(args);
}

}  // namespace rift::cli
