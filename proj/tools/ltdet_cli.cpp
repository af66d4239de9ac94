// Command-line front end: generate, run, ablate, sweep-lambda, evaluate.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ltdet/errors.hpp"
#include "ltdet/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr const char* kOutDirEnv = "LTDET_OUT_DIR";

struct Options {
    std::string config_path;
    std::string dataset_path;
    std::string out_dir;
    std::string mode;
    std::string seeds;
    std::optional<double> lambda;
    std::string lambdas = "0.5,1,2,3,4,5,6";
    std::string detections_path;
    std::optional<int> jobs;
};

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) {
            continue;
        }
        std::istringstream is(item);
        T v{};
        if (!(is >> v) || !is.eof()) {
            throw ltdet::ConfigError(std::string("invalid ") + what + " entry '" + item + "'");
        }
        out.push_back(v);
    }
    if (out.empty()) {
        throw ltdet::ConfigError(std::string(what) + " list is empty");
    }
    return out;
}

ltdet::ExperimentConfig resolve_config(const Options& o) {
    ltdet::ExperimentConfig cfg =
        o.config_path.empty() ? ltdet::ExperimentConfig{} : ltdet::load_experiment_config(o.config_path);
    if (!o.mode.empty()) {
        cfg.mode = ltdet::experiment_mode_from_string(o.mode);
    }
    if (!o.seeds.empty()) {
        cfg.seeds = parse_list<std::uint64_t>(o.seeds, "seed");
    }
    if (o.lambda) {
        cfg.train.lambda = *o.lambda;
    }
    if (o.jobs) {
        cfg.jobs = *o.jobs;
    }
    cfg.validate();
    return cfg;
}

std::filesystem::path resolve_out(const Options& o) {
    if (!o.out_dir.empty()) {
        return o.out_dir;
    }
    if (const char* env = std::getenv(kOutDirEnv)) {
        return env;
    }
    return "ltdet_out";
}

ltdet::Dataset resolve_dataset(const Options& o, const ltdet::ExperimentConfig& cfg) {
    if (o.dataset_path.empty()) {
        return ltdet::make_dataset(cfg);
    }
    return ltdet::load_dataset(o.dataset_path);
}

void print_summary(const std::vector<ltdet::RunResult>& results) {
    for (const ltdet::RunResult& r : results) {
        std::printf("%-14s seed=%-4llu lambda=%.2f AP=%.4f AP50=%.4f AP75=%.4f head=%.4f tail=%.4f\n",
                    ltdet::to_string(r.mode).c_str(), static_cast<unsigned long long>(r.seed),
                    r.lambda, r.report.ap, r.report.ap50, r.report.ap75, r.report.head_group_ap,
                    r.report.tail_group_ap);
    }
}

}  // namespace

int main(int argc, char** argv) {
    ltdet::configure_allocator();
    CLI::App app{"Long-tail detection head laboratory"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", o.config_path, "Experiment config (JSON)");
        cmd->add_option("--out", o.out_dir, "Output directory (default $LTDET_OUT_DIR or ./ltdet_out)");
        cmd->add_option("--jobs", o.jobs, "Parallel (mode, seed) runs");
    };

    CLI::App* gen = app.add_subcommand("generate", "Generate a synthetic dataset file");
    add_common(gen);
    gen->add_option("--dataset", o.dataset_path, "Output dataset path (default <out>/dataset.jsonl)");

    CLI::App* run = app.add_subcommand("run", "Train and evaluate one mode over the seeds");
    CLI::App* ablate = app.add_subcommand("ablate", "Run the ablation mode table");
    CLI::App* sweep = app.add_subcommand("sweep-lambda", "Sweep the tail-loss weight");
    CLI::App* eval = app.add_subcommand("evaluate", "Re-score an existing detection file");
    for (CLI::App* cmd : {run, ablate, sweep, eval}) {
        add_common(cmd);
        cmd->add_option("--dataset", o.dataset_path, "Dataset file (default: generate from config)");
    }
    for (CLI::App* cmd : {run, ablate, sweep}) {
        cmd->add_option("--seeds", o.seeds, "Comma-separated seed list");
        cmd->add_option("--lambda", o.lambda, "Tail-head loss weight");
    }
    run->add_option("--mode", o.mode, "Mode name, e.g. rs, cbs+bbh, mmf");
    sweep->add_option("--lambdas", o.lambdas, "Comma-separated lambda values");
    eval->add_option("--detections", o.detections_path, "Detection file to score")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        const ltdet::ExperimentConfig cfg = resolve_config(o);
        const std::filesystem::path out = resolve_out(o);
        if (*gen) {
            const std::filesystem::path path =
                o.dataset_path.empty() ? out / "dataset.jsonl" : std::filesystem::path(o.dataset_path);
            ltdet::cmd_generate(cfg, path);
            std::cout << "wrote " << path.string() << "\n";
        } else if (*run) {
            print_summary(ltdet::cmd_run(cfg, resolve_dataset(o, cfg), out));
        } else if (*ablate) {
            print_summary(ltdet::cmd_ablate(cfg, resolve_dataset(o, cfg), out));
        } else if (*sweep) {
            const auto lambdas = parse_list<double>(o.lambdas, "lambda");
            print_summary(ltdet::cmd_sweep_lambda(cfg, resolve_dataset(o, cfg), lambdas, out));
        } else if (*eval) {
            const ltdet::EvalReport r =
                ltdet::cmd_evaluate(cfg, resolve_dataset(o, cfg), o.detections_path, out);
            std::printf("AP=%.4f AP50=%.4f AP75=%.4f head=%.4f tail=%.4f\n", r.ap, r.ap50, r.ap75,
                        r.head_group_ap, r.tail_group_ap);
        }
    } catch (const ltdet::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ltdet::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    return 0;
}
