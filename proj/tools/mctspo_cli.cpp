// Command-line front end: train, replay, compare.
//
// Log verbosity comes from MCTSPO_LOG_LEVEL (trace, debug, info, warn, error, off).

#include "mctspo/errors.hpp"
#include "mctspo/harness.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <spdlog/spdlog.h>

namespace {

using namespace mctspo;

void configure_logging()
{
    spdlog::set_level(spdlog::level::info);
    if (const char* level = std::getenv("MCTSPO_LOG_LEVEL")) {
        spdlog::set_level(spdlog::level::from_str(level));
    }
    spdlog::set_pattern("[%l] %v");
}

struct TrainOptions {
    std::string config;
    std::string preset;
    std::string algo;
    std::string env;
    std::vector<std::uint64_t> seeds;
    std::uint64_t budget = 0;
    std::string out;
    unsigned threads = 0;
    bool wall_clock = false;
};

ExperimentConfig base_config(const std::string& path, const std::string& preset)
{
    if (!path.empty()) {
        return load_config(path);
    }
    return preset == "desk" ? ExperimentConfig::desk() : ExperimentConfig::paper();
}

int run_train(const TrainOptions& o)
{
    ExperimentConfig c = base_config(o.config, o.preset);
    if (!o.algo.empty()) {
        c.algorithm = algorithm_from_name(o.algo);
    }
    if (!o.env.empty()) {
        c.env = EnvSpec::defaults_for(env_kind_from_name(o.env));
    }
    if (!o.seeds.empty()) {
        c.seeds = o.seeds;
    }
    if (o.budget != 0) {
        c.budget = o.budget;
    }
    if (!o.out.empty()) {
        c.output_dir = o.out;
    }
    if (o.threads != 0) {
        c.threads = o.threads;
    }
    c.record_wall_time = c.record_wall_time || o.wall_clock;
    c.validate();

    const ExperimentSummary s = run_experiment(c);
    std::cout << summary_to_json(s).dump(2) << '\n';
    return s.completed == s.trials.size() ? 0 : 3;
}

int run_replay(const std::string& genome, const std::string& env)
{
    const ReplayResult r = replay(std::filesystem::path(genome), EnvSpec::defaults_for(env_kind_from_name(env)));
    nlohmann::json out = {{"return", r.total_return}, {"reached_goal", r.reached_goal}, {"steps", r.steps}};
    std::cout << out.dump() << '\n';
    return 0;
}

int run_compare(const std::string& path_a, const std::string& path_b, const std::string& out)
{
    ExperimentConfig a = load_config(path_a);
    ExperimentConfig b = load_config(path_b);
    validate_comparable(a, b);
    if (!out.empty()) {
        a.output_dir = std::filesystem::path(out) / "a";
        b.output_dir = std::filesystem::path(out) / "b";
    }
    const auto rows = compare(a, b);
    std::cout << comparison_text(rows);
    if (!out.empty()) {
        std::ofstream csv(std::filesystem::path(out) / "comparison.csv");
        csv << comparison_csv(rows);
        if (!csv) {
            throw std::runtime_error("failed writing comparison.csv");
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    configure_logging();

    CLI::App app{"Monte-Carlo tree search for policy optimization, with a Deep GA baseline"};
    app.require_subcommand(1);

    TrainOptions train;
    auto* train_cmd = app.add_subcommand("train", "Run one trial per seed and write curves, genomes and a summary");
    train_cmd->add_option("--config", train.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
    train_cmd->add_option("--preset", train.preset, "Defaults when no config is given")
        ->check(CLI::IsMember({"paper", "desk"}));
    train_cmd->add_option("--algo", train.algo, "Algorithm")->check(CLI::IsMember({"mctspo", "deepga"}));
    train_cmd->add_option("--env", train.env, "Task environment")
        ->check(CLI::IsMember({"sparse-mountain-car", "sparse-acrobot"}));
    train_cmd->add_option("--seed", train.seeds, "Trial seed (repeatable)");
    train_cmd->add_option("--budget", train.budget, "Environment calls per trial");
    train_cmd->add_option("--out", train.out, "Output directory");
    train_cmd->add_option("--threads", train.threads, "Concurrent trials (0 = all cores)");
    train_cmd->add_flag("--wall-clock", train.wall_clock, "Record wall-clock milliseconds in the curves");

    std::string genome;
    std::string replay_env = "sparse-mountain-car";
    auto* replay_cmd = app.add_subcommand("replay", "Rebuild a policy from its genome file and roll it out");
    replay_cmd->add_option("--genome", genome, "Genome file (JSON)")->required();
    replay_cmd->add_option("--env", replay_env, "Task environment")
        ->check(CLI::IsMember({"sparse-mountain-car", "sparse-acrobot"}));

    std::string config_a;
    std::string config_b;
    std::string compare_out;
    auto* compare_cmd = app.add_subcommand("compare", "Run two configs and tabulate mean best return");
    compare_cmd->add_option("--config-a", config_a, "First experiment config")->required()->check(CLI::ExistingFile);
    compare_cmd->add_option("--config-b", config_b, "Second experiment config")->required()->check(CLI::ExistingFile);
    compare_cmd->add_option("--out", compare_out, "Directory for both runs and comparison.csv");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train_cmd) {
            return run_train(train);
        }
        if (*replay_cmd) {
            return run_replay(genome, replay_env);
        }
        if (*compare_cmd) {
            return run_compare(config_a, config_b, compare_out);
        }
    } catch (const ConfigError& e) {
        spdlog::error("{}", e.what());
        return 2;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}
