#pragma once

#include "mctspo/deepga.hpp"
#include "mctspo/env.hpp"
#include "mctspo/genome.hpp"
#include "mctspo/run_result.hpp"
#include "mctspo/search.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace mctspo {

enum class Algorithm {
    mctspo,
    deepga,
};

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

struct ExperimentConfig {
    EnvSpec env = EnvSpec::sparse_mountain_car();
    Algorithm algorithm = Algorithm::mctspo;
    SearchConfig search;
    GAConfig ga;
    std::vector<std::size_t> hidden_dims{128, 64, 32};
    std::uint64_t budget = 5'000'000;
    std::vector<std::uint64_t> seeds{1};
    std::filesystem::path output_dir = "runs";
    /// Concurrent trials; 0 uses the hardware concurrency.
    unsigned threads = 0;
    /// Wall-clock milliseconds in the curve CSV. Off by default because it
    /// makes the curves differ between runs.
    bool record_wall_time = false;
    /// Row label in comparison tables; defaults to the algorithm name.
    std::string label;

    /// The published classic-control settings.
    static ExperimentConfig paper();
    /// 32/32 network, 5e5 environment calls, seeds 1..10.
    static ExperimentConfig desk();

    NetworkShape network_shape() const;
    std::string display_label() const;
    /// Throws ConfigError describing the first invalid field.
    void validate() const;
};

/// Fields missing from the document keep the values of the named "preset"
/// ("paper" when absent).
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

/// One trial without touching the filesystem.
RunResult run_trial(const ExperimentConfig& config, std::uint64_t seed);

struct TrialResult {
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double best_return = 0.0;
    bool reached_goal = false;
    std::filesystem::path genome_path;
    std::filesystem::path curve_path;
    double wall_ms = 0.0;
    std::uint64_t env_calls = 0;
    std::optional<std::uint64_t> first_goal_env_calls;
};

struct ExperimentSummary {
    std::string label;
    Algorithm algorithm = Algorithm::mctspo;
    std::vector<TrialResult> trials;
    std::size_t completed = 0;
    double mean_best_return = 0.0;
    /// Sample standard deviation over sqrt(completed trials).
    double standard_error = 0.0;
    std::size_t goal_trials = 0;
    std::optional<double> mean_calls_to_goal;
};

/// Sample mean and standard error of the mean.
std::pair<double, double> mean_and_standard_error(const std::vector<double>& xs);

/// Runs one trial per seed, concurrently, and writes for each seed
/// curve_seed<N>.csv and genome_seed<N>.json, then summary.json. An
/// unwritable output directory fails before any trial starts.
ExperimentSummary run_experiment(const ExperimentConfig& config);

nlohmann::json summary_to_json(const ExperimentSummary& summary);

std::string curve_to_csv(const std::vector<CurvePoint>& curve);
void write_curve_csv(const std::vector<CurvePoint>& curve, const std::filesystem::path& path);

struct ReplayResult {
    double total_return = 0.0;
    bool reached_goal = false;
    std::size_t steps = 0;
};

/// materialize + rollout. Throws ConfigError if the genome does not fit the task.
ReplayResult replay(const Genome& genome, const EnvSpec& env);
ReplayResult replay(const std::filesystem::path& genome_path, const EnvSpec& env);

struct ComparisonRow {
    std::string label;
    std::string algorithm;
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t trials = 0;
    std::size_t goal_trials = 0;
    std::optional<double> mean_calls_to_goal;
};

/// Both configs must share the environment and the budget.
void validate_comparable(const ExperimentConfig& a, const ExperimentConfig& b);
ComparisonRow comparison_row(const ExperimentSummary& summary);
std::vector<ComparisonRow> compare(const ExperimentConfig& a, const ExperimentConfig& b);

std::string comparison_csv(const std::vector<ComparisonRow>& rows);
std::string comparison_text(const std::vector<ComparisonRow>& rows);

/// Shortest decimal string that reads back to the same double.
std::string format_double(double x);

} // namespace mctspo
