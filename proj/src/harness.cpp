#include "mctspo/harness.hpp"

#include "mctspo/errors.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <spdlog/spdlog.h>
#include <sstream>
#include <thread>

namespace mctspo {

namespace fs = std::filesystem;
using nlohmann::json;

std::string algorithm_name(Algorithm a)
{
    return a == Algorithm::mctspo ? "mctspo" : "deepga";
}

Algorithm algorithm_from_name(const std::string& name)
{
    if (name == "mctspo") {
        return Algorithm::mctspo;
    }
    if (name == "deepga") {
        return Algorithm::deepga;
    }
    throw ConfigError("unknown algorithm '" + name + "' (expected mctspo or deepga)");
}

ExperimentConfig ExperimentConfig::paper()
{
    return ExperimentConfig{};
}

ExperimentConfig ExperimentConfig::desk()
{
    ExperimentConfig c;
    c.hidden_dims = {32, 32};
    c.budget = 500'000;
    c.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    return c;
}

NetworkShape ExperimentConfig::network_shape() const
{
    return policy_shape_for(*make_dynamics(env), hidden_dims);
}

std::string ExperimentConfig::display_label() const
{
    return label.empty() ? algorithm_name(algorithm) : label;
}

void ExperimentConfig::validate() const
{
    try {
        env.validate();
        search.validate();
        ga.validate();
        network_shape();
    } catch (const ContractViolation& e) {
        throw ConfigError(e.what());
    }
    if (budget == 0) {
        throw ConfigError("budget must be positive");
    }
    if (seeds.empty()) {
        throw ConfigError("at least one trial seed is required");
    }
    if (output_dir.empty()) {
        throw ConfigError("output directory must be set");
    }
}

namespace {

template <typename T>
void read(const json& j, const char* key, T& field)
{
    if (j.contains(key) && !j.at(key).is_null()) {
        field = j.at(key).get<T>();
    }
}

DivergenceBudget budget_from_json(const json& j, DivergenceBudget b)
{
    read(j, "max_divergence", b.max_divergence);
    read(j, "shrink_factor", b.shrink_factor);
    read(j, "max_iterations", b.max_iterations);
    return b;
}

json budget_to_json(const DivergenceBudget& b)
{
    return {{"max_divergence", b.max_divergence},
            {"shrink_factor", b.shrink_factor},
            {"max_iterations", b.max_iterations}};
}

double mean_of(const std::vector<double>& xs)
{
    double sum = 0.0;
    for (double x : xs) {
        sum += x;
    }
    return xs.empty() ? 0.0 : sum / static_cast<double>(xs.size());
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    out << text;
    if (!out) {
        throw std::runtime_error("failed writing '" + path.string() + "'");
    }
}

void ensure_writable(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
    }
    const fs::path probe = dir / ".write_probe";
    {
        std::ofstream out(probe);
        if (!out || !(out << "ok")) {
            throw std::runtime_error("output directory '" + dir.string() + "' is not writable");
        }
    }
    fs::remove(probe, ec);
}

} // namespace

ExperimentConfig config_from_json(const json& j)
{
    try {
        if (!j.is_object()) {
            throw ConfigError("experiment config must be a JSON object");
        }
        const std::string preset = j.value("preset", std::string("paper"));
        ExperimentConfig c;
        if (preset == "desk") {
            c = ExperimentConfig::desk();
        } else if (preset != "paper") {
            throw ConfigError("unknown preset '" + preset + "' (expected paper or desk)");
        }

        if (j.contains("algorithm")) {
            c.algorithm = algorithm_from_name(j.at("algorithm").get<std::string>());
        }
        if (j.contains("env")) {
            const json& e = j.at("env");
            if (e.is_string()) {
                c.env = EnvSpec::defaults_for(env_kind_from_name(e.get<std::string>()));
            } else {
                c.env = EnvSpec::defaults_for(env_kind_from_name(e.at("name").get<std::string>()));
                read(e, "horizon", c.env.horizon);
                read(e, "goal_parameter", c.env.goal_parameter);
                read(e, "control_penalty", c.env.control_penalty);
            }
        }
        if (j.contains("network")) {
            read(j.at("network"), "hidden", c.hidden_dims);
        }
        read(j, "budget", c.budget);
        read(j, "seeds", c.seeds);
        if (j.contains("output_dir")) {
            c.output_dir = j.at("output_dir").get<std::string>();
        }
        read(j, "threads", c.threads);
        read(j, "record_wall_time", c.record_wall_time);
        read(j, "label", c.label);

        if (j.contains("safe_mutation")) {
            c.search.budget = budget_from_json(j.at("safe_mutation"), c.search.budget);
            c.ga.budget = c.search.budget;
        }
        if (j.contains("mctspo")) {
            const json& m = j.at("mctspo");
            read(m, "exploration", c.search.exploration);
            read(m, "widening_k", c.search.widening_k);
            read(m, "widening_alpha", c.search.widening_alpha);
            read(m, "iterations", c.search.iterations);
            read(m, "candidates", c.search.candidate_count);
            read(m, "max_depth", c.search.max_depth);
        }
        if (j.contains("deepga")) {
            const json& g = j.at("deepga");
            read(g, "population", c.ga.population_size);
            read(g, "truncation", c.ga.truncation_size);
            read(g, "elites", c.ga.elite_count);
            read(g, "generations", c.ga.generations);
        }
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid experiment config: ") + e.what());
    }
}

json config_to_json(const ExperimentConfig& c)
{
    json j;
    j["algorithm"] = algorithm_name(c.algorithm);
    j["env"] = {{"name", env_name(c.env.kind)},
                {"horizon", c.env.horizon},
                {"goal_parameter", c.env.goal_parameter},
                {"control_penalty", c.env.control_penalty}};
    j["network"] = {{"hidden", c.hidden_dims}};
    j["budget"] = c.budget;
    j["seeds"] = c.seeds;
    j["output_dir"] = c.output_dir.string();
    j["threads"] = c.threads;
    j["record_wall_time"] = c.record_wall_time;
    if (!c.label.empty()) {
        j["label"] = c.label;
    }
    j["safe_mutation"] = budget_to_json(c.search.budget);
    j["mctspo"] = {{"exploration", c.search.exploration},
                   {"widening_k", c.search.widening_k},
                   {"widening_alpha", c.search.widening_alpha},
                   {"iterations", c.search.iterations},
                   {"candidates", c.search.candidate_count},
                   {"max_depth", c.search.max_depth}};
    j["deepga"] = {{"population", c.ga.population_size},
                   {"truncation", c.ga.truncation_size},
                   {"elites", c.ga.elite_count},
                   {"generations", c.ga.generations}};
    return j;
}

ExperimentConfig load_config(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path.string() + "'");
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path.string() + "' does not parse: " + e.what());
    }
    return config_from_json(j);
}

RunResult run_trial(const ExperimentConfig& config, std::uint64_t seed)
{
    config.validate();
    Environment env(config.env, config.budget);
    const NetworkShape shape = config.network_shape();
    if (config.algorithm == Algorithm::mctspo) {
        return run_search(env, shape, config.search, seed, config.record_wall_time);
    }
    return run_ga(env, shape, config.ga, seed, config.record_wall_time);
}

std::pair<double, double> mean_and_standard_error(const std::vector<double>& xs)
{
    const double mean = mean_of(xs);
    if (xs.size() < 2) {
        return {mean, 0.0};
    }
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - mean) * (x - mean);
    }
    const double n = static_cast<double>(xs.size());
    return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

ExperimentSummary run_experiment(const ExperimentConfig& config)
{
    config.validate();
    ensure_writable(config.output_dir);

    ExperimentSummary summary;
    summary.label = config.display_label();
    summary.algorithm = config.algorithm;
    summary.trials.resize(config.seeds.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < config.seeds.size(); i = next++) {
            TrialResult& t = summary.trials[i];
            t.seed = config.seeds[i];
            const auto start = std::chrono::steady_clock::now();
            try {
                RunResult r = run_trial(config, t.seed);
                t.best_return = r.best_return;
                t.reached_goal = r.best_reached_goal;
                t.env_calls = r.env_calls;
                t.first_goal_env_calls = r.first_goal_env_calls;
                const std::string stem = "seed" + std::to_string(t.seed);
                t.curve_path = config.output_dir / ("curve_" + stem + ".csv");
                t.genome_path = config.output_dir / ("genome_" + stem + ".json");
                write_curve_csv(r.curve, t.curve_path);
                save_genome(r.best_genome, t.genome_path);
                t.ok = true;
            } catch (const std::exception& e) {
                t.ok = false;
                t.error = e.what();
                spdlog::error("trial with seed {} failed: {}", t.seed, e.what());
            }
            t.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
            spdlog::info("{} seed {}: best return {} after {} env calls", summary.label, t.seed, t.best_return,
                         t.env_calls);
        }
    };

    unsigned threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
    threads = std::min<unsigned>(threads, static_cast<unsigned>(config.seeds.size()));
    {
        std::vector<std::jthread> pool;
        for (unsigned i = 1; i < threads; ++i) {
            pool.emplace_back(worker);
        }
        worker();
    }

    std::vector<double> returns;
    std::vector<double> goal_calls;
    for (const auto& t : summary.trials) {
        if (!t.ok) {
            continue;
        }
        returns.push_back(t.best_return);
        if (t.first_goal_env_calls) {
            ++summary.goal_trials;
            goal_calls.push_back(static_cast<double>(*t.first_goal_env_calls));
        }
    }
    summary.completed = returns.size();
    std::tie(summary.mean_best_return, summary.standard_error) = mean_and_standard_error(returns);
    if (!goal_calls.empty()) {
        summary.mean_calls_to_goal = mean_of(goal_calls);
    }

    json doc = summary_to_json(summary);
    if (!config.record_wall_time) {
        // Timing is the only field that differs between identical reruns.
        for (auto& t : doc["trials"]) {
            t.erase("wall_ms");
        }
    }
    doc["config"] = config_to_json(config);
    write_text(config.output_dir / "summary.json", doc.dump(2) + "\n");
    return summary;
}

json summary_to_json(const ExperimentSummary& s)
{
    json trials = json::array();
    for (const auto& t : s.trials) {
        json jt = {{"seed", t.seed}, {"ok", t.ok}, {"wall_ms", t.wall_ms}};
        if (t.ok) {
            jt["best_return"] = t.best_return;
            jt["reached_goal"] = t.reached_goal;
            jt["env_calls"] = t.env_calls;
            jt["genome"] = t.genome_path.filename().string();
            jt["curve"] = t.curve_path.filename().string();
            jt["first_goal_env_calls"] = t.first_goal_env_calls ? json(*t.first_goal_env_calls) : json(nullptr);
        } else {
            jt["error"] = t.error;
        }
        trials.push_back(std::move(jt));
    }
    return {{"label", s.label},
            {"algorithm", algorithm_name(s.algorithm)},
            {"completed_trials", s.completed},
            {"failed_trials", s.trials.size() - s.completed},
            {"mean_best_return", s.mean_best_return},
            {"standard_error", s.standard_error},
            {"goal_trials", s.goal_trials},
            {"mean_calls_to_goal", s.mean_calls_to_goal ? json(*s.mean_calls_to_goal) : json(nullptr)},
            {"trials", std::move(trials)}};
}

std::string format_double(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

std::string curve_to_csv(const std::vector<CurvePoint>& curve)
{
    std::string out = "env_calls,best_return,wall_ms\n";
    for (const auto& p : curve) {
        out += std::to_string(p.env_calls);
        out += ',';
        out += format_double(p.best_return);
        out += ',';
        out += format_double(p.wall_ms);
        out += '\n';
    }
    return out;
}

void write_curve_csv(const std::vector<CurvePoint>& curve, const fs::path& path)
{
    write_text(path, curve_to_csv(curve));
}

ReplayResult replay(const Genome& genome, const EnvSpec& env_spec)
{
    Environment env(env_spec);
    const NetworkShape& shape = genome.shape;
    if (shape.input_dim != env.dynamics().observation_dim() || shape.output_dim != env.dynamics().action_dim()) {
        throw ConfigError("genome network (" + std::to_string(shape.input_dim) + " inputs, "
                          + std::to_string(shape.output_dim) + " outputs) does not match " + env_name(env_spec.kind));
    }
    const Trajectory traj = rollout(env, materialize(genome));
    return {traj.total_return, traj.reached_goal, traj.size()};
}

ReplayResult replay(const fs::path& genome_path, const EnvSpec& env)
{
    return replay(load_genome(genome_path), env);
}

void validate_comparable(const ExperimentConfig& a, const ExperimentConfig& b)
{
    if (!(a.env == b.env)) {
        throw ConfigError("compared configs use different environments");
    }
    if (a.budget != b.budget) {
        throw ConfigError("compared configs use different budgets (" + std::to_string(a.budget) + " vs "
                          + std::to_string(b.budget) + ")");
    }
}

ComparisonRow comparison_row(const ExperimentSummary& s)
{
    return {s.label, algorithm_name(s.algorithm), s.mean_best_return, s.standard_error,
            s.completed, s.goal_trials, s.mean_calls_to_goal};
}

std::vector<ComparisonRow> compare(const ExperimentConfig& a, const ExperimentConfig& b)
{
    a.validate();
    b.validate();
    validate_comparable(a, b);
    return {comparison_row(run_experiment(a)), comparison_row(run_experiment(b))};
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows)
{
    std::string out = "algo,label,mean,stderr,trials,goal_trials,mean_calls_to_goal\n";
    for (const auto& r : rows) {
        out += r.algorithm + "," + r.label + "," + format_double(r.mean) + "," + format_double(r.standard_error) + ","
               + std::to_string(r.trials) + "," + std::to_string(r.goal_trials) + ","
               + (r.mean_calls_to_goal ? format_double(*r.mean_calls_to_goal) : std::string()) + "\n";
    }
    return out;
}

std::string comparison_text(const std::vector<ComparisonRow>& rows)
{
    std::ostringstream os;
    os << std::left << std::setw(16) << "label" << std::setw(8) << "algo" << std::right << std::setw(10) << "mean"
       << std::setw(10) << "stderr" << std::setw(8) << "trials" << std::setw(8) << "goals" << std::setw(16)
       << "calls_to_goal" << '\n';
    for (const auto& r : rows) {
        os << std::left << std::setw(16) << r.label << std::setw(8) << r.algorithm << std::right << std::fixed
           << std::setprecision(4) << std::setw(10) << r.mean << std::setw(10) << r.standard_error << std::setw(8)
           << r.trials << std::setw(8) << r.goal_trials << std::setw(16);
        if (r.mean_calls_to_goal) {
            os << std::setprecision(0) << *r.mean_calls_to_goal;
        } else {
            os << "-";
        }
        os << '\n';
    }
    return os.str();
}

} // namespace mctspo
