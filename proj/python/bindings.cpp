#include "mctspo/deepga.hpp"
#include "mctspo/env.hpp"
#include "mctspo/errors.hpp"
#include "mctspo/genome.hpp"
#include "mctspo/harness.hpp"
#include "mctspo/policy_net.hpp"
#include "mctspo/safe_mutation.hpp"
#include "mctspo/search.hpp"

#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace mctspo;

namespace {

ParameterVector make_params(const NetworkShape& shape, std::vector<double> values)
{
    return ParameterVector(shape, std::move(values));
}

std::vector<double> to_list(const ParameterVector& p)
{
    return {p.values().begin(), p.values().end()};
}

py::dict run_result_dict(const RunResult& r)
{
    py::list curve;
    for (const auto& p : r.curve) {
        curve.append(py::make_tuple(p.env_calls, p.best_return, p.wall_ms));
    }
    py::dict d;
    d["best_genome"] = r.best_genome;
    d["best_return"] = r.best_return;
    d["best_reached_goal"] = r.best_reached_goal;
    d["curve"] = curve;
    d["env_calls"] = r.env_calls;
    d["first_goal_env_calls"] = r.first_goal_env_calls;
    d["iterations"] = r.iterations;
    return d;
}

NetworkShape shape_for(const EnvSpec& env, std::vector<std::size_t> hidden)
{
    return policy_shape_for(*make_dynamics(env), std::move(hidden));
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Monte-Carlo tree search for policy optimization: core bindings";

    py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DegenerateDirection>(m, "DegenerateDirection", PyExc_ArithmeticError);
    py::register_exception<CandidateGenerationFailed>(m, "CandidateGenerationFailed", PyExc_RuntimeError);
    py::register_exception<BudgetExhausted>(m, "BudgetExhausted", PyExc_RuntimeError);

    py::enum_<Activation>(m, "Activation").value("tanh", Activation::tanh).value("linear", Activation::linear);

    py::class_<NetworkShape>(m, "NetworkShape")
        .def(py::init([](std::size_t in, std::vector<std::size_t> hidden, std::size_t out, std::vector<double> bounds,
                         Activation act) {
                 NetworkShape s{in, std::move(hidden), out, std::move(bounds), act};
                 s.validate();
                 return s;
             }),
             py::arg("input_dim"), py::arg("hidden_dims"), py::arg("output_dim"),
             py::arg("output_bounds") = std::vector<double>{}, py::arg("activation") = Activation::tanh)
        .def_readwrite("input_dim", &NetworkShape::input_dim)
        .def_readwrite("hidden_dims", &NetworkShape::hidden_dims)
        .def_readwrite("output_dim", &NetworkShape::output_dim)
        .def_readwrite("output_bounds", &NetworkShape::output_bounds)
        .def_readwrite("activation", &NetworkShape::activation)
        .def_property_readonly("parameter_count", &NetworkShape::parameter_count)
        .def(py::self == py::self);

    m.def("init_from_seed", [](const NetworkShape& s, std::uint64_t seed) { return to_list(init_from_seed(s, seed)); },
          py::arg("shape"), py::arg("seed"));
    m.def("forward",
          [](const NetworkShape& s, std::vector<double> params, std::vector<double> obs) {
              return forward(make_params(s, std::move(params)), obs);
          },
          py::arg("shape"), py::arg("params"), py::arg("observation"));
    m.def("jvp_outputs",
          [](const NetworkShape& s, std::vector<double> params, std::vector<double> obs, std::vector<double> dir) {
              return jvp_outputs(make_params(s, std::move(params)), obs, dir);
          },
          py::arg("shape"), py::arg("params"), py::arg("observation"), py::arg("direction"));

    py::enum_<ActionKind>(m, "ActionKind")
        .value("zero_init", ActionKind::zero_init)
        .value("seeded_init", ActionKind::seeded_init)
        .value("mutation", ActionKind::mutation);

    py::class_<MutationAction>(m, "MutationAction")
        .def(py::init<>())
        .def_static("init", &MutationAction::init, py::arg("seed"))
        .def_static("mutate", &MutationAction::mutate, py::arg("seed"), py::arg("magnitude"))
        .def_readwrite("seed", &MutationAction::seed)
        .def_readwrite("magnitude", &MutationAction::magnitude)
        .def_readwrite("kind", &MutationAction::kind)
        .def("__repr__", [](const MutationAction& a) {
            return "MutationAction(seed=" + std::to_string(a.seed) + ", magnitude=" + format_double(a.magnitude) + ")";
        });

    py::class_<Genome>(m, "Genome")
        .def(py::init([](const NetworkShape& s, std::vector<MutationAction> actions) {
                 Genome g{s, std::move(actions)};
                 g.validate();
                 return g;
             }),
             py::arg("shape"), py::arg("actions"))
        .def_readonly("shape", &Genome::shape)
        .def_readonly("actions", &Genome::actions)
        .def("extended", &Genome::extended)
        .def("to_json", [](const Genome& g) { return genome_to_json(g).dump(); })
        .def_static("from_json", [](const std::string& s) { return genome_from_json(nlohmann::json::parse(s)); })
        .def(py::self == py::self);

    m.def("direction_from_seed", &direction_from_seed, py::arg("seed"), py::arg("dim"));
    m.def("apply_mutation",
          [](const NetworkShape& s, std::vector<double> params, const MutationAction& a) {
              return to_list(apply_mutation(make_params(s, std::move(params)), a));
          },
          py::arg("shape"), py::arg("params"), py::arg("action"));
    m.def("materialize", [](const Genome& g) { return to_list(materialize(g)); }, py::arg("genome"));
    m.def("save_genome", &save_genome, py::arg("genome"), py::arg("path"));
    m.def("load_genome", &load_genome, py::arg("path"));

    py::enum_<EnvKind>(m, "EnvKind")
        .value("sparse_mountain_car", EnvKind::sparse_mountain_car)
        .value("sparse_acrobot", EnvKind::sparse_acrobot);

    py::class_<EnvSpec>(m, "EnvSpec")
        .def_static("sparse_mountain_car", &EnvSpec::sparse_mountain_car)
        .def_static("sparse_acrobot", &EnvSpec::sparse_acrobot)
        .def_static("from_name", [](const std::string& n) { return EnvSpec::defaults_for(env_kind_from_name(n)); })
        .def_readwrite("kind", &EnvSpec::kind)
        .def_readwrite("horizon", &EnvSpec::horizon)
        .def_readwrite("goal_parameter", &EnvSpec::goal_parameter)
        .def_readwrite("control_penalty", &EnvSpec::control_penalty)
        .def_property_readonly("name", [](const EnvSpec& e) { return env_name(e.kind); });

    m.def("policy_shape", &shape_for, py::arg("env"), py::arg("hidden_dims"));

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("total_return", &Trajectory::total_return)
        .def_readonly("reached_goal", &Trajectory::reached_goal)
        .def("__len__", &Trajectory::size)
        .def_property_readonly("observations", [](const Trajectory& t) {
            std::vector<std::vector<double>> out;
            for (const auto& tr : t.transitions) {
                out.push_back(tr.observation);
            }
            return out;
        })
        .def_property_readonly("rewards", [](const Trajectory& t) {
            std::vector<double> out;
            for (const auto& tr : t.transitions) {
                out.push_back(tr.reward);
            }
            return out;
        });

    m.def("rollout",
          [](const EnvSpec& env, const NetworkShape& s, std::vector<double> params) {
              Environment e(env);
              return rollout(e, make_params(s, std::move(params)));
          },
          py::arg("env"), py::arg("shape"), py::arg("params"));

    py::class_<DivergenceBudget>(m, "DivergenceBudget")
        .def(py::init<>())
        .def_readwrite("max_divergence", &DivergenceBudget::max_divergence)
        .def_readwrite("shrink_factor", &DivergenceBudget::shrink_factor)
        .def_readwrite("max_iterations", &DivergenceBudget::max_iterations);

    m.def("divergence",
          [](const NetworkShape& s, std::vector<double> new_p, std::vector<double> old_p, const Trajectory& t) {
              return divergence(make_params(s, std::move(new_p)), make_params(s, std::move(old_p)), t);
          },
          py::arg("shape"), py::arg("new_params"), py::arg("old_params"), py::arg("trajectory"));
    m.def("quadratic_form",
          [](const NetworkShape& s, std::vector<double> old_p, const Trajectory& t, std::vector<double> dir) {
              return quadratic_form(make_params(s, std::move(old_p)), t, dir);
          },
          py::arg("shape"), py::arg("old_params"), py::arg("trajectory"), py::arg("direction"));
    m.def("solve_magnitude", &solve_magnitude, py::arg("q"), py::arg("budget") = DivergenceBudget{});
    m.def("line_search_magnitude",
          [](const NetworkShape& s, std::vector<double> old_p, const Trajectory& t, std::uint64_t seed,
             const DivergenceBudget& b) {
              const auto r = line_search_magnitude(make_params(s, std::move(old_p)), t, seed, b);
              return py::make_tuple(r.action, r.divergence, r.cap_hit);
          },
          py::arg("shape"), py::arg("old_params"), py::arg("trajectory"), py::arg("seed"),
          py::arg("budget") = DivergenceBudget{});

    py::class_<SearchConfig>(m, "SearchConfig")
        .def(py::init<>())
        .def_readwrite("exploration", &SearchConfig::exploration)
        .def_readwrite("widening_k", &SearchConfig::widening_k)
        .def_readwrite("widening_alpha", &SearchConfig::widening_alpha)
        .def_readwrite("iterations", &SearchConfig::iterations)
        .def_readwrite("candidate_count", &SearchConfig::candidate_count)
        .def_readwrite("budget", &SearchConfig::budget)
        .def_readwrite("max_depth", &SearchConfig::max_depth);

    py::class_<GAConfig>(m, "GAConfig")
        .def(py::init<>())
        .def_readwrite("population_size", &GAConfig::population_size)
        .def_readwrite("truncation_size", &GAConfig::truncation_size)
        .def_readwrite("elite_count", &GAConfig::elite_count)
        .def_readwrite("generations", &GAConfig::generations)
        .def_readwrite("budget", &GAConfig::budget);

    m.def("run_search",
          [](const EnvSpec& env, std::vector<std::size_t> hidden, const SearchConfig& c, std::uint64_t seed,
             std::uint64_t budget) {
              Environment e(env, budget);
              RunResult r;
              {
                  py::gil_scoped_release release;
                  r = run_search(e, shape_for(env, std::move(hidden)), c, seed);
              }
              return run_result_dict(r);
          },
          py::arg("env"), py::arg("hidden_dims"), py::arg("config"), py::arg("seed"), py::arg("budget"));
    m.def("run_ga",
          [](const EnvSpec& env, std::vector<std::size_t> hidden, const GAConfig& c, std::uint64_t seed,
             std::uint64_t budget) {
              Environment e(env, budget);
              RunResult r;
              {
                  py::gil_scoped_release release;
                  r = run_ga(e, shape_for(env, std::move(hidden)), c, seed);
              }
              return run_result_dict(r);
          },
          py::arg("env"), py::arg("hidden_dims"), py::arg("config"), py::arg("seed"), py::arg("budget"));

    m.def("replay",
          [](const std::filesystem::path& path, const std::string& env) {
              const ReplayResult r = replay(path, EnvSpec::defaults_for(env_kind_from_name(env)));
              return py::make_tuple(r.total_return, r.reached_goal);
          },
          py::arg("genome_path"), py::arg("env"));

    m.def("run_experiment_json",
          [](const std::string& config_json) {
              const ExperimentConfig c = config_from_json(nlohmann::json::parse(config_json));
              ExperimentSummary s;
              {
                  py::gil_scoped_release release;
                  s = run_experiment(c);
              }
              return summary_to_json(s).dump();
          },
          py::arg("config_json"));
}
