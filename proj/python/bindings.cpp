#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "smartsnap/config.hpp"
#include "smartsnap/error.hpp"
#include "smartsnap/grpo.hpp"
#include "smartsnap/log.hpp"
#include "smartsnap/metrics.hpp"
#include "smartsnap/orchestrator.hpp"
#include "smartsnap/reward.hpp"
#include "smartsnap/task.hpp"
#include "smartsnap/verifier.hpp"
#include "smartsnap/world.hpp"

namespace py = pybind11;
using namespace smartsnap;

namespace {

// JSON crosses the boundary as text; the json module does the Python side.
py::object to_py(const nlohmann::ordered_json& j) { return py::module_::import("json").attr("loads")(j.dump()); }
py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_py(const py::handle& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

RunConfig make_config(const py::object& overrides) {
  RunConfig cfg = default_run_config();
  if (!overrides.is_none()) cfg = config_from_json(from_py(overrides), cfg);
  cfg.validate();
  return cfg;
}

const TaskSuite& suite_for(const RunConfig& cfg) {
  if (cfg.task_suite == "builtin") return builtin_task_suite();
  static thread_local TaskSuite loaded;
  loaded = load_task_suite(cfg.task_suite);
  return loaded;
}

PolicyParams params_from(const py::object& weights) {
  PolicyParams p = PolicyParams::zeros();
  if (!weights.is_none()) p.weights = weights.cast<std::vector<double>>();
  p.validate();
  return p;
}

py::dict reward_dict(const RewardBreakdown& b) {
  py::dict d;
  d["format"] = b.format;
  d["validity"] = b.validity;
  d["complete"] = b.complete;
  d["concise"] = b.concise;
  d["total"] = b.total;
  return d;
}

py::dict verdict_dict(const Verdict& v) {
  py::dict d;
  d["valid_evidence"] = v.valid_evidence;
  d["outcome"] = std::string(to_string(v.outcome));
  d["reasoning"] = v.reasoning;
  d["inconsistent"] = v.inconsistent;
  return d;
}

std::vector<LogRecord> records_from(const py::list& records) {
  std::vector<LogRecord> out;
  for (const auto& r : records) out.push_back(record_from_json(from_py(r)));
  return out;
}

class PyWorld {
 public:
  explicit PyWorld(const std::string& task_id) : task_(builtin_task_suite().find(task_id)) { reset(); }

  std::string reset() { return world_.reset(task_).xml; }

  py::dict step(const py::object& action) {
    const StepResult r = world_.step(action_from_json(from_py(action)));
    py::dict d;
    d["tool_response"] = r.tool_response;
    d["xml"] = r.observation.xml;
    d["screen"] = r.observation.screen_id;
    d["mutated"] = r.mutated;
    return d;
  }

  std::string xml() const { return render_xml(world_.state()); }
  py::object state() const { return to_py(world_state_to_json(world_.state())); }
  std::vector<std::pair<std::string, bool>> subgoals() const { return ground_truth_check(world_.state(), task_); }

 private:
  const TaskSpec& task_;
  World world_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "SmartSnap harness core";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<InvalidArgument>(m, "InvalidArgument", error.ptr());
  py::register_exception<TransportError>(m, "TransportError", error.ptr());
  py::register_exception<NumericError>(m, "NumericError", error.ptr());
  py::register_exception<MissingTag>(m, "MissingTag", error.ptr());
  py::register_exception<TrajectoryClosed>(m, "TrajectoryClosed", error.ptr());

  m.def("default_config", [] { return to_py(config_to_json(default_run_config())); });
  m.def("config_help", &config_help);

  m.def("task_ids", [] {
    std::vector<std::string> ids;
    for (const auto& t : builtin_task_suite().tasks) ids.push_back(t.task_id);
    return ids;
  });
  m.def("task", [](const std::string& id) {
    const TaskSpec& t = builtin_task_suite().find(id);
    py::dict d;
    d["id"] = t.task_id;
    d["app"] = t.app;
    d["instruction"] = t.instruction;
    std::vector<std::string> goals;
    for (const auto& g : t.subgoals) goals.push_back(g.name);
    d["subgoals"] = goals;
    std::vector<py::object> sol;
    for (const auto& a : t.solution) sol.push_back(to_py(action_to_json(a)));
    d["solution"] = sol;
    return d;
  });

  py::class_<PyWorld>(m, "World")
      .def(py::init<const std::string&>(), py::arg("task_id"))
      .def("reset", &PyWorld::reset)
      .def("step", &PyWorld::step, py::arg("action"))
      .def_property_readonly("xml", &PyWorld::xml)
      .def("state", &PyWorld::state)
      .def("subgoals", &PyWorld::subgoals);

  m.def("compute_advantages", &compute_advantages, py::arg("rewards"), py::arg("std_epsilon") = 1e-6);
  m.def("clipped_term", &clipped_term, py::arg("ratio"), py::arg("advantage"), py::arg("epsilon") = 0.2);

  m.def(
      "compute_reward",
      [](bool format_ok, bool valid_evidence, bool success, int evidence_count, const py::object& config) {
        const RunConfig cfg = make_config(config);
        const FormatReport fmt = format_ok ? FormatReport{} : FormatReport{false, {"format check failed"}};
        const Verdict v{valid_evidence, success ? Outcome::kSuccess : Outcome::kFailure, "", false};
        return reward_dict(compute_reward(cfg.reward, fmt, v, evidence_count));
      },
      py::arg("format_ok"), py::arg("valid_evidence"), py::arg("success"), py::arg("evidence_count"),
      py::arg("config") = py::none());

  m.def("parse_verdict", [](const std::string& raw) { return verdict_dict(parse_verdict(raw)); }, py::arg("raw"));

  m.def(
      "rollout",
      [](const std::string& task_id, const std::string& policy, std::uint64_t seed, const py::object& weights,
         double temperature, const py::object& config) {
        const RunConfig cfg = make_config(config);
        const TaskSpec& task = suite_for(cfg).find(task_id);
        std::unique_ptr<Policy> p;
        if (policy == "scripted") {
          p = std::make_unique<ScriptedPolicy>();
        } else if (policy == "toy") {
          p = std::make_unique<ToyPolicy>(params_from(weights), temperature);
        } else {
          throw ConfigError("policy must be 'scripted' or 'toy'");
        }
        LogRecord rec;
        {
          py::gil_scoped_release release;
          rec.traj = rollout(task, *p, cfg.max_turns, seed).traj;
          rec.score = score(rec.traj, task, cfg, nullptr);
        }
        return to_py(record_to_json(rec));
      },
      py::arg("task_id"), py::arg("policy") = "scripted", py::arg("seed") = 0, py::arg("weights") = py::none(),
      py::arg("temperature") = 1.0, py::arg("config") = py::none());

  m.def(
      "compute_metrics",
      [](const py::list& records, const py::object& config) {
        const RunConfig cfg = make_config(config);
        return to_py(metrics_to_json(compute_metrics(records_from(records), suite_for(cfg))));
      },
      py::arg("records"), py::arg("config") = py::none());

  m.def(
      "evaluate",
      [](const py::object& weights, const py::object& config) {
        const RunConfig cfg = make_config(config);
        const PolicyParams p = params_from(weights);
        EvalResult r;
        {
          py::gil_scoped_release release;
          r = evaluate_toy(p, cfg, suite_for(cfg), nullptr);
        }
        return to_py(metrics_to_json(r.table));
      },
      py::arg("weights") = py::none(), py::arg("config") = py::none());

  m.def(
      "train",
      [](const py::object& config) {
        const RunConfig cfg = make_config(config);
        if (cfg.verifier != "oracle") throw ConfigError("the Python train() supports the oracle verifier only");
        TrainingReport rep;
        {
          py::gil_scoped_release release;
          rep = train(cfg, suite_for(cfg), PolicyParams::zeros(), nullptr);
        }
        py::dict d;
        py::list steps;
        for (const auto& s : rep.steps) steps.append(to_py(step_metrics_to_json(s)));
        d["steps"] = steps;
        d["weights"] = rep.final_params.weights;
        if (rep.initial_eval) d["initial_eval"] = to_py(metrics_to_json(rep.initial_eval->table));
        if (rep.final_eval) d["final_eval"] = to_py(metrics_to_json(rep.final_eval->table));
        return d;
      },
      py::arg("config") = py::none());
}
