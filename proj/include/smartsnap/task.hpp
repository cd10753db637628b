#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "smartsnap/action.hpp"
#include "smartsnap/world.hpp"

namespace smartsnap {

// Named predicate over a WorldState. `check` selects the predicate family:
//   toggle            {key, value}
//   last_txn_amount   {cents}        signed; applies to the most recently added transaction
//   last_txn_category {category}
//   last_txn_date     {date}
//   txn_absent        {id}
//   alarm_exists      {time}
//   alarm_absent      {time}
//   alarm_enabled     {time, value}
//   alarm_label       {time, label}
struct Subgoal {
  std::string name;
  std::string check;
  nlohmann::json args;
};

bool evaluate_subgoal(const Subgoal& goal, const WorldState& state);

struct TaskSpec {
  std::string task_id;
  std::string app;  // "Settings", "Expenses", "Clock"
  std::string instruction;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<Subgoal> subgoals;
  WorldState initial_state;
  // Checked-in reference solution ending with a submit call.
  std::vector<Action> solution;

  // Number of world-acting calls in the reference solution.
  int solution_exec_steps() const;
};

struct TaskSuite {
  int version = 1;
  std::vector<TaskSpec> tasks;

  const TaskSpec& find(const std::string& task_id) const;  // throws InvalidArgument
  const TaskSpec* try_find(const std::string& task_id) const;
};

// Substitutes {key} placeholders with parameter values.
std::string render_instruction(const std::string& tmpl,
                               const std::vector<std::pair<std::string, std::string>>& params);

TaskSpec task_from_json(const nlohmann::ordered_json& j);
TaskSuite load_task_suite(const std::string& path);
TaskSuite parse_task_suite(const std::string& text);
// The suite compiled into the library (assets/tasks.json).
const TaskSuite& builtin_task_suite();

// Puts the world into the task's initial state and returns the first observation.
// Throws InvalidArgument for unknown apps.
WorldState reset_state(const TaskSpec& task);

// Order-preserving evaluation of every subgoal.
std::vector<std::pair<std::string, bool>> ground_truth_check(const WorldState& state,
                                                             const TaskSpec& task);
bool all_subgoals_hold(const WorldState& state, const TaskSpec& task);

// Mutable single-episode wrapper around the pure transition function.
class World {
 public:
  Observation reset(const TaskSpec& task);
  StepResult step(const Action& action);
  const WorldState& state() const { return state_; }

 private:
  WorldState state_ = default_world_state();
};

nlohmann::json world_state_to_json(const WorldState& s);
WorldState world_state_from_json(const nlohmann::json& j);

}  // namespace smartsnap
