#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "smartsnap/orchestrator.hpp"
#include "smartsnap/task.hpp"
#include "smartsnap/world.hpp"

namespace testutil {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline std::string golden(const std::string& name) { return read_file(std::string(SMARTSNAP_GOLDEN_DIR) + "/" + name); }

// Center tap on a node of the current screen.
inline smartsnap::act::Tap tap_on(const smartsnap::WorldState& s, const std::string& id) {
  const auto root = smartsnap::build_screen(s);
  const auto* n = smartsnap::find_node(root, id);
  if (n == nullptr) throw std::runtime_error("no node " + id);
  return {n->bounds.x1, n->bounds.y1, n->bounds.x2, n->bounds.y2};
}

// Runs the task's reference solution and returns the trajectory it produces.
inline smartsnap::Trajectory scripted_trajectory(const smartsnap::TaskSpec& task, std::uint64_t seed = 0) {
  smartsnap::ScriptedPolicy p;
  return smartsnap::rollout(task, p, 30, seed).traj;
}

}  // namespace testutil
