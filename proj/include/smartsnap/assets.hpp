#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace smartsnap {

// Files under assets/ are compiled into the library so the CLI and the Python
// module work without locating the source tree.
//   tool_schemas.json     agent tool schema (one function object per tool)
//   system_prompt.md      agent system prompt (evidence-curation rules)
//   user_prompt.md        task instruction template, {task_content}
//   verifier_prompt.md    judge prompt, {task_instruction} / {submit_message}
//   tasks.json            shipped task suite with reference solutions
//   default_config.json   default run configuration
std::string_view asset(std::string_view name);  // throws InvalidArgument if unknown
std::vector<std::string> asset_names();

}  // namespace smartsnap
