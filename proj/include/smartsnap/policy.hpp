#pragma once

// Action-producing policies. The toy policy scores a finite candidate set with
// a linear model over hand-written features, which keeps pi(tau) exact.

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "smartsnap/action.hpp"
#include "smartsnap/chat_client.hpp"
#include "smartsnap/task.hpp"
#include "smartsnap/trajectory.hpp"
#include "smartsnap/world.hpp"

namespace smartsnap {

inline constexpr std::string_view kFeatureVersion = "toy-v1";

// Dense feature index space of the toy policy.
enum Feature : int {
  // action type
  kBiasTap,
  kBiasType,
  kBiasLongPress,
  kBiasSwipe,
  kBiasBack,
  kBiasHome,
  kBiasWait,
  kBiasEnter,
  kBiasLaunch,
  kBiasGetXml,
  kBiasSubmit,
  // tap
  kTapSwitch,
  kTapEditText,
  kTapButton,
  kTapListItem,
  kTapIcon,
  kTapOverlapPending,
  kTapFullMatchPending,
  kTapOverlapInstruction,
  kTapBestMatch,
  kTapSwitchToward,
  kTapSwitchAway,
  kTapCommitReady,
  kTapCommitUnready,
  kTapCancel,
  kTapEditWanted,
  kTapEditUnwanted,
  kTapEditFilled,
  kTapCheckedButton,
  // type
  kTypeKeyMatch,
  kTypeKeyMismatch,
  kTypeFieldFilled,
  // long press
  kLongPressTarget,
  kLongPressPartial,
  kLongPressNoDelete,
  // swipe
  kSwipeUp,
  kSwipeDown,
  kSwipeSearch,
  // navigation
  kBackKeyboard,
  kBackScreenDone,
  kBackInForm,
  kHomeInApp,
  kLaunchMatch,
  kLaunchCurrent,
  kEnterFilled,
  kEnterNoFocus,
  // history
  kRepeatLog,
  kRepeatLast,
  // submit
  kSubmitEv0,
  kSubmitEv1,
  kSubmitEv2,
  kSubmitEv3,
  kSubmitIncludesLast,
  kSubmitIncludesLastMutating,
  kSubmitEvidenceInApp,
  kSubmitDone,
  kSubmitDoneFraction,
  kSubmitLate,
  kNumFeatures
};

std::string_view feature_name(int f);

using FeatureVec = std::vector<std::pair<int, double>>;  // sparse (index, value)

struct CandidateAction {
  Action action;
  FeatureVec features;
};

struct PolicyParams {
  std::vector<double> weights;
  std::string feature_version = std::string(kFeatureVersion);

  static PolicyParams zeros();
  // Throws InvalidArgument on dimension/version mismatch or non-finite weights.
  void validate() const;
  bool operator==(const PolicyParams&) const = default;
};

double score(const PolicyParams& params, const FeatureVec& f);

// Everything needed to recompute pi(a|s) for one sampled step.
struct Decision {
  std::vector<FeatureVec> candidates;
  int chosen = 0;
  double temperature = 1.0;
  double logprob = 0.0;
};

// Log-softmax of w.f / temperature over the candidate set.
std::vector<double> candidate_logprobs(const PolicyParams& params, const std::vector<FeatureVec>& candidates,
                                       double temperature);
double decision_logprob(const PolicyParams& params, const Decision& d);
// grad += scale * d/dw log pi(chosen).
void accumulate_logprob_gradient(const PolicyParams& params, const Decision& d, double scale,
                                 std::vector<double>& grad);

struct SampledAction {
  int index = 0;
  double logprob = 0.0;
};

// Reproducible categorical draw. Throws InvalidArgument on an empty set or
// non-positive temperature.
SampledAction sample_action(const PolicyParams& params, const std::vector<CandidateAction>& candidates,
                            double temperature, std::uint64_t seed);

// ---- instruction grounding --------------------------------------------------

// Lowercase word pieces; keeps ':', '.', '-' inside tokens, non-ASCII bytes
// separate tokens.
std::vector<std::string> tokenize(std::string_view text);
bool is_stopword(std::string_view token);

enum class GoalKind { kSwitch, kRecord, kAbsence };

// One task parameter and what the instruction wants done with it.
struct GoalItem {
  std::string key;
  std::string value;
  std::vector<std::string> tokens;
  GoalKind kind = GoalKind::kRecord;
  bool polarity = true;       // desired switch state
  bool clause_polar = false;  // the clause names a polarity explicitly
  int clause = 0;
};

struct TaskIntent {
  std::optional<App> app;
  std::vector<std::string> content_tokens;  // instruction tokens minus stopwords
  std::vector<GoalItem> items;
  bool delete_intent = false;
};

TaskIntent analyze_task(const TaskSpec& task);

enum class GoalStatus { kUnknown, kUnsatisfied, kSatisfied };

// What the agent can infer about each goal item from its own history.
struct Progress {
  std::vector<GoalStatus> status;
  std::optional<UiNode> last_screen;
  int satisfied() const;
  bool all_done() const;
};

Progress track_progress(const TaskIntent& intent, const Trajectory& traj);

// Deterministic, at most 64 candidates: taps on reachable clickable nodes,
// typing of task parameters while the keyboard is up, long presses on list
// rows, swipes, navigation, and up to 8 submits with evidence subsets drawn
// from the latest app-relevant rounds.
std::vector<CandidateAction> enumerate_candidates(const Observation& obs, const Trajectory& traj,
                                                  const TaskSpec& task);
std::vector<CandidateAction> enumerate_candidates(const Observation& obs, const Trajectory& traj,
                                                  const TaskSpec& task, const TaskIntent& intent);

inline constexpr std::size_t kMaxCandidates = 64;
inline constexpr std::size_t kMaxSubmitCandidates = 8;

// ---- policies -----------------------------------------------------------------

struct PolicyStep {
  std::optional<Action> action;  // empty when the output could not be parsed
  std::optional<std::string> thought;
  std::optional<Decision> decision;  // toy policy only
  std::string raw;
  std::string format_error;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual PolicyStep act(const Observation& obs, const Trajectory& traj, const TaskSpec& task,
                         std::uint64_t seed) = 0;
};

class ToyPolicy : public Policy {
 public:
  ToyPolicy(PolicyParams params, double temperature);
  PolicyStep act(const Observation& obs, const Trajectory& traj, const TaskSpec& task, std::uint64_t seed) override;
  const PolicyParams& params() const { return params_; }

 private:
  PolicyParams params_;
  double temperature_;
  std::string intent_task_;
  TaskIntent intent_;
};

// Replays the task's checked-in solution, then submits.
class ScriptedPolicy : public Policy {
 public:
  PolicyStep act(const Observation& obs, const Trajectory& traj, const TaskSpec& task, std::uint64_t seed) override;
};

struct LlmPolicyConfig {
  EndpointConfig endpoint{"http://127.0.0.1:8000/v1/chat/completions", "SMARTSNAP_POLICY_API_KEY", 120.0, 2, 4};
  std::string model = "qwen3-8b";
  double temperature = 0.6;
  int max_tokens = 2048;
  int context_budget_tokens = 32768;  // estimated as characters / 4
};

// Builds the chat transcript sent to a remote policy: system prompt, task
// instruction, then one assistant/user pair per recorded round. The oldest
// tool responses are elided when the estimate exceeds the budget.
std::vector<ChatMessage> build_policy_transcript(const std::string& system_prompt, const std::string& instruction,
                                                 const Trajectory& traj, int context_budget_tokens);

// Extracts the first tool call from a chat response (native tool_calls, or a
// {"name":..., "arguments":...} object embedded in the text). Throws
// InvalidArgument when none parses.
Action parse_tool_call(const ChatResponse& response);

class LlmPolicy : public Policy {
 public:
  LlmPolicy(std::shared_ptr<ChatClient> client, LlmPolicyConfig cfg);
  PolicyStep act(const Observation& obs, const Trajectory& traj, const TaskSpec& task, std::uint64_t seed) override;

 private:
  std::shared_ptr<ChatClient> client_;
  LlmPolicyConfig cfg_;
  nlohmann::json tools_;
};

}  // namespace smartsnap
