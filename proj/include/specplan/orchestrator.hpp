#pragma once

#include <optional>
#include <string>
#include <vector>

#include "specplan/bandit.hpp"
#include "specplan/core_types.hpp"
#include "specplan/model_client.hpp"
#include "specplan/speculation.hpp"
#include "specplan/tool_runtime.hpp"
#include "specplan/trace.hpp"

namespace specplan {

enum class PolicyKind { IdleSpec, Vanilla, SeqRev, SleepTime, Planning };

std::string to_string(PolicyKind p);
std::optional<PolicyKind> policy_from_string(std::string_view s);
const std::vector<std::string>& policy_names();

struct RunConfig {
    PolicyKind policy = PolicyKind::Vanilla;
    int k_cap = kDefaultDraftCap;
    int prior_alpha = 1;
    int prior_beta = 1;
    int max_steps = 20;
    double temperature = 0.6;
    double top_p = 1.0;
    int max_output_tokens = 2048;
    // Retries for main-path generations before the task is abandoned.
    int main_retries = 1;
    DraftingConfig drafting;
    // Carry the posterior across tasks instead of resetting to the prior.
    bool cross_task_posterior = false;
    bool log_full_text = false;
};

struct TaskRunResult {
    TrajectoryState trajectory;
    std::vector<IdleWindow> windows;
    StrategyPosterior posterior;
    bool success = false;  // final answer matched the gold answer
    int64_t wall_ms = 0;
};

// Parses the last "action: tool{k=v;...}" line of a model output.
std::optional<ToolCall> parse_action(std::string_view model_output, std::string call_id);

// Runs one task to completion under the configured policy. Per loop
// iteration: one reasoning generation conditioned on the trajectory and any
// finalized drafts, the tool execution (overlapped with idle-time work where
// the policy calls for it), and the policy's post-observation phase. Every
// event is emitted to the sink in causal order.
TaskRunResult run_task(const Task& task, const RunConfig& cfg, ModelClient& model,
                       const ToolRegistry& tools, Clock& clock, Rng& bandit_rng, Rng& latency_rng,
                       TraceSink& sink,
                       std::optional<StrategyPosterior> initial_posterior = std::nullopt);

}  // namespace specplan
