#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "specplan/bandit.hpp"
#include "specplan/core_types.hpp"
#include "specplan/model_client.hpp"
#include "specplan/prompts.hpp"

namespace specplan {

struct DraftingConfig {
    int cap = kDefaultDraftCap;
    // One retry per iteration on generation failure, then the iteration is
    // skipped; the whole window stops after this many failed attempts.
    int retries_per_iteration = 1;
    int max_failures_per_window = 4;
    double temperature = 0.6;
    double top_p = 1.0;
    int max_output_tokens = 2048;
};

// State of one idle window's drafting. The posterior snapshot is frozen for
// the session's lifetime; the pending trajectory includes the in-flight step
// (observation absent) so prompts can describe the action being executed.
struct DraftingSession {
    int step_index = 0;
    StrategyPosterior posterior_snapshot;
    DraftBuffer buffer{kDefaultDraftCap};
    std::optional<Draft> cancelled_partial;
    std::vector<std::pair<int64_t, int64_t>> busy_intervals_ms;
    TrajectoryState pending_trajectory;
    int next_iteration = 0;
};

// Notifications for trace emission; any callback may be left empty.
struct DraftingObserver {
    std::function<void(int64_t t_ms, DraftStrategy strategy, int iteration,
                       const StrategyPosterior& snapshot, const PreferenceSample& sample)>
        on_start;
    std::function<void(const Draft& draft, int64_t t_start, int64_t t_end, int prompt_tokens)>
        on_complete;
    std::function<void(const Draft& partial, int64_t t_start, int64_t t_end)> on_cancelled;
};

std::string render_trajectory(const TrajectoryState& state);

// Composite prompt for the next reasoning step without drafts: task, past
// steps, accumulated context notes, and the action-format instruction.
std::string vanilla_next_step_prompt(const Task& task, const TrajectoryState& trajectory,
                                     const std::vector<std::string>& context_notes);

// Verbatim drafting template for the strategy, with all prior draft contents
// in insertion order and the pending trajectory substituted.
std::string build_draft_prompt(DraftStrategy strategy, const DraftBuffer& history,
                               const TrajectoryState& trajectory);

// With a non-empty buffer: the vanilla prompt plus the aggregation template
// enumerating "Plan 1:" ... "Plan N:" in buffer order. With an empty buffer
// the vanilla prompt passes through unmodified.
std::string build_aggregation_prompt(const DraftBuffer& buffer, const Observation& observation,
                                     const Task& task, const TrajectoryState& trajectory,
                                     const std::vector<std::string>& context_notes);

std::string build_forecast_prompt(const Task& task, const TrajectoryState& trajectory,
                                  const Observation& observation);

// Case-insensitive detection of the forecast decision. Outputs naming
// neither strategy (or both ambiguously) yield nullopt and no posterior
// update happens for the step.
std::optional<ForecastSignal> parse_forecast(std::string_view model_output);

// The idle-window loop: repeatedly sample a strategy from the frozen
// posterior, build a prompt conditioned on the accumulated buffer, and run
// one generation at a time. Returns as soon as the observation signal fires
// (recording the in-flight generation as a cancelled partial) or once the
// buffer cap stops further generations. Drafting is strictly sequential:
// every prompt conditions on all prior drafts.
void run_idle_drafting(DraftingSession& session, ModelClient& model,
                       const AbortSignal& observation_arrival, Rng& bandit_rng, Clock& clock,
                       const DraftingConfig& cfg, const DraftingObserver& observer = {});

// Completed drafts in insertion order; the cancelled partial is excluded.
DraftBuffer finalize_drafts(const DraftingSession& session);

}  // namespace specplan
