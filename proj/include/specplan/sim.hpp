#pragma once

#include <optional>
#include <string>
#include <vector>

#include "specplan/metrics.hpp"
#include "specplan/orchestrator.hpp"

namespace specplan {

// Synthetic task families at desk scale. KeyChase is a linear chain of
// lookups (actions never depend on drafts); DeadEnd forces wrong-branch
// probes whose recovery drafts can short-circuit the search.
enum class SyntheticFamily { KeyChase, DeadEnd };

std::string to_string(SyntheticFamily f);
std::optional<SyntheticFamily> family_from_string(std::string_view s);

struct SyntheticTaskSpec {
    SyntheticFamily family = SyntheticFamily::KeyChase;
    int chain_length = 3;  // lookups (KeyChase) or stages (DeadEnd)
    int branches = 4;      // DeadEnd branch fan-out; exactly one is correct
    std::vector<std::string> chain_keys;
    std::vector<int> correct_branches;
    std::string gold_answer;
    std::string task_id;

    static SyntheticTaskSpec make(SyntheticFamily family, int chain_length, int branches,
                                  const std::string& task_id, Rng& scenario_rng);
    Task to_task() const;
};

// Registers the family's tools plus final_answer, all drawing latencies from
// the given model.
ToolRegistry make_tool_registry(const SyntheticTaskSpec& spec, const LatencyModel& tool_latency,
                                const LatencyModel& final_answer_latency);

// Per-call-kind latencies for the scripted agent model.
struct SimModelTimings {
    int64_t main_ms = 2000;
    int64_t draft_ms = 2000;
    int64_t forecast_ms = 100;
    int64_t sleeptime_ms = 2000;
};

// Deterministic stand-in for a live model: parses the rendered prompts the
// runtime actually produces and plays a fixed policy over them. The one
// injected link between drafts and outcomes is the DeadEnd rule: a recovery
// plan naming the stage's correct branch makes the next probe jump straight
// to it. That rule is synthetic instrumentation, not a claim about models.
class ScriptedAgentModel final : public SimModelBase {
public:
    ScriptedAgentModel(Clock& clock, SimModelTimings timings)
        : SimModelBase(clock), timings_(timings) {}

protected:
    ScriptedResponse respond(const GenerationRequest& req) override;

private:
    SimModelTimings timings_;
};

struct ScenarioConfig {
    RunConfig run;
    SyntheticFamily family = SyntheticFamily::KeyChase;
    int n_tasks = 10;
    int chain_length = 3;
    int branches = 4;
    uint64_t base_seed = 0;
    SimModelTimings timings;
    LatencyModel tool_latency = LatencyModel::constant(8000);
    std::optional<LatencyModel> final_answer_latency;  // defaults to tool_latency
};

struct ScenarioResult {
    std::vector<TraceEvent> events;
    std::vector<TaskMetrics> metrics;  // computed online, one per task
    std::vector<TaskRunResult> runs;
    std::vector<Task> tasks;
};

// Runs n_tasks synthetic tasks under one policy. Each task gets a fresh
// virtual clock and isolated rng streams named "scenario", "latency" and
// "bandit", so reseeding one concern never perturbs the others.
ScenarioResult run_scenario(const ScenarioConfig& cfg, TraceSink* extra_sink = nullptr);

// Lognormal parameterization whose probability of drawing below the
// reasoning step matches the target ultra-short ratio; log_sd sets the tail
// weight. Targets outside (0, 1) are infeasible for a full-support
// distribution and throw.
LatencyModel calibrate_latency_profile(double target_ultra_short, int64_t reasoning_step_ms,
                                       double log_sd = 1.5);

// Benchmark-shaped presets.
LatencyModel search_like_profile(int64_t reasoning_step_ms);    // lognormal, median ~4x step
LatencyModel parser_like_profile(int64_t reasoning_step_ms);    // constant, sub-step
LatencyModel training_like_profile(int64_t reasoning_step_ms);  // constant, ~100x step

}  // namespace specplan
