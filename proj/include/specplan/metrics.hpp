#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "specplan/core_types.hpp"
#include "specplan/trace.hpp"

namespace specplan {

enum class IdleBin { High, Medium, Low };

std::string to_string(IdleBin b);

// Everything quantitative the runtime reports per task, computable online
// or from a replayed trace with identical results.
struct TaskMetrics {
    std::string task_id;
    double itu = 0.0;
    double ultra_short_ratio = 0.0;
    IdleBin bin = IdleBin::Medium;
    int64_t tokens_idle = 0;
    int64_t tokens_test = 0;
    int64_t wall_ms = 0;
    int64_t reasoning_ms = 0;
    int64_t idle_ms = 0;
    int steps = 0;
    std::optional<bool> success;  // set when a final answer was judged

    bool operator==(const TaskMetrics&) const = default;
};

// Sum of model-busy time over sum of idle time; 0 when no idle time exists.
double compute_itu(const std::vector<IdleWindow>& windows);

// Fraction of tool calls shorter than one reasoning step; 0 for no calls.
double compute_ultra_short_ratio(const std::vector<int64_t>& tool_durations_ms,
                                 int64_t reasoning_step_ms);

// > 0.75 is High (least idle time), < 0.25 is Low (most idle time); the
// boundaries belong to Medium.
IdleBin bin_ultra_short(double ratio);

// (idle, test): idle sums DRAFT-kind completion tokens including cancelled
// partial estimates; test sums MAIN + FORECAST + AGGREGATE-kind tokens.
std::pair<int64_t, int64_t> compute_token_split(const std::vector<TraceEvent>& task_events);

// Full derivation of one task's metrics from its trace events. The
// ultra-short threshold is the task's mean step-reasoning duration.
TaskMetrics compute_task_metrics(const std::vector<TraceEvent>& task_events);

// Groups a trace by task id (preserving first-seen order) and derives
// metrics for each task.
std::vector<TaskMetrics> compute_metrics(const std::vector<TraceEvent>& events);

// Idle windows reconstructed from trace events, for invariant re-checks.
std::vector<IdleWindow> windows_from_trace(const std::vector<TraceEvent>& task_events);

struct BinSummary {
    int n = 0;
    double mean_itu = 0.0;
    double mean_wall_ms = 0.0;
};

struct RunSummary {
    int n = 0;
    double mean_itu = 0.0;
    double mean_ultra_short = 0.0;
    double mean_wall_ms = 0.0;
    double mean_reasoning_ms = 0.0;
    double mean_idle_ms = 0.0;
    double mean_steps = 0.0;
    double mean_tokens_idle = 0.0;
    double mean_tokens_test = 0.0;
    double success_rate = 0.0;  // over tasks with a judged answer
    std::map<IdleBin, BinSummary> per_bin;
};

RunSummary aggregate_run(const std::vector<TaskMetrics>& metrics);

}  // namespace specplan
