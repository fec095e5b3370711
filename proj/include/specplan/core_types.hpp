#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace specplan {

// Default cap on candidate plans retained per idle window.
inline constexpr int kDefaultDraftCap = 5;

enum class DraftStrategy { Progressive, Recovery };
enum class DraftStatus { Complete, Cancelled };

std::string to_string(DraftStrategy s);  // "PROG" / "REC"
std::string to_string(DraftStatus s);    // "COMPLETE" / "CANCELLED"
std::optional<DraftStrategy> draft_strategy_from_string(std::string_view s);

struct Task {
    std::string id;
    std::string prompt;
    std::optional<std::string> gold_answer;
    std::map<std::string, std::string> metadata;
};

struct ToolCall {
    std::string tool_name;
    std::map<std::string, std::string> arguments;
    std::string call_id;
};

struct Observation {
    std::string call_id;
    std::string content;
    int64_t arrived_at_ms = 0;
    bool success = true;
};

// One speculative plan candidate produced during an idle window.
struct Draft {
    DraftStrategy strategy = DraftStrategy::Progressive;
    std::string content;
    int iteration = 0;  // unique within one (step, idle window)
    DraftStatus status = DraftStatus::Complete;
    int token_count = 0;
    int step_index = 0;
};

// Ordered, capped collection of completed drafts from one idle window.
// Insertion order doubles as the plan-history and plan-numbering order.
// Cancelled drafts are never admitted; they are trace/metrics data only.
class DraftBuffer {
public:
    explicit DraftBuffer(int cap = kDefaultDraftCap);

    // Returns false (and leaves the buffer unchanged) for cancelled drafts
    // and for inserts beyond the cap.
    bool push(Draft d);

    const std::vector<Draft>& drafts() const { return drafts_; }
    int cap() const { return cap_; }
    bool empty() const { return drafts_.empty(); }
    size_t size() const { return drafts_.size(); }
    bool full() const { return static_cast<int>(drafts_.size()) >= cap_; }
    void clear() { drafts_.clear(); }

private:
    std::vector<Draft> drafts_;
    int cap_;
};

struct StepTiming {
    int64_t reason_start_ms = 0;
    int64_t reason_end_ms = 0;
    int64_t tool_start_ms = 0;
    int64_t tool_end_ms = 0;
    // Serialized post-observation model time charged to this step
    // (forecast for the speculative policy, revision/planning for those
    // baselines; zero otherwise).
    int64_t aggregation_duration_ms = 0;
};

struct TrajectoryStep {
    int index = 0;
    std::string thought;
    ToolCall action;
    std::optional<Observation> observation;  // absent only while in flight
    std::vector<Draft> drafts_offered;       // plans shown to this step's reasoning call
    StepTiming timing;
};

struct TrajectoryState {
    std::string task_id;
    std::vector<TrajectoryStep> steps;
    bool finished = false;
    std::optional<std::string> final_answer;
};

// Per-tool-call timing record feeding idle-time utilization: the idle
// interval and the sub-intervals during which the model was computing.
struct IdleWindow {
    int step_index = 0;
    int64_t start_ms = 0;
    int64_t idle_duration_ms = 0;
    std::vector<std::pair<int64_t, int64_t>> busy_intervals_ms;

    int64_t end_ms() const { return start_ms + idle_duration_ms; }
    int64_t busy_total_ms() const;
};

// Invariant checks. Violations are data, not failures: an empty list means
// the value is well formed. The draft-list form exists for data that did not
// come through DraftBuffer (offered drafts, deserialized records).
std::vector<std::string> validate_trajectory(const TrajectoryState& state,
                                             int draft_cap = kDefaultDraftCap);
std::vector<std::string> validate_draft_list(const std::vector<Draft>& drafts,
                                             int cap = kDefaultDraftCap);
std::vector<std::string> validate_idle_window(const IdleWindow& window);

}  // namespace specplan
