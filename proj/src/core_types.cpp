#include "specplan/core_types.hpp"

#include <algorithm>

namespace specplan {

std::string to_string(DraftStrategy s) {
    return s == DraftStrategy::Progressive ? "PROG" : "REC";
}

std::string to_string(DraftStatus s) {
    return s == DraftStatus::Complete ? "COMPLETE" : "CANCELLED";
}

std::optional<DraftStrategy> draft_strategy_from_string(std::string_view s) {
    if (s == "PROG") return DraftStrategy::Progressive;
    if (s == "REC") return DraftStrategy::Recovery;
    return std::nullopt;
}

DraftBuffer::DraftBuffer(int cap) : cap_(cap < 1 ? 1 : cap) {}

bool DraftBuffer::push(Draft d) {
    if (d.status != DraftStatus::Complete) return false;
    if (full()) return false;
    drafts_.push_back(std::move(d));
    return true;
}

int64_t IdleWindow::busy_total_ms() const {
    int64_t total = 0;
    for (const auto& [s, e] : busy_intervals_ms) total += e - s;
    return total;
}

std::vector<std::string> validate_idle_window(const IdleWindow& w) {
    std::vector<std::string> out;
    if (w.idle_duration_ms < 0) out.push_back("idle_duration negative");
    auto intervals = w.busy_intervals_ms;
    std::sort(intervals.begin(), intervals.end());
    int64_t prev_end = w.start_ms;
    for (const auto& [s, e] : intervals) {
        if (e < s) out.push_back("busy interval reversed");
        if (s < w.start_ms || e > w.end_ms()) out.push_back("busy interval outside idle window");
        if (s < prev_end) out.push_back("busy intervals overlap");
        prev_end = std::max(prev_end, e);
    }
    if (w.busy_total_ms() > w.idle_duration_ms) out.push_back("busy total exceeds idle duration");
    return out;
}

std::vector<std::string> validate_draft_list(const std::vector<Draft>& drafts, int cap) {
    std::vector<std::string> out;
    if (static_cast<int>(drafts.size()) > cap) out.push_back("DraftBuffer over cap");
    for (const auto& d : drafts) {
        if (d.status != DraftStatus::Complete) out.push_back("non-complete draft in buffer");
        if (d.token_count < 0) out.push_back("negative token count");
    }
    return out;
}

std::vector<std::string> validate_trajectory(const TrajectoryState& state, int draft_cap) {
    std::vector<std::string> out;
    if (state.task_id.empty()) out.push_back("empty task_id");

    const size_t n = state.steps.size();
    for (size_t i = 0; i < n; ++i) {
        const TrajectoryStep& step = state.steps[i];
        if (step.index != static_cast<int>(i))
            out.push_back("step index out of order at position " + std::to_string(i));

        const bool last = i + 1 == n;
        if (!step.observation.has_value() && !(last && !state.finished))
            out.push_back("step " + std::to_string(i) + " missing observation");
        if (step.observation && step.observation->call_id != step.action.call_id)
            out.push_back("step " + std::to_string(i) + " observation call_id mismatch");

        if (static_cast<int>(step.drafts_offered.size()) > draft_cap)
            out.push_back("step " + std::to_string(i) + " drafts_offered over cap");
        for (const auto& d : step.drafts_offered) {
            if (d.status != DraftStatus::Complete)
                out.push_back("step " + std::to_string(i) + " offered a non-complete draft");
        }

        const StepTiming& t = step.timing;
        bool ordered = t.reason_start_ms <= t.reason_end_ms &&
                       t.reason_end_ms <= t.tool_start_ms && t.tool_start_ms <= t.tool_end_ms;
        if (!ordered) out.push_back("step " + std::to_string(i) + " timing out of order");
        if (t.aggregation_duration_ms < 0)
            out.push_back("step " + std::to_string(i) + " negative aggregation duration");
    }

    if (state.finished && !state.final_answer.has_value())
        out.push_back("finished without final_answer");
    if (!state.finished && state.final_answer.has_value())
        out.push_back("final_answer present but not finished");
    return out;
}

}  // namespace specplan
