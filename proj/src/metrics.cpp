#include "specplan/metrics.hpp"

#include <algorithm>

namespace specplan {

std::string to_string(IdleBin b) {
    switch (b) {
        case IdleBin::High: return "HIGH";
        case IdleBin::Medium: return "MEDIUM";
        case IdleBin::Low: return "LOW";
    }
    return "MEDIUM";
}

double compute_itu(const std::vector<IdleWindow>& windows) {
    int64_t idle = 0;
    int64_t busy = 0;
    for (const auto& w : windows) {
        idle += w.idle_duration_ms;
        busy += w.busy_total_ms();
    }
    if (idle <= 0) return 0.0;
    return static_cast<double>(busy) / static_cast<double>(idle);
}

double compute_ultra_short_ratio(const std::vector<int64_t>& tool_durations_ms,
                                 int64_t reasoning_step_ms) {
    if (tool_durations_ms.empty() || reasoning_step_ms <= 0) return 0.0;
    int64_t count = 0;
    for (int64_t d : tool_durations_ms) {
        if (d < reasoning_step_ms) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(tool_durations_ms.size());
}

IdleBin bin_ultra_short(double ratio) {
    if (ratio > 0.75) return IdleBin::High;
    if (ratio < 0.25) return IdleBin::Low;
    return IdleBin::Medium;
}

std::pair<int64_t, int64_t> compute_token_split(const std::vector<TraceEvent>& task_events) {
    int64_t idle = 0;
    int64_t test = 0;
    for (const auto& ev : task_events) {
        switch (ev.kind) {
            case TraceEventKind::DraftComplete:
            case TraceEventKind::DraftCancelled:
                idle += ev.payload.value("completion_tokens", 0);
                break;
            case TraceEventKind::MainGen:
            case TraceEventKind::Forecast:
                test += ev.payload.value("completion_tokens", 0);
                break;
            default:
                break;
        }
    }
    return {idle, test};
}

std::vector<IdleWindow> windows_from_trace(const std::vector<TraceEvent>& task_events) {
    // Each step has at most one tool execution, so windows key off the step.
    // Draft completions may land after TOOL_COMPLETE (a sleep-time generation
    // overrunning its window), which is why assembly is a second pass.
    std::map<int, IdleWindow> by_step;
    std::map<int, std::map<int, int64_t>> draft_starts;  // step -> iteration -> t
    std::map<int, std::vector<std::pair<int64_t, int64_t>>> busy;
    std::vector<int> order;

    for (const auto& ev : task_events) {
        switch (ev.kind) {
            case TraceEventKind::ToolStart: {
                IdleWindow w;
                w.step_index = ev.step;
                w.start_ms = ev.t_ms;
                by_step[ev.step] = w;
                order.push_back(ev.step);
                break;
            }
            case TraceEventKind::ToolComplete:
                if (auto it = by_step.find(ev.step); it != by_step.end())
                    it->second.idle_duration_ms = ev.payload.value("duration_ms", int64_t{0});
                break;
            case TraceEventKind::DraftStart:
                draft_starts[ev.step][ev.payload.value("iteration", 0)] = ev.t_ms;
                break;
            case TraceEventKind::DraftComplete:
            case TraceEventKind::DraftCancelled: {
                auto sit = draft_starts[ev.step].find(ev.payload.value("iteration", 0));
                if (sit == draft_starts[ev.step].end()) break;
                int64_t duration = ev.payload.value("duration_ms", int64_t{0});
                int64_t t0 = sit->second;
                // Retries share an iteration; keep the final attempt's span.
                if (duration > 0 && ev.t_ms - duration >= t0) t0 = ev.t_ms - duration;
                busy[ev.step].emplace_back(t0, ev.t_ms);
                break;
            }
            default:
                break;
        }
    }

    std::vector<IdleWindow> windows;
    windows.reserve(order.size());
    for (int step : order) {
        IdleWindow w = by_step[step];
        for (auto [s, e] : busy[step]) {
            int64_t cs = std::max(s, w.start_ms);
            int64_t ce = std::min(e, w.end_ms());
            if (ce > cs) w.busy_intervals_ms.emplace_back(cs, ce);
        }
        windows.push_back(std::move(w));
    }
    return windows;
}

TaskMetrics compute_task_metrics(const std::vector<TraceEvent>& task_events) {
    TaskMetrics m;
    if (task_events.empty()) return m;
    m.task_id = task_events.front().task_id;

    int64_t t_min = task_events.front().t_ms;
    int64_t t_max = task_events.front().t_ms;
    std::vector<int64_t> tool_durations;
    int64_t step_gen_total = 0;
    int step_gen_count = 0;

    for (const auto& ev : task_events) {
        t_min = std::min(t_min, ev.t_ms);
        t_max = std::max(t_max, ev.t_ms);
        switch (ev.kind) {
            case TraceEventKind::StepStart:
                ++m.steps;
                break;
            case TraceEventKind::MainGen: {
                m.reasoning_ms += ev.payload.value("duration_ms", int64_t{0});
                if (ev.payload.value("role", "") == "step") {
                    step_gen_total += ev.payload.value("duration_ms", int64_t{0});
                    ++step_gen_count;
                }
                break;
            }
            case TraceEventKind::Forecast:
                m.reasoning_ms += ev.payload.value("duration_ms", int64_t{0});
                break;
            case TraceEventKind::ToolComplete: {
                int64_t d = ev.payload.value("duration_ms", int64_t{0});
                tool_durations.push_back(d);
                m.idle_ms += d;
                break;
            }
            case TraceEventKind::FinalAnswer:
                if (ev.payload.contains("matches_gold"))
                    m.success = ev.payload["matches_gold"].get<bool>();
                break;
            default:
                break;
        }
    }

    m.wall_ms = t_max - t_min;
    m.itu = compute_itu(windows_from_trace(task_events));
    auto [idle_tokens, test_tokens] = compute_token_split(task_events);
    m.tokens_idle = idle_tokens;
    m.tokens_test = test_tokens;

    int64_t reasoning_step_ms = step_gen_count > 0 ? step_gen_total / step_gen_count : 0;
    m.ultra_short_ratio = compute_ultra_short_ratio(tool_durations, reasoning_step_ms);
    m.bin = bin_ultra_short(m.ultra_short_ratio);
    return m;
}

std::vector<TaskMetrics> compute_metrics(const std::vector<TraceEvent>& events) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<TraceEvent>> by_task;
    for (const auto& ev : events) {
        auto [it, inserted] = by_task.try_emplace(ev.task_id);
        if (inserted) order.push_back(ev.task_id);
        it->second.push_back(ev);
    }
    std::vector<TaskMetrics> out;
    out.reserve(order.size());
    for (const auto& id : order) out.push_back(compute_task_metrics(by_task[id]));
    return out;
}

RunSummary aggregate_run(const std::vector<TaskMetrics>& metrics) {
    RunSummary s;
    if (metrics.empty()) return s;
    s.n = static_cast<int>(metrics.size());

    std::map<IdleBin, std::pair<double, double>> bin_acc;  // bin -> (itu sum, wall sum)
    std::map<IdleBin, int> bin_n;
    int judged = 0;
    int succeeded = 0;

    for (const auto& m : metrics) {
        s.mean_itu += m.itu;
        s.mean_ultra_short += m.ultra_short_ratio;
        s.mean_wall_ms += static_cast<double>(m.wall_ms);
        s.mean_reasoning_ms += static_cast<double>(m.reasoning_ms);
        s.mean_idle_ms += static_cast<double>(m.idle_ms);
        s.mean_steps += m.steps;
        s.mean_tokens_idle += static_cast<double>(m.tokens_idle);
        s.mean_tokens_test += static_cast<double>(m.tokens_test);
        bin_acc[m.bin].first += m.itu;
        bin_acc[m.bin].second += static_cast<double>(m.wall_ms);
        bin_n[m.bin] += 1;
        if (m.success.has_value()) {
            ++judged;
            if (*m.success) ++succeeded;
        }
    }

    const double n = static_cast<double>(s.n);
    s.mean_itu /= n;
    s.mean_ultra_short /= n;
    s.mean_wall_ms /= n;
    s.mean_reasoning_ms /= n;
    s.mean_idle_ms /= n;
    s.mean_steps /= n;
    s.mean_tokens_idle /= n;
    s.mean_tokens_test /= n;
    s.success_rate = judged > 0 ? static_cast<double>(succeeded) / judged : 0.0;

    for (const auto& [bin, acc] : bin_acc) {
        BinSummary b;
        b.n = bin_n[bin];
        b.mean_itu = acc.first / b.n;
        b.mean_wall_ms = acc.second / b.n;
        s.per_bin[bin] = b;
    }
    return s;
}

}  // namespace specplan
