#include "specplan/speculation.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace specplan {

namespace {

std::string render_tool_call(const ToolCall& call) {
    std::string out = call.tool_name + "{";
    bool first = true;
    for (const auto& [k, v] : call.arguments) {
        if (!first) out += ";";
        out += k + "=" + v;
        first = false;
    }
    out += "}";
    return out;
}

std::string plan_history_text(const DraftBuffer& history) {
    std::string out;
    bool first = true;
    for (const auto& d : history.drafts()) {
        if (!first) out += ", ";
        out += d.content;
        first = false;
    }
    return out;
}

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

std::string render_trajectory(const TrajectoryState& state) {
    std::ostringstream os;
    os << "Task id: " << state.task_id << "\n";
    if (state.steps.empty()) {
        os << "(no steps yet)\n";
        return os.str();
    }
    for (const auto& step : state.steps) {
        os << "Step " << step.index << ":\n";
        if (!step.thought.empty()) os << "  thought: " << step.thought << "\n";
        os << "  action: " << render_tool_call(step.action) << "\n";
        if (step.observation) {
            os << "  observation[" << (step.observation->success ? "ok" : "error")
               << "]: " << step.observation->content << "\n";
        } else {
            os << "  observation: (pending)\n";
        }
    }
    return os.str();
}

std::string vanilla_next_step_prompt(const Task& task, const TrajectoryState& trajectory,
                                     const std::vector<std::string>& context_notes) {
    std::ostringstream os;
    os << "Task: " << task.prompt << "\n\n";
    os << "Steps so far:\n" << render_trajectory(trajectory);
    if (!context_notes.empty()) {
        os << "\nNotes:\n";
        for (const auto& note : context_notes) os << "- " << note << "\n";
    }
    os << "\nDecide the next action. Reply with one line of the form\n"
          "action: tool_name{key=value;key=value}\n"
          "and use action: final_answer{answer=...} when the task is solved.\n";
    return os.str();
}

std::string build_draft_prompt(DraftStrategy strategy, const DraftBuffer& history,
                               const TrajectoryState& trajectory) {
    const PromptTemplate& tpl = prompt_template(strategy == DraftStrategy::Progressive
                                                    ? TemplateName::Progressive
                                                    : TemplateName::Recovery);
    return render_template(tpl, {{"plan_history", plan_history_text(history)},
                                 {"trajectory", render_trajectory(trajectory)}});
}

std::string build_aggregation_prompt(const DraftBuffer& buffer, const Observation& observation,
                                     const Task& task, const TrajectoryState& trajectory,
                                     const std::vector<std::string>& context_notes) {
    std::string vanilla = vanilla_next_step_prompt(task, trajectory, context_notes);
    if (buffer.empty()) return vanilla;

    std::string candidates;
    int n = 1;
    for (const auto& d : buffer.drafts()) {
        if (n > 1) candidates += "\n";
        candidates += "Plan " + std::to_string(n) + ": " + d.content;
        ++n;
    }
    (void)observation;  // the observation is already the trajectory's last entry
    const PromptTemplate& tpl = prompt_template(TemplateName::Aggregation);
    return vanilla + "\n" + render_template(tpl, {{"candidates", candidates}});
}

std::string build_forecast_prompt(const Task& task, const TrajectoryState& trajectory,
                                  const Observation& observation) {
    const PromptTemplate& tpl = prompt_template(TemplateName::Forecast);
    return render_template(tpl, {{"task", task.prompt},
                                 {"trajectory", render_trajectory(trajectory)},
                                 {"observation", observation.content}});
}

std::optional<ForecastSignal> parse_forecast(std::string_view model_output) {
    std::string lower = lowercase(model_output);

    // Prefer an explicit decision line; fall back to whichever label appears.
    size_t decision = lower.rfind("decision:");
    std::string_view scope = lower;
    if (decision != std::string::npos) scope = std::string_view(lower).substr(decision);

    bool prog = scope.find("progressive") != std::string_view::npos;
    bool rec = scope.find("recovery") != std::string_view::npos;
    if (prog == rec) {
        // Ambiguous or absent within the decision scope; retry on the whole
        // output only if no decision line existed.
        if (decision != std::string::npos) return std::nullopt;
        prog = lower.find("progressive") != std::string::npos;
        rec = lower.find("recovery") != std::string::npos;
        if (prog == rec) return std::nullopt;
    }
    return prog ? DraftStrategy::Progressive : DraftStrategy::Recovery;
}

void run_idle_drafting(DraftingSession& session, ModelClient& model,
                       const AbortSignal& observation_arrival, Rng& bandit_rng, Clock& clock,
                       const DraftingConfig& cfg, const DraftingObserver& observer) {
    int window_failures = 0;

    auto arrived = [&] {
        if (observation_arrival.fired()) return true;
        auto deadline = observation_arrival.deadline_ms();
        return deadline && clock.now_ms() >= *deadline;
    };

    while (true) {
        if (arrived()) return;
        if (session.buffer.full()) return;
        if (window_failures >= cfg.max_failures_per_window) return;

        PreferenceSample sample = sample_preference(session.posterior_snapshot, bandit_rng);
        DraftStrategy strategy = select_strategy(sample);
        const int iteration = session.next_iteration++;

        std::string prompt = build_draft_prompt(strategy, session.buffer, session.pending_trajectory);
        GenerationRequest req;
        req.messages = {{Role::User, prompt}};
        req.temperature = cfg.temperature;
        req.top_p = cfg.top_p;
        req.max_output_tokens = cfg.max_output_tokens;
        req.call_kind = CallKind::Draft;

        const int64_t t_start = clock.now_ms();
        if (observer.on_start)
            observer.on_start(t_start, strategy, iteration, session.posterior_snapshot, sample);

        GenerationResult result;
        bool generated = false;
        int64_t attempt_start = t_start;
        for (int attempt = 0; attempt <= cfg.retries_per_iteration; ++attempt) {
            attempt_start = clock.now_ms();
            try {
                result = model.generate(req, observation_arrival);
                generated = true;
                break;
            } catch (const ModelError&) {
                ++window_failures;
                if (clock.now_ms() > attempt_start)
                    session.busy_intervals_ms.emplace_back(attempt_start, clock.now_ms());
                if (arrived()) return;
                if (window_failures >= cfg.max_failures_per_window) break;
            }
        }
        if (!generated) continue;

        const int64_t t_end = clock.now_ms();
        if (t_end > attempt_start) session.busy_intervals_ms.emplace_back(attempt_start, t_end);

        if (result.aborted) {
            Draft partial;
            partial.strategy = strategy;
            partial.iteration = iteration;
            partial.status = DraftStatus::Cancelled;
            partial.token_count = result.completion_tokens;
            partial.step_index = session.step_index;
            session.cancelled_partial = partial;
            if (observer.on_cancelled) observer.on_cancelled(partial, t_start, t_end);
            return;
        }

        Draft draft;
        draft.strategy = strategy;
        draft.content = result.content;
        draft.iteration = iteration;
        draft.status = DraftStatus::Complete;
        draft.token_count = result.completion_tokens;
        draft.step_index = session.step_index;
        session.buffer.push(draft);
        if (observer.on_complete)
            observer.on_complete(draft, t_start, t_end, result.prompt_tokens);
    }
}

DraftBuffer finalize_drafts(const DraftingSession& session) {
    DraftBuffer out(session.buffer.cap());
    for (const auto& d : session.buffer.drafts()) out.push(d);
    return out;
}

}  // namespace specplan
