#include "specplan/orchestrator.hpp"

#include <algorithm>
#include <sstream>

namespace specplan {

namespace {

using nlohmann::json;

struct Emitter {
    TraceSink& sink;
    std::string task_id;
    uint64_t seq = 0;

    void emit(int64_t t, int step, TraceEventKind kind, json payload) {
        sink.emit(TraceEvent{t, task_id, step, seq++, kind, std::move(payload)});
    }
};

// Arrival signal for the drafting loop: a known virtual deadline in
// simulation, the tool timer's flag on the wall clock.
class ArrivalSignal final : public AbortSignal {
public:
    ArrivalSignal(const PendingTool& pending, const Clock& clock)
        : flag_(pending.arrival_flag), clock_(clock), arrival_(pending.arrival_ms()) {}

    bool fired() const override {
        if (flag_) return flag_->fired();
        return clock_.now_ms() >= arrival_;
    }
    std::optional<int64_t> deadline_ms() const override {
        if (flag_) return std::nullopt;
        return arrival_;
    }
    bool wait_for_ms(int64_t ms) const override {
        if (flag_) return flag_->wait_for_ms(ms);
        return fired();
    }

private:
    std::shared_ptr<FlagAbort> flag_;
    const Clock& clock_;
    int64_t arrival_;
};

std::string first_line_with_prefix(std::string_view text, std::string_view prefix) {
    size_t pos = 0;
    while (pos < text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        if (line.substr(0, prefix.size()) == prefix)
            return std::string(line.substr(prefix.size()));
        pos = eol + 1;
    }
    return {};
}

std::string trim(std::string s) {
    size_t b = s.find_first_not_of(" \t\r");
    size_t e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, e - b + 1);
}

json gen_payload(const GenerationResult& res, CallKind kind, const std::string& role,
                 bool log_full_text) {
    json payload{{"call_kind", to_string(kind)},
                 {"role", role},
                 {"duration_ms", res.duration_ms},
                 {"prompt_tokens", res.prompt_tokens},
                 {"completion_tokens", res.completion_tokens},
                 {"content_hash", content_hash_hex(res.content)}};
    if (log_full_text) payload["content_text"] = res.content;
    return payload;
}

struct StepOutcome {
    bool hard_failure = false;
    GenerationResult result;
    ToolCall action;
};

}  // namespace

std::string to_string(PolicyKind p) {
    switch (p) {
        case PolicyKind::IdleSpec: return "idlespec";
        case PolicyKind::Vanilla: return "vanilla";
        case PolicyKind::SeqRev: return "seqrev";
        case PolicyKind::SleepTime: return "sleeptime";
        case PolicyKind::Planning: return "planning";
    }
    return "vanilla";
}

std::optional<PolicyKind> policy_from_string(std::string_view s) {
    if (s == "idlespec") return PolicyKind::IdleSpec;
    if (s == "vanilla") return PolicyKind::Vanilla;
    if (s == "seqrev") return PolicyKind::SeqRev;
    if (s == "sleeptime") return PolicyKind::SleepTime;
    if (s == "planning") return PolicyKind::Planning;
    return std::nullopt;
}

const std::vector<std::string>& policy_names() {
    static const std::vector<std::string> names = {"idlespec", "vanilla", "seqrev", "sleeptime",
                                                   "planning"};
    return names;
}

std::optional<ToolCall> parse_action(std::string_view model_output, std::string call_id) {
    // Take the last action line so reasoning text above cannot shadow it.
    std::string line;
    size_t pos = 0;
    while (pos < model_output.size()) {
        size_t eol = model_output.find('\n', pos);
        if (eol == std::string_view::npos) eol = model_output.size();
        std::string_view candidate = model_output.substr(pos, eol - pos);
        if (candidate.substr(0, 7) == "action:") line = std::string(candidate.substr(7));
        pos = eol + 1;
    }
    line = trim(line);
    if (line.empty()) return std::nullopt;

    size_t brace = line.find('{');
    ToolCall call;
    call.call_id = std::move(call_id);
    if (brace == std::string::npos) {
        call.tool_name = trim(line);
        return call.tool_name.empty() ? std::nullopt : std::optional<ToolCall>(call);
    }
    call.tool_name = trim(line.substr(0, brace));
    if (call.tool_name.empty()) return std::nullopt;

    size_t close = line.rfind('}');
    if (close == std::string::npos || close < brace) return std::nullopt;
    std::string args = line.substr(brace + 1, close - brace - 1);

    size_t start = 0;
    while (start <= args.size() && !args.empty()) {
        size_t sep = args.find(';', start);
        if (sep == std::string::npos) sep = args.size();
        std::string pair = args.substr(start, sep - start);
        size_t eq = pair.find('=');
        if (eq != std::string::npos) {
            call.arguments[trim(pair.substr(0, eq))] = trim(pair.substr(eq + 1));
        }
        if (sep == args.size()) break;
        start = sep + 1;
    }
    return call;
}

TaskRunResult run_task(const Task& task, const RunConfig& cfg, ModelClient& model,
                       const ToolRegistry& tools, Clock& clock, Rng& bandit_rng, Rng& latency_rng,
                       TraceSink& sink, std::optional<StrategyPosterior> initial_posterior) {
    TaskRunResult out;
    out.trajectory.task_id = task.id;
    TrajectoryState& state = out.trajectory;

    StrategyPosterior posterior =
        initial_posterior.value_or(StrategyPosterior{cfg.prior_alpha, cfg.prior_beta});
    DraftBuffer buffer(cfg.k_cap);
    std::vector<std::string> notes;

    DraftingConfig drafting = cfg.drafting;
    drafting.cap = cfg.k_cap;
    drafting.temperature = cfg.temperature;
    drafting.top_p = cfg.top_p;
    drafting.max_output_tokens = cfg.max_output_tokens;

    Emitter trace{sink, task.id};
    const int64_t run_start = clock.now_ms();

    auto make_request = [&](std::string prompt, CallKind kind) {
        GenerationRequest req;
        req.messages = {{Role::User, std::move(prompt)}};
        req.temperature = cfg.temperature;
        req.top_p = cfg.top_p;
        req.max_output_tokens = cfg.max_output_tokens;
        req.call_kind = kind;
        return req;
    };

    // Serialized generation on the critical path, with bounded retries.
    auto generate_serialized = [&](const GenerationRequest& req,
                                   const std::string& role) -> std::optional<GenerationResult> {
        for (int attempt = 0; attempt <= cfg.main_retries; ++attempt) {
            try {
                GenerationResult res = model.generate(req);
                trace.emit(clock.now_ms(), static_cast<int>(state.steps.size()),
                           TraceEventKind::MainGen,
                           gen_payload(res, req.call_kind, role, cfg.log_full_text));
                return res;
            } catch (const ModelError&) {
                // retry, then give up
            }
        }
        return std::nullopt;
    };

    for (int step = 0; step < cfg.max_steps && !state.finished; ++step) {
        trace.emit(clock.now_ms(), step, TraceEventKind::StepStart, json::object());

        // --- reasoning generation, conditioned on finalized drafts ---
        std::vector<Draft> offered = buffer.drafts();
        const Observation* last_obs =
            state.steps.empty() ? nullptr : &state.steps.back().observation.value();

        std::string prompt;
        CallKind kind = CallKind::Main;
        if (cfg.policy == PolicyKind::IdleSpec && !buffer.empty() && last_obs != nullptr) {
            prompt = build_aggregation_prompt(buffer, *last_obs, task, state, notes);
            kind = CallKind::Aggregate;
            json plans = json::array();
            for (const auto& d : buffer.drafts()) plans.push_back(content_hash_hex(d.content));
            trace.emit(clock.now_ms(), step, TraceEventKind::Aggregate,
                       json{{"n_plans", buffer.size()}, {"plan_hashes", plans}});
        } else {
            prompt = vanilla_next_step_prompt(task, state, notes);
        }

        const int64_t reason_start = clock.now_ms();
        std::optional<GenerationResult> main_res = generate_serialized(make_request(prompt, kind), "step");
        std::optional<ToolCall> action;
        if (main_res) {
            action = parse_action(main_res->content, task.id + "-c" + std::to_string(step));
            if (!action) {
                // One fresh regeneration on an unparsable action.
                main_res = generate_serialized(make_request(prompt, kind), "step");
                if (main_res)
                    action = parse_action(main_res->content, task.id + "-c" + std::to_string(step));
            }
        }
        if (!main_res || !action) {
            state.finished = true;  // hard failure: finished without final_answer
            break;
        }
        const int64_t reason_end = clock.now_ms();

        buffer.clear();

        TrajectoryStep current;
        current.index = step;
        current.thought = trim(first_line_with_prefix(main_res->content, "thought:"));
        current.action = *action;
        current.drafts_offered = std::move(offered);
        current.timing.reason_start_ms = reason_start;
        current.timing.reason_end_ms = reason_end;

        // Pending view of the trajectory: the in-flight step has no
        // observation yet. Drafting and post-observation prompts see this.
        TrajectoryState pending = state;
        pending.steps.push_back(current);

        // --- tool execution, overlapped with the policy's idle-time work ---
        const int64_t tool_start = clock.now_ms();
        trace.emit(tool_start, step, TraceEventKind::ToolStart,
                   json{{"tool", action->tool_name}, {"call_id", action->call_id}});
        PendingTool pending_tool = tools.begin_execute(*action, clock, latency_rng);
        ArrivalSignal arrival(pending_tool, clock);

        IdleWindow window;
        window.step_index = step;
        window.start_ms = tool_start;
        window.idle_duration_ms = pending_tool.latency_ms;

        DraftingSession session;
        bool tool_complete_emitted = false;

        if (cfg.policy == PolicyKind::IdleSpec) {
            session.step_index = step;
            session.posterior_snapshot = posterior;
            session.buffer = DraftBuffer(cfg.k_cap);
            session.pending_trajectory = pending;

            DraftingObserver observer;
            observer.on_start = [&](int64_t t, DraftStrategy s, int iteration,
                                    const StrategyPosterior& snap, const PreferenceSample& sample) {
                trace.emit(t, step, TraceEventKind::DraftStart,
                           json{{"strategy", to_string(s)},
                                {"iteration", iteration},
                                {"alpha", snap.alpha},
                                {"beta", snap.beta},
                                {"p_hat", sample.p_hat}});
            };
            observer.on_complete = [&](const Draft& d, int64_t t0, int64_t t1, int prompt_tokens) {
                json payload{{"strategy", to_string(d.strategy)},
                             {"iteration", d.iteration},
                             {"duration_ms", t1 - t0},
                             {"prompt_tokens", prompt_tokens},
                             {"completion_tokens", d.token_count},
                             {"content_hash", content_hash_hex(d.content)}};
                if (cfg.log_full_text) payload["content_text"] = d.content;
                trace.emit(t1, step, TraceEventKind::DraftComplete, std::move(payload));
            };
            observer.on_cancelled = [&](const Draft& d, int64_t t0, int64_t t1) {
                trace.emit(t1, step, TraceEventKind::DraftCancelled,
                           json{{"strategy", to_string(d.strategy)},
                                {"iteration", d.iteration},
                                {"duration_ms", t1 - t0},
                                {"completion_tokens", d.token_count},
                                {"estimated", true}});
            };

            run_idle_drafting(session, model, arrival, bandit_rng, clock, drafting, observer);
            // Clamp to the window: on a wall clock the abort round trip can
            // let the last interval spill past the arrival by a few ms.
            for (auto [s, e] : session.busy_intervals_ms) {
                int64_t cs = std::max(s, window.start_ms);
                int64_t ce = std::min(e, window.end_ms());
                if (ce > cs) window.busy_intervals_ms.emplace_back(cs, ce);
            }
        } else if (cfg.policy == PolicyKind::SleepTime) {
            // One free-form pre-computation per idle window. It neither
            // iterates nor cancels; a late completion still lands in context.
            const PromptTemplate& tpl = prompt_template(TemplateName::SleepTime);
            std::string sleep_prompt = render_template(
                tpl, {{"task", task.prompt}, {"trajectory", render_trajectory(pending)}});
            GenerationRequest req = make_request(std::move(sleep_prompt), CallKind::Draft);
            const int64_t t0 = clock.now_ms();
            trace.emit(t0, step, TraceEventKind::DraftStart,
                       json{{"strategy", "SLEEPTIME"}, {"iteration", 0}});
            try {
                GenerationResult res = model.generate(req);
                const int64_t t1 = clock.now_ms();
                const int64_t arrival_t = pending_tool.arrival_ms();
                json payload{{"strategy", "SLEEPTIME"},
                             {"iteration", 0},
                             {"duration_ms", res.duration_ms},
                             {"prompt_tokens", res.prompt_tokens},
                             {"completion_tokens", res.completion_tokens},
                             {"content_hash", content_hash_hex(res.content)}};
                if (cfg.log_full_text) payload["content_text"] = res.content;
                if (t1 > arrival_t && clock.is_virtual()) {
                    // Overran the window: the tool completed mid-generation.
                    trace.emit(arrival_t, step, TraceEventKind::ToolComplete,
                               json{{"call_id", pending_tool.observation.call_id},
                                    {"duration_ms", pending_tool.latency_ms},
                                    {"success", pending_tool.observation.success},
                                    {"content_hash",
                                     content_hash_hex(pending_tool.observation.content)}});
                    tool_complete_emitted = true;
                }
                trace.emit(t1, step, TraceEventKind::DraftComplete, std::move(payload));
                int64_t busy_end = std::min(t1, pending_tool.arrival_ms());
                if (busy_end > t0) window.busy_intervals_ms.emplace_back(t0, busy_end);
                notes.push_back("pre-computation: " + res.content);
            } catch (const ModelError&) {
                // A failed pre-computation contributes nothing.
            }
        }

        Observation obs = ToolRegistry::await(pending_tool, clock);
        if (!tool_complete_emitted) {
            trace.emit(std::max(pending_tool.arrival_ms(),
                                clock.is_virtual() ? int64_t{0} : clock.now_ms()),
                       step, TraceEventKind::ToolComplete,
                       json{{"call_id", obs.call_id},
                            {"duration_ms", pending_tool.latency_ms},
                            {"success", obs.success},
                            {"content_hash", content_hash_hex(obs.content)}});
        }
        out.windows.push_back(window);

        // --- post-observation phase ---
        int64_t post_duration = 0;
        if (cfg.policy == PolicyKind::IdleSpec) {
            buffer = finalize_drafts(session);

            std::string fprompt = build_forecast_prompt(task, pending, obs);
            std::optional<GenerationResult> fres;
            try {
                GenerationResult res = model.generate(make_request(std::move(fprompt), CallKind::Forecast));
                fres = res;
            } catch (const ModelError&) {
                // Forecast failure: skip the posterior update for this step.
            }
            if (fres) {
                post_duration += fres->duration_ms;
                std::optional<ForecastSignal> signal = parse_forecast(fres->content);
                json payload{{"duration_ms", fres->duration_ms},
                             {"prompt_tokens", fres->prompt_tokens},
                             {"completion_tokens", fres->completion_tokens},
                             {"parsed", signal.has_value()}};
                if (signal) payload["signal"] = to_string(*signal);
                trace.emit(clock.now_ms(), step, TraceEventKind::Forecast, std::move(payload));
                if (signal) {
                    posterior = update_posterior(posterior, *signal);
                    trace.emit(clock.now_ms(), step, TraceEventKind::PosteriorUpdate,
                               json{{"alpha", posterior.alpha},
                                    {"beta", posterior.beta},
                                    {"signal", to_string(*signal)}});
                }
            }
        } else if (cfg.policy == PolicyKind::SeqRev) {
            const PromptTemplate& tpl = prompt_template(TemplateName::SeqRev);
            std::string rprompt = render_template(tpl, {{"task", task.prompt},
                                                        {"trajectory", render_trajectory(pending)},
                                                        {"observation", obs.content}});
            if (auto res = generate_serialized(make_request(std::move(rprompt), CallKind::Main),
                                               "revision")) {
                post_duration += res->duration_ms;
                notes.push_back("revision: " + res->content);
            }
        } else if (cfg.policy == PolicyKind::Planning) {
            std::ostringstream pp;
            pp << "Generate an updated plan for the next step.\n\nTask: " << task.prompt
               << "\n\nTrajectory so far:\n"
               << render_trajectory(pending) << "\nLatest observation:\n"
               << obs.content << "\n";
            if (auto res = generate_serialized(make_request(pp.str(), CallKind::Main),
                                               "planning")) {
                post_duration += res->duration_ms;
                notes.push_back("plan: " + res->content);
            }
        }

        // --- append (action, observation) to the trajectory ---
        current.observation = obs;
        current.timing.tool_start_ms = tool_start;
        current.timing.tool_end_ms = pending_tool.arrival_ms();
        current.timing.aggregation_duration_ms = post_duration;
        state.steps.push_back(current);

        if (action->tool_name == "final_answer" && obs.success) {
            state.finished = true;
            auto it = action->arguments.find("answer");
            std::string answer = it != action->arguments.end() ? it->second : obs.content;
            state.final_answer = answer;
            json payload{{"answer_hash", content_hash_hex(answer)}};
            if (cfg.log_full_text) payload["answer_text"] = answer;
            if (task.gold_answer) {
                out.success = answer == *task.gold_answer;
                payload["matches_gold"] = out.success;
            } else {
                out.success = true;
            }
            trace.emit(clock.now_ms(), step, TraceEventKind::FinalAnswer, std::move(payload));
        }
    }

    out.posterior = posterior;
    out.wall_ms = clock.now_ms() - run_start;
    return out;
}

}  // namespace specplan
