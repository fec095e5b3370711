#include "specplan/sim.hpp"

#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace specplan {

namespace {

std::string hex_token(Rng& rng, int digits = 6) {
    static const char* kDigits = "0123456789abcdef";
    std::string out;
    out.reserve(static_cast<size_t>(digits));
    for (int i = 0; i < digits; ++i) out += kDigits[rng.below(16)];
    return out;
}

// --- prompt parsing helpers for the scripted policy ---

std::string last_observation_line(std::string_view prompt) {
    std::string out;
    size_t pos = 0;
    while ((pos = prompt.find("observation[", pos)) != std::string_view::npos) {
        size_t colon = prompt.find(':', pos);
        size_t eol = prompt.find('\n', pos);
        if (eol == std::string_view::npos) eol = prompt.size();
        if (colon != std::string_view::npos && colon < eol) {
            size_t b = colon + 1;
            while (b < eol && prompt[b] == ' ') ++b;
            out = std::string(prompt.substr(b, eol - b));
        }
        pos = eol;
    }
    return out;
}

std::string last_action_line(std::string_view prompt) {
    std::string out;
    size_t pos = 0;
    while ((pos = prompt.find("  action: ", pos)) != std::string_view::npos) {
        size_t b = pos + 10;
        size_t eol = prompt.find('\n', b);
        if (eol == std::string_view::npos) eol = prompt.size();
        out = std::string(prompt.substr(b, eol - b));
        pos = eol;
    }
    return out;
}

std::optional<int64_t> find_int_after(std::string_view text, std::string_view marker) {
    size_t pos = text.find(marker);
    if (pos == std::string_view::npos) return std::nullopt;
    pos += marker.size();
    size_t end = pos;
    while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
    if (end == pos) return std::nullopt;
    return std::stoll(std::string(text.substr(pos, end - pos)));
}

std::string find_token_after(std::string_view text, std::string_view marker) {
    size_t pos = text.find(marker);
    if (pos == std::string_view::npos) return {};
    pos += marker.size();
    size_t end = pos;
    while (end < text.size() && text[end] != ';' && text[end] != '}' && text[end] != '\n' &&
           text[end] != ',' && text[end] != ' ' && text[end] != ']') {
        ++end;
    }
    return std::string(text.substr(pos, end - pos));
}

std::vector<int> parse_correct_list(std::string_view prompt) {
    std::vector<int> out;
    size_t pos = prompt.find("correct=");
    if (pos == std::string_view::npos) return out;
    pos += 8;
    while (pos < prompt.size()) {
        size_t end = pos;
        while (end < prompt.size() && std::isdigit(static_cast<unsigned char>(prompt[end]))) ++end;
        if (end == pos) break;
        out.push_back(std::stoi(std::string(prompt.substr(pos, end - pos))));
        if (end < prompt.size() && prompt[end] == ',') {
            pos = end + 1;
        } else {
            break;
        }
    }
    return out;
}

int count_occurrences(std::string_view text, std::string_view needle) {
    int n = 0;
    size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string_view::npos) {
        ++n;
        pos += needle.size();
    }
    return n;
}

// A recovery plan naming this stage's correct branch, if one is offered.
bool plans_name_branch(std::string_view prompt, int stage, int branch) {
    std::string needle =
        "try branch=" + std::to_string(branch) + " at stage=" + std::to_string(stage);
    size_t pos = 0;
    while ((pos = prompt.find("Plan ", pos)) != std::string_view::npos) {
        size_t eol = prompt.find('\n', pos);
        if (eol == std::string_view::npos) eol = prompt.size();
        if (prompt.substr(pos, eol - pos).find(needle) != std::string_view::npos) return true;
        pos = eol;
    }
    return false;
}

std::string main_action_keychase(std::string_view prompt) {
    std::string obs = last_observation_line(prompt);
    if (obs.empty()) {
        std::string start = find_token_after(prompt, "start=");
        return "thought: begin the chain\naction: lookup{key=" + start + "}";
    }
    if (obs.rfind("key=", 0) == 0) {
        return "thought: follow the chain\naction: lookup{key=" + obs.substr(4) + "}";
    }
    if (obs.rfind("answer=", 0) == 0) {
        return "thought: chain resolved\naction: final_answer{answer=" + obs.substr(7) + "}";
    }
    return "thought: retry from the start\naction: lookup{key=" +
           find_token_after(prompt, "start=") + "}";
}

std::string main_action_deadend(std::string_view prompt) {
    std::string obs = last_observation_line(prompt);
    int64_t branches = find_int_after(prompt, "branches=").value_or(4);
    auto probe = [&](int64_t stage, int64_t branch) {
        std::ostringstream os;
        os << "thought: probe the next branch\naction: probe{branch=" << branch
           << ";branches=" << branches << ";stage=" << stage << "}";
        return os.str();
    };

    if (obs.empty()) return probe(0, 0);
    if (obs.rfind("advance stage=", 0) == 0) {
        return probe(find_int_after(obs, "stage=").value_or(0), 0);
    }
    if (obs.rfind("dead_end", 0) == 0) {
        int64_t stage = find_int_after(obs, "stage=").value_or(0);
        int64_t branch = find_int_after(obs, "branch=").value_or(0);
        std::vector<int> correct = parse_correct_list(prompt);
        if (stage < static_cast<int64_t>(correct.size()) &&
            plans_name_branch(prompt, static_cast<int>(stage), correct[stage])) {
            return probe(stage, correct[stage]);
        }
        return probe(stage, branch + 1);
    }
    if (obs.rfind("treasure=", 0) == 0) {
        return "thought: found it\naction: final_answer{answer=" + obs.substr(9) + "}";
    }
    return probe(0, 0);
}

std::string draft_response(std::string_view prompt, bool recovery) {
    std::string action = last_action_line(prompt);
    if (action.rfind("probe{", 0) == 0) {
        int64_t stage = find_int_after(action, "stage=").value_or(0);
        int64_t branch = find_int_after(action, "branch=").value_or(0);
        int64_t branches = find_int_after(action, "branches=").value_or(4);
        if (recovery) {
            // Enumerate alternatives in order; prior recovery plans in the
            // history shift the named branch forward.
            size_t hist_start = prompt.find("Plan history: [");
            size_t hist_end = hist_start == std::string_view::npos
                                  ? std::string_view::npos
                                  : prompt.find(']', hist_start);
            int prior = 0;
            if (hist_start != std::string_view::npos && hist_end != std::string_view::npos)
                prior = count_occurrences(prompt.substr(hist_start, hist_end - hist_start),
                                          "try branch=");
            int64_t named = (branch + 1 + prior) % branches;
            std::ostringstream os;
            os << "try branch=" << named << " at stage=" << stage;
            return os.str();
        }
        std::ostringstream os;
        os << "continue to stage=" << (stage + 1) << " assuming the probe succeeds";
        return os.str();
    }
    std::string key = find_token_after(action, "key=");
    if (recovery) return "retry lookup of " + key + " via an alternate index";
    return "continue the chain after " + key + " resolves";
}

}  // namespace

std::string to_string(SyntheticFamily f) {
    return f == SyntheticFamily::KeyChase ? "keychase" : "deadend";
}

std::optional<SyntheticFamily> family_from_string(std::string_view s) {
    if (s == "keychase") return SyntheticFamily::KeyChase;
    if (s == "deadend") return SyntheticFamily::DeadEnd;
    return std::nullopt;
}

SyntheticTaskSpec SyntheticTaskSpec::make(SyntheticFamily family, int chain_length, int branches,
                                          const std::string& task_id, Rng& scenario_rng) {
    if (chain_length < 1) throw std::invalid_argument("chain_length must be >= 1");
    if (branches < 2) throw std::invalid_argument("branches must be >= 2");

    SyntheticTaskSpec spec;
    spec.family = family;
    spec.chain_length = chain_length;
    spec.branches = branches;
    spec.task_id = task_id;

    if (family == SyntheticFamily::KeyChase) {
        for (int i = 0; i < chain_length; ++i) spec.chain_keys.push_back("k" + hex_token(scenario_rng));
        spec.gold_answer = "ans-" + hex_token(scenario_rng);
    } else {
        for (int i = 0; i < chain_length; ++i) {
            spec.correct_branches.push_back(
                1 + static_cast<int>(scenario_rng.below(static_cast<uint64_t>(branches - 1))));
        }
        spec.gold_answer = "treasure-" + hex_token(scenario_rng);
    }
    return spec;
}

Task SyntheticTaskSpec::to_task() const {
    Task task;
    task.id = task_id;
    task.gold_answer = gold_answer;
    std::ostringstream os;
    if (family == SyntheticFamily::KeyChase) {
        os << "Follow the key chain to the answer. family=keychase;start=" << chain_keys.front()
           << ";length=" << chain_length;
    } else {
        os << "Find the treasure by probing stage branches. family=deadend;stages=" << chain_length
           << ";branches=" << branches << ";correct=";
        for (size_t i = 0; i < correct_branches.size(); ++i) {
            if (i) os << ",";
            os << correct_branches[i];
        }
    }
    task.prompt = os.str();
    task.metadata["family"] = to_string(family);
    return task;
}

ToolRegistry make_tool_registry(const SyntheticTaskSpec& spec, const LatencyModel& tool_latency,
                                const LatencyModel& final_answer_latency) {
    ToolRegistry registry;

    if (spec.family == SyntheticFamily::KeyChase) {
        SyntheticTaskSpec bound = spec;
        registry.register_tool(
            {"lookup",
             [bound](const ToolCall& call) -> ToolResult {
                 auto it = call.arguments.find("key");
                 if (it == call.arguments.end()) return {"dead_end", false};
                 for (size_t i = 0; i < bound.chain_keys.size(); ++i) {
                     if (bound.chain_keys[i] == it->second) {
                         if (i + 1 < bound.chain_keys.size())
                             return {"key=" + bound.chain_keys[i + 1], true};
                         return {"answer=" + bound.gold_answer, true};
                     }
                 }
                 return {"dead_end", false};
             },
             tool_latency});
    } else {
        SyntheticTaskSpec bound = spec;
        registry.register_tool(
            {"probe",
             [bound](const ToolCall& call) -> ToolResult {
                 auto stage_it = call.arguments.find("stage");
                 auto branch_it = call.arguments.find("branch");
                 if (stage_it == call.arguments.end() || branch_it == call.arguments.end())
                     return {"dead_end", false};
                 int stage = std::stoi(stage_it->second);
                 int branch = std::stoi(branch_it->second);
                 if (stage < 0 || stage >= static_cast<int>(bound.correct_branches.size()))
                     return {"dead_end", false};
                 if (branch != bound.correct_branches[static_cast<size_t>(stage)]) {
                     return {"dead_end stage=" + std::to_string(stage) +
                                 " branch=" + std::to_string(branch),
                             true};
                 }
                 if (stage + 1 == bound.chain_length) return {"treasure=" + bound.gold_answer, true};
                 return {"advance stage=" + std::to_string(stage + 1), true};
             },
             tool_latency});
    }

    registry.register_tool(
        {"final_answer", [](const ToolCall&) -> ToolResult { return {"submitted", true}; },
         final_answer_latency});
    return registry;
}

SimModelBase::ScriptedResponse ScriptedAgentModel::respond(const GenerationRequest& req) {
    const std::string& prompt = req.messages.back().content;
    ScriptedResponse res;

    switch (req.call_kind) {
        case CallKind::Main:
        case CallKind::Aggregate: {
            res.latency_ms = timings_.main_ms;
            if (prompt.find("reflecting on the latest action's Observation") != std::string::npos) {
                res.text = "reflection: confirm the latest observation before continuing";
            } else if (prompt.rfind("Generate an updated plan", 0) == 0) {
                res.text = "plan: continue along the current chain of evidence";
            } else if (prompt.find("family=deadend") != std::string::npos) {
                res.text = main_action_deadend(prompt);
            } else {
                res.text = main_action_keychase(prompt);
            }
            break;
        }
        case CallKind::Draft: {
            if (prompt.find("Make as many inferences as possible") != std::string::npos) {
                res.text = "inference: the upcoming observation likely reveals the next key or branch";
                res.latency_ms = timings_.sleeptime_ms;
            } else {
                bool recovery = prompt.find("RECOVERY strategy") != std::string::npos;
                res.text = draft_response(prompt, recovery);
                res.latency_ms = timings_.draft_ms;
            }
            break;
        }
        case CallKind::Forecast: {
            size_t pos = prompt.find("Latest observation:");
            std::string_view tail =
                pos == std::string::npos ? std::string_view(prompt)
                                         : std::string_view(prompt).substr(pos);
            res.text = tail.find("dead_end") != std::string_view::npos ? "Decision: RECOVERY"
                                                                       : "Decision: PROGRESSIVE";
            res.latency_ms = timings_.forecast_ms;
            break;
        }
    }
    return res;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, TraceSink* extra_sink) {
    ScenarioResult result;
    std::optional<StrategyPosterior> carried;

    const LatencyModel final_latency = cfg.final_answer_latency.value_or(cfg.tool_latency);

    for (int i = 0; i < cfg.n_tasks; ++i) {
        Rng scenario_rng = Rng::stream(cfg.base_seed, "scenario", static_cast<uint64_t>(i));
        Rng latency_rng = Rng::stream(cfg.base_seed, "latency", static_cast<uint64_t>(i));
        Rng bandit_rng = Rng::stream(cfg.base_seed, "bandit", static_cast<uint64_t>(i));

        std::string task_id = to_string(cfg.family) + "-s" + std::to_string(cfg.base_seed) + "-" +
                              std::to_string(i);
        SyntheticTaskSpec spec = SyntheticTaskSpec::make(cfg.family, cfg.chain_length,
                                                         cfg.branches, task_id, scenario_rng);
        Task task = spec.to_task();
        ToolRegistry registry = make_tool_registry(spec, cfg.tool_latency, final_latency);

        VirtualClock clock;
        ScriptedAgentModel model(clock, cfg.timings);

        MemoryTrace memory;
        FanoutSink fanout(&memory, extra_sink);

        TaskRunResult run = run_task(task, cfg.run, model, registry, clock, bandit_rng,
                                     latency_rng, fanout,
                                     cfg.run.cross_task_posterior ? carried : std::nullopt);
        if (cfg.run.cross_task_posterior) carried = run.posterior;

        result.metrics.push_back(compute_task_metrics(memory.events()));
        result.events.insert(result.events.end(), memory.events().begin(), memory.events().end());
        result.runs.push_back(std::move(run));
        result.tasks.push_back(std::move(task));
    }
    return result;
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

LatencyModel calibrate_latency_profile(double target_ultra_short, int64_t reasoning_step_ms,
                                       double log_sd) {
    if (!(target_ultra_short > 0.0 && target_ultra_short < 1.0))
        throw std::invalid_argument(
            "ultra-short target must lie strictly inside (0, 1): a lognormal has full support");
    if (reasoning_step_ms <= 0) throw std::invalid_argument("reasoning step must be positive");
    if (log_sd <= 0.0) throw std::invalid_argument("log_sd must be positive");

    // P(X < step) = Phi((ln step - mu) / sd); solve for mu by bisection.
    const double log_step = std::log(static_cast<double>(reasoning_step_ms));
    double lo = log_step - 12.0 * log_sd;
    double hi = log_step + 12.0 * log_sd;
    for (int iter = 0; iter < 200; ++iter) {
        double mid = 0.5 * (lo + hi);
        double p = normal_cdf((log_step - mid) / log_sd);
        if (p > target_ultra_short) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return LatencyModel::lognormal(0.5 * (lo + hi), log_sd);
}

LatencyModel search_like_profile(int64_t reasoning_step_ms) {
    return LatencyModel::lognormal(std::log(4.0 * static_cast<double>(reasoning_step_ms)), 1.2);
}

LatencyModel parser_like_profile(int64_t reasoning_step_ms) {
    int64_t ms = reasoning_step_ms / 4;
    return LatencyModel::constant(ms < 1 ? 1 : ms);
}

LatencyModel training_like_profile(int64_t reasoning_step_ms) {
    return LatencyModel::constant(100 * reasoning_step_ms);
}

}  // namespace specplan
