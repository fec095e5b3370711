// Acceptance suite: end-to-end checks of the runtime's quantitative
// behaviour, one printed pass/fail line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "specplan/sim.hpp"

using namespace specplan;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void expect(bool condition, const std::string& what) {
        if (!condition) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

// Shared scenario outputs so later criteria can audit earlier traces.
struct Context {
    std::vector<ScenarioResult> latency_runs;   // criterion 4
    std::vector<ScenarioResult> itu_runs;       // criterion 5
    std::vector<ScenarioResult> zero_idle_runs; // criterion 6
    std::vector<ScenarioResult> deadend_runs;   // criterion 7
};

double analytic_prob_prog(int alpha, int beta) {
    int n = alpha + beta - 1;
    double coeff = 1.0;
    double total = 0.0;
    for (int k = 0; k <= alpha - 1; ++k) {
        total += coeff;
        coeff = coeff * (n - k) / (k + 1);
    }
    return total / std::pow(2.0, n);
}

// ---------------------------------------------------------------------------
// 1. Posterior arithmetic: exhaustive over alpha + beta <= 20, both signals.
Check criterion_posterior_arithmetic(Context&) {
    Check c;
    for (int alpha = 1; alpha <= 19; ++alpha) {
        for (int beta = 1; alpha + beta <= 20; ++beta) {
            StrategyPosterior p{alpha, beta};
            StrategyPosterior prog = update_posterior(p, DraftStrategy::Progressive);
            StrategyPosterior rec = update_posterior(p, DraftStrategy::Recovery);
            c.expect(prog.alpha == alpha + 1 && prog.beta == beta,
                     "PROG update wrong at (" + std::to_string(alpha) + "," +
                         std::to_string(beta) + ")");
            c.expect(rec.alpha == alpha && rec.beta == beta + 1,
                     "REC update wrong at (" + std::to_string(alpha) + "," +
                         std::to_string(beta) + ")");
            c.expect(p.alpha == alpha && p.beta == beta, "update mutated its input");
        }
    }
    return c;
}

// ---------------------------------------------------------------------------
// 2. Sampler correctness: empirical tail vs the regularized incomplete beta,
//    cross-checked against an independent gamma-ratio sampler.
Check criterion_sampler_correctness(Context&) {
    Check c;
    uint64_t seed = 20000;
    for (int alpha = 1; alpha <= 5; ++alpha) {
        for (int beta = 1; beta <= 5; ++beta) {
            const int draws = 100000;
            StrategyPosterior post{alpha, beta};
            Rng rng(seed++, "acceptance-sampler");
            int above = 0;
            for (int i = 0; i < draws; ++i) above += sample_preference(post, rng).p_hat > 0.5;
            double empirical = static_cast<double>(above) / draws;

            std::mt19937_64 eng(seed++);
            std::gamma_distribution<double> ga(alpha, 1.0);
            std::gamma_distribution<double> gb(beta, 1.0);
            int oracle_above = 0;
            for (int i = 0; i < draws; ++i) {
                double x = ga(eng);
                double y = gb(eng);
                oracle_above += x / (x + y) > 0.5;
            }
            double oracle = static_cast<double>(oracle_above) / draws;

            double expected = analytic_prob_prog(alpha, beta);
            std::ostringstream at;
            at << "(" << alpha << "," << beta << ")";
            c.expect(std::abs(empirical - expected) <= 0.01,
                     "sampler off analytic tail at " + at.str());
            c.expect(std::abs(oracle - expected) <= 0.01, "oracle off analytic tail at " + at.str());
            c.expect(std::abs(empirical - oracle) <= 0.02, "methods disagree at " + at.str());
        }
    }
    return c;
}

// ---------------------------------------------------------------------------
// 3. Draft-count arithmetic over a 50-point (tool, draft) latency grid.
Check criterion_draft_count(Context&) {
    Check c;
    const int64_t tools[] = {500, 1500, 2800, 4000, 5500, 7000, 9900, 12000, 20000, 50000};
    const int64_t drafts[] = {700, 1300, 2000, 3100, 4500};
    int points = 0;
    for (int64_t t : tools) {
        for (int64_t d : drafts) {
            ++points;
            VirtualClock clock;
            ScriptedPolicy policy;
            policy.default_rule = {std::nullopt, "", "draft body", d, -1, false};
            ScriptedModelClient model(clock, policy);
            DraftingSession session;
            session.posterior_snapshot = {1, 1};
            session.buffer = DraftBuffer(5);
            session.pending_trajectory.task_id = "grid";
            Rng rng(static_cast<uint64_t>(t * 131 + d), "grid");
            DeadlineAbort arrival(clock, t);
            run_idle_drafting(session, model, arrival, rng, clock, {});

            int64_t expected_complete = std::min<int64_t>(t / d, 5);
            bool cap_binding = t / d >= 5;
            bool expect_partial = !cap_binding && t % d > 0;

            std::ostringstream at;
            at << "(t=" << t << ",d=" << d << ")";
            c.expect(static_cast<int64_t>(session.buffer.size()) == expected_complete,
                     "complete count wrong at " + at.str());
            c.expect(session.cancelled_partial.has_value() == expect_partial,
                     "partial presence wrong at " + at.str());
            if (expect_partial) {
                c.expect(clock.now_ms() == t, "cancellation not instantaneous at " + at.str());
            }
        }
    }
    c.expect(points == 50, "grid size drifted");
    return c;
}

// ---------------------------------------------------------------------------
// 4. Latency structure: revision latency = reasoning latency, tool = 2x.
Check criterion_latency_structure(Context& ctx) {
    Check c;
    ScenarioConfig cfg;
    cfg.family = SyntheticFamily::KeyChase;
    cfg.n_tasks = 100;
    cfg.chain_length = 3;
    cfg.base_seed = 404;
    cfg.timings = {2000, 1500, 100, 2000};
    cfg.tool_latency = LatencyModel::constant(4000);

    cfg.run.policy = PolicyKind::Vanilla;
    ScenarioResult vanilla = run_scenario(cfg);
    cfg.run.policy = PolicyKind::IdleSpec;
    ScenarioResult spec = run_scenario(cfg);
    cfg.run.policy = PolicyKind::SeqRev;
    ScenarioResult seqrev = run_scenario(cfg);
    cfg.run.policy = PolicyKind::Planning;
    ScenarioResult planning = run_scenario(cfg);

    double spec_ratio_sum = 0.0;
    double seqrev_ratio_sum = 0.0;
    for (int i = 0; i < cfg.n_tasks; ++i) {
        double base = static_cast<double>(vanilla.runs[i].wall_ms);
        double spec_ratio = spec.runs[i].wall_ms / base;
        double seqrev_ratio = seqrev.runs[i].wall_ms / base;
        spec_ratio_sum += spec_ratio;
        seqrev_ratio_sum += seqrev_ratio;
        c.expect(spec_ratio >= 0.97 && spec_ratio <= 1.03,
                 "speculative ratio " + std::to_string(spec_ratio) + " out of band at task " +
                     std::to_string(i));
        c.expect(seqrev_ratio >= 1.25, "revision ratio " + std::to_string(seqrev_ratio) +
                                           " below 1.25 at task " + std::to_string(i));
    }
    double planning_mean = 0.0;
    for (int i = 0; i < cfg.n_tasks; ++i)
        planning_mean += static_cast<double>(planning.runs[i].wall_ms) / vanilla.runs[i].wall_ms;
    planning_mean /= cfg.n_tasks;
    c.expect(planning_mean >= 1.25, "planning should sit with revision above vanilla");

    std::ostringstream detail;
    detail << "mean ratios: speculative " << spec_ratio_sum / cfg.n_tasks << ", revision "
           << seqrev_ratio_sum / cfg.n_tasks << ", planning " << planning_mean;
    if (c.ok) c.detail = detail.str();

    ctx.latency_runs = {std::move(vanilla), std::move(spec), std::move(seqrev),
                        std::move(planning)};
    return c;
}

// ---------------------------------------------------------------------------
// 5. ITU ordering under heterogeneous lognormal latencies at ultra-short 0.26.
Check criterion_itu_ordering(Context& ctx) {
    Check c;
    ScenarioConfig cfg;
    cfg.family = SyntheticFamily::KeyChase;
    cfg.n_tasks = 100;
    cfg.chain_length = 3;
    cfg.base_seed = 505;
    cfg.timings = {2000, 2000, 100, 2000};
    cfg.tool_latency = calibrate_latency_profile(0.26, 2000);

    auto mean_itu = [](const ScenarioResult& r) {
        double sum = 0.0;
        for (const auto& m : r.metrics) sum += m.itu;
        return sum / static_cast<double>(r.metrics.size());
    };
    auto mean_ultra_short = [](const ScenarioResult& r) {
        double sum = 0.0;
        for (const auto& m : r.metrics) sum += m.ultra_short_ratio;
        return sum / static_cast<double>(r.metrics.size());
    };

    cfg.run.policy = PolicyKind::IdleSpec;
    ScenarioResult spec = run_scenario(cfg);
    cfg.run.policy = PolicyKind::SleepTime;
    ScenarioResult sleep = run_scenario(cfg);
    cfg.run.policy = PolicyKind::Vanilla;
    ScenarioResult vanilla = run_scenario(cfg);

    double spec_itu = mean_itu(spec);
    double sleep_itu = mean_itu(sleep);
    double vanilla_itu = mean_itu(vanilla);
    double ultra = mean_ultra_short(vanilla);

    c.expect(std::abs(ultra - 0.26) <= 0.03,
             "calibrated ultra-short ratio drifted to " + std::to_string(ultra));
    c.expect(vanilla_itu == 0.0, "vanilla must not use idle time");
    c.expect(sleep_itu > 0.0, "sleep-time should use some idle time");
    c.expect(spec_itu >= 2.0 * sleep_itu, "speculative ITU " + std::to_string(spec_itu) +
                                              " not at least twice sleep-time " +
                                              std::to_string(sleep_itu));

    std::ostringstream detail;
    detail << "mean ITU: speculative " << spec_itu << ", sleep-time " << sleep_itu
           << ", vanilla " << vanilla_itu << "; ultra-short " << ultra;
    if (c.ok) c.detail = detail.str();

    ctx.itu_runs = {std::move(spec), std::move(sleep), std::move(vanilla)};
    return c;
}

// ---------------------------------------------------------------------------
// 6. Zero-idle equivalence: byte-identical action sequences across 50 seeds.
Check criterion_zero_idle(Context& ctx) {
    Check c;
    ScenarioConfig cfg;
    cfg.family = SyntheticFamily::KeyChase;
    cfg.n_tasks = 50;
    cfg.chain_length = 3;
    cfg.base_seed = 606;
    cfg.tool_latency = LatencyModel::constant(0);

    cfg.run.policy = PolicyKind::IdleSpec;
    ScenarioResult spec = run_scenario(cfg);
    cfg.run.policy = PolicyKind::Vanilla;
    ScenarioResult vanilla = run_scenario(cfg);

    auto actions = [](const TaskRunResult& run) {
        std::string out;
        for (const auto& step : run.trajectory.steps) {
            out += step.action.tool_name;
            for (const auto& [k, v] : step.action.arguments) out += "|" + k + "=" + v;
            out += "\n";
        }
        return out;
    };

    for (int i = 0; i < cfg.n_tasks; ++i) {
        c.expect(actions(spec.runs[i]) == actions(vanilla.runs[i]),
                 "action sequences diverged at task " + std::to_string(i));
        c.expect(spec.runs[i].trajectory.final_answer == vanilla.runs[i].trajectory.final_answer,
                 "final answers diverged at task " + std::to_string(i));
    }
    for (const auto& ev : spec.events) {
        c.expect(ev.kind != TraceEventKind::DraftComplete &&
                     ev.kind != TraceEventKind::DraftCancelled,
                 "zero idle time must yield zero drafts");
    }

    ctx.zero_idle_runs = {std::move(spec), std::move(vanilla)};
    return c;
}

// ---------------------------------------------------------------------------
// 7. Outcome separation on the dead-end family over 100 seeds.
Check criterion_outcome_separation(Context& ctx) {
    Check c;
    ScenarioConfig cfg;
    cfg.family = SyntheticFamily::DeadEnd;
    cfg.n_tasks = 100;
    cfg.chain_length = 3;
    cfg.branches = 4;
    cfg.base_seed = 707;
    cfg.timings = {2000, 2000, 100, 2000};
    cfg.tool_latency = LatencyModel::constant(8000);

    cfg.run.policy = PolicyKind::IdleSpec;
    ScenarioResult spec = run_scenario(cfg);
    cfg.run.policy = PolicyKind::Vanilla;
    ScenarioResult vanilla = run_scenario(cfg);

    double spec_steps = 0.0;
    double vanilla_steps = 0.0;
    int spec_success = 0;
    int vanilla_success = 0;
    for (int i = 0; i < cfg.n_tasks; ++i) {
        spec_steps += static_cast<double>(spec.runs[i].trajectory.steps.size());
        vanilla_steps += static_cast<double>(vanilla.runs[i].trajectory.steps.size());
        spec_success += spec.runs[i].success;
        vanilla_success += vanilla.runs[i].success;
        c.expect(spec.runs[i].trajectory.steps.size() <= vanilla.runs[i].trajectory.steps.size(),
                 "speculative run took more steps at task " + std::to_string(i));
    }
    spec_steps /= cfg.n_tasks;
    vanilla_steps /= cfg.n_tasks;
    c.expect(spec_steps < vanilla_steps, "mean steps-to-success not strictly lower");
    c.expect(spec_success >= vanilla_success, "success rate regressed");

    std::ostringstream detail;
    detail << "mean steps: speculative " << spec_steps << " vs vanilla " << vanilla_steps
           << "; success " << spec_success << "/" << cfg.n_tasks << " vs " << vanilla_success
           << "/" << cfg.n_tasks;
    if (c.ok) c.detail = detail.str();

    ctx.deadend_runs = {std::move(spec), std::move(vanilla)};
    return c;
}

// ---------------------------------------------------------------------------
// 8. Trace fidelity: replay equals online bit for bit; increments validate.
Check criterion_trace_fidelity(Context& ctx) {
    Check c;
    std::vector<const std::vector<ScenarioResult>*> groups = {
        &ctx.latency_runs, &ctx.itu_runs, &ctx.zero_idle_runs, &ctx.deadend_runs};
    int audited = 0;
    for (const auto* group : groups) {
        for (const ScenarioResult& result : *group) {
            ++audited;
            std::ostringstream os;
            JsonlTraceWriter writer(os);
            for (const auto& ev : result.events) writer.emit(ev);
            std::istringstream is(os.str());
            TraceFile parsed = parse_trace(is);

            c.expect(parsed.events == result.events, "serialization altered events");
            std::vector<TaskMetrics> replayed = compute_metrics(parsed.events);
            c.expect(replayed.size() == result.metrics.size(), "task count changed in replay");
            for (size_t i = 0; i < replayed.size() && i < result.metrics.size(); ++i) {
                c.expect(replayed[i] == result.metrics[i],
                         "replayed metrics diverged for task " + replayed[i].task_id);
            }
            c.expect(validate_trace(parsed.events).empty(), "trace validator reported violations");
        }
    }
    c.expect(audited == 11, "expected traces from criteria 4-7");
    if (c.ok) c.detail = "replayed " + std::to_string(audited) + " traces bit-exactly";
    return c;
}

// ---------------------------------------------------------------------------
// 9. Prompt fidelity: anchor phrases in every rendered template.
Check criterion_prompt_fidelity(Context&) {
    Check c;
    Task task{"t", "solve it", std::nullopt, {}};
    TrajectoryState traj;
    traj.task_id = "t";
    TrajectoryStep step;
    step.index = 0;
    step.action = {"lookup", {{"key", "k0"}}, "c0"};
    traj.steps.push_back(step);
    Observation obs{"c0", "key=k1", 1000, true};

    DraftBuffer buffer(5);
    Draft d;
    d.content = "a plan";
    d.token_count = 2;
    buffer.push(d);

    auto check_anchor = [&](const std::string& text, const char* anchor, const char* name) {
        c.expect(text.find(anchor) != std::string::npos,
                 std::string(name) + " lost its anchor phrase");
    };
    check_anchor(build_draft_prompt(DraftStrategy::Progressive, buffer, traj),
                 "NEXT ACTION STEP", "progressive");
    check_anchor(build_draft_prompt(DraftStrategy::Recovery, buffer, traj),
                 "EXACTLY one distinct recovery plan", "recovery");
    check_anchor(build_forecast_prompt(task, traj, obs), "output a single decision", "forecast");
    check_anchor(build_aggregation_prompt(buffer, obs, task, traj, {}), "starting points",
                 "aggregation");
    check_anchor(render_template(prompt_template(TemplateName::SeqRev),
                                 {{"task", task.prompt}, {"trajectory", "(t)"}, {"observation", "o"}}),
                 "reflecting on the latest action's Observation", "seqrev");
    check_anchor(render_template(prompt_template(TemplateName::SleepTime),
                                 {{"task", task.prompt}, {"trajectory", "(t)"}}),
                 "Make as many inferences as possible", "sleeptime");
    return c;
}

// ---------------------------------------------------------------------------
// 10. Freeze and clear invariants over the criterion-5 traces.
Check criterion_freeze_clear(Context& ctx) {
    Check c;
    int windows_checked = 0;
    int aggregates_checked = 0;
    for (const ScenarioResult& result : ctx.itu_runs) {
        std::map<std::string, std::vector<TraceEvent>> by_task;
        for (const auto& ev : result.events) by_task[ev.task_id].push_back(ev);

        for (const auto& [task_id, events] : by_task) {
            // one frozen posterior snapshot per idle window
            std::map<int, std::set<std::pair<int, int>>> snapshots;
            std::map<int, std::set<std::string>> window_hashes;
            for (const auto& ev : events) {
                if (ev.kind == TraceEventKind::DraftStart && ev.payload.contains("p_hat")) {
                    snapshots[ev.step].insert(
                        {ev.payload.value("alpha", 0), ev.payload.value("beta", 0)});
                }
                if (ev.kind == TraceEventKind::DraftComplete) {
                    window_hashes[ev.step].insert(ev.payload.value("content_hash", ""));
                }
            }
            for (const auto& [step, snaps] : snapshots) {
                ++windows_checked;
                c.expect(snaps.size() == 1,
                         task_id + ": window " + std::to_string(step) +
                             " sampled from more than one posterior snapshot");
            }
            // a main generation sees exactly the previous window's drafts
            for (const auto& ev : events) {
                if (ev.kind != TraceEventKind::Aggregate) continue;
                ++aggregates_checked;
                for (const auto& h : ev.payload["plan_hashes"]) {
                    std::string hash = h.get<std::string>();
                    c.expect(window_hashes[ev.step - 1].count(hash) == 1,
                             task_id + ": aggregated plan not from the previous window");
                    for (const auto& [w, hashes] : window_hashes) {
                        if (w < ev.step - 1) {
                            c.expect(hashes.count(hash) == 0,
                                     task_id + ": draft from window " + std::to_string(w) +
                                         " leaked into step " + std::to_string(ev.step));
                        }
                    }
                }
            }
        }
    }
    c.expect(windows_checked > 0, "no drafting windows found to audit");
    c.expect(aggregates_checked > 0, "no aggregated generations found to audit");
    if (c.ok) {
        c.detail = "audited " + std::to_string(windows_checked) + " windows, " +
                   std::to_string(aggregates_checked) + " aggregations";
    }
    return c;
}

struct Criterion {
    int id;
    const char* name;
    double limit_s;  // 0 = no stated limit
    std::function<Check(Context&)> fn;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "posterior arithmetic", 1.0, criterion_posterior_arithmetic},
        {2, "sampler correctness", 30.0, criterion_sampler_correctness},
        {3, "draft-count arithmetic", 5.0, criterion_draft_count},
        {4, "latency structure", 60.0, criterion_latency_structure},
        {5, "ITU ordering", 120.0, criterion_itu_ordering},
        {6, "zero-idle equivalence", 10.0, criterion_zero_idle},
        {7, "outcome separation", 60.0, criterion_outcome_separation},
        {8, "trace fidelity", 0.0, criterion_trace_fidelity},
        {9, "prompt fidelity", 0.0, criterion_prompt_fidelity},
        {10, "freeze/clear invariants", 0.0, criterion_freeze_clear},
    };

    Context ctx;
    int failures = 0;
    for (const auto& criterion : criteria) {
        auto start = std::chrono::steady_clock::now();
        Check result = criterion.fn(ctx);
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (criterion.limit_s > 0.0 && elapsed >= criterion.limit_s) {
            result.ok = false;
            result.detail += (result.detail.empty() ? "" : "; ");
            result.detail += "runtime " + std::to_string(elapsed) + "s over the " +
                             std::to_string(criterion.limit_s) + "s limit";
        }
        std::printf("[%s] criterion %2d: %-24s (%.2fs)%s%s\n", result.ok ? "PASS" : "FAIL",
                    criterion.id, criterion.name, elapsed, result.detail.empty() ? "" : " - ",
                    result.detail.c_str());
        failures += !result.ok;
    }
    if (failures == 0) {
        std::printf("all %zu acceptance criteria passed\n", criteria.size());
    } else {
        std::printf("%d acceptance criteria FAILED\n", failures);
    }
    return failures;
}
