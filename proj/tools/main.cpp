#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "specplan/config.hpp"
#include "specplan/report.hpp"

namespace {

using namespace specplan;
using nlohmann::json;

struct RunOptions {
    std::string config_path;
    std::string policy_override;
    std::optional<uint64_t> seed_override;
    std::string trace_path = "trace.jsonl";
    std::string report_prefix;
    std::string format = "json";
    bool log_full_text = false;
};

FileConfig resolve_config(const RunOptions& opt) {
    FileConfig cfg = load_config(opt.config_path);
    if (!opt.policy_override.empty()) {
        auto policy = policy_from_string(opt.policy_override);
        if (!policy) {
            std::string valid;
            for (const auto& name : policy_names()) valid += (valid.empty() ? "" : ", ") + name;
            throw ConfigError("unknown policy \"" + opt.policy_override +
                              "\"; valid policies: " + valid);
        }
        cfg.scenario.run.policy = *policy;
        cfg.resolved["policy"]["kind"] = opt.policy_override;
    }
    if (opt.seed_override) {
        cfg.scenario.base_seed = *opt.seed_override;
        cfg.resolved["sim"]["seed"] = *opt.seed_override;
    }
    cfg.scenario.run.log_full_text = opt.log_full_text;
    return cfg;
}

TraceMeta make_meta(const FileConfig& cfg) {
    TraceMeta meta;
    meta.policy = to_string(cfg.scenario.run.policy);
    meta.seed = cfg.scenario.base_seed;
    meta.config_fingerprint = cfg.fingerprint();
    meta.log_full_text = cfg.scenario.run.log_full_text;
    return meta;
}

// Generic tools for externally supplied tasks: an echo tool standing in for
// real integrations, plus final_answer.
ToolRegistry make_live_registry(const LatencyModel& latency) {
    ToolRegistry registry;
    registry.register_tool({"echo",
                            [](const ToolCall& call) -> ToolResult {
                                std::string out = "echo:";
                                for (const auto& [k, v] : call.arguments)
                                    out += " " + k + "=" + v;
                                return {out, true};
                            },
                            latency});
    registry.register_tool(
        {"final_answer", [](const ToolCall&) -> ToolResult { return {"submitted", true}; },
         latency});
    return registry;
}

int run_command(const RunOptions& opt) {
    FileConfig cfg = resolve_config(opt);

    std::ofstream trace_stream(opt.trace_path);
    if (!trace_stream) {
        std::cerr << "error: cannot open trace output " << opt.trace_path << "\n";
        return 2;
    }
    JsonlTraceWriter writer(trace_stream, cfg.scenario.run.log_full_text);
    writer.write_meta(make_meta(cfg));

    std::vector<TaskMetrics> metrics;

    if (cfg.model_kind == "sim") {
        ScenarioResult result = run_scenario(cfg.scenario, &writer);
        metrics = result.metrics;
    } else {
        if (!cfg.tasks_source)
            throw ConfigError("http model runs need tasks.source in the config");
        std::vector<Task> tasks = load_tasks_jsonl(*cfg.tasks_source);
        WallClock clock;
        HttpModelClient model = HttpModelClient::from_env(clock);
        ToolRegistry registry = make_live_registry(cfg.scenario.tool_latency);
        uint64_t index = 0;
        std::optional<StrategyPosterior> carried;
        for (const Task& task : tasks) {
            Rng latency_rng = Rng::stream(cfg.scenario.base_seed, "latency", index);
            Rng bandit_rng = Rng::stream(cfg.scenario.base_seed, "bandit", index);
            MemoryTrace memory;
            FanoutSink fanout(&memory, &writer);
            TaskRunResult run = run_task(task, cfg.scenario.run, model, registry, clock,
                                         bandit_rng, latency_rng, fanout,
                                         cfg.scenario.run.cross_task_posterior ? carried
                                                                               : std::nullopt);
            if (cfg.scenario.run.cross_task_posterior) carried = run.posterior;
            metrics.push_back(compute_task_metrics(memory.events()));
            ++index;
        }
    }

    RunSummary summary = aggregate_run(metrics);
    json out{{"policy", to_string(cfg.scenario.run.policy)},
             {"seed", cfg.scenario.base_seed},
             {"trace", opt.trace_path},
             {"n_tasks", summary.n},
             {"mean_itu", summary.mean_itu},
             {"mean_wall_ms", summary.mean_wall_ms},
             {"mean_tokens_idle", summary.mean_tokens_idle},
             {"mean_tokens_test", summary.mean_tokens_test},
             {"success_rate", summary.success_rate}};
    std::cout << out.dump(2) << "\n";

    if (!opt.report_prefix.empty()) {
        TraceFile trace = read_trace_file(opt.trace_path);
        write_report_files(build_report({trace}), opt.report_prefix, opt.format);
    }
    return 0;
}

int replay_command(const std::string& trace_path, const std::string& format,
                   const std::string& out_prefix) {
    TraceFile trace = read_trace_file(trace_path);

    std::vector<std::string> violations = validate_trace(trace.events);
    for (const auto& v : violations) std::cerr << "trace violation: " << v << "\n";

    RunReport report = build_report({trace});
    if (!out_prefix.empty()) {
        write_report_files(report, out_prefix, format);
    } else if (format == "csv") {
        std::cout << tasks_csv(report) << summary_csv(report);
    } else {
        std::cout << report_to_json(report).dump(2) << "\n";
    }
    return violations.empty() ? 0 : 1;
}

int report_command(const std::vector<std::string>& trace_paths, const std::string& format,
                   const std::string& out_prefix) {
    std::vector<TraceFile> traces;
    traces.reserve(trace_paths.size());
    for (const auto& path : trace_paths) traces.push_back(read_trace_file(path));
    RunReport report = build_report(traces);
    if (!out_prefix.empty()) {
        write_report_files(report, out_prefix, format);
    } else if (format == "csv") {
        std::cout << summary_csv(report) << histogram_csv(report);
    } else {
        std::cout << report_to_json(report).dump(2) << "\n";
    }
    return 0;
}

std::vector<uint64_t> parse_seed_list(const std::string& spec) {
    std::vector<uint64_t> seeds;
    size_t range = spec.find("..");
    if (range != std::string::npos) {
        uint64_t lo = std::stoull(spec.substr(0, range));
        uint64_t hi = std::stoull(spec.substr(range + 2));
        for (uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
        return seeds;
    }
    size_t pos = 0;
    while (pos <= spec.size()) {
        size_t comma = spec.find(',', pos);
        if (comma == std::string::npos) comma = spec.size();
        if (comma > pos) seeds.push_back(std::stoull(spec.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return seeds;
}

int sweep_command(const std::string& config_path, const std::string& policies_csv,
                  const std::string& seeds_spec, const std::string& out_dir,
                  const std::string& format) {
    std::vector<std::string> policies;
    size_t pos = 0;
    while (pos <= policies_csv.size()) {
        size_t comma = policies_csv.find(',', pos);
        if (comma == std::string::npos) comma = policies_csv.size();
        if (comma > pos) policies.push_back(policies_csv.substr(pos, comma - pos));
        pos = comma + 1;
    }
    std::vector<uint64_t> seeds = parse_seed_list(seeds_spec);
    if (policies.empty() || seeds.empty())
        throw ConfigError("sweep needs at least one policy and one seed");

    std::vector<TraceFile> traces;
    for (const auto& policy : policies) {
        for (uint64_t seed : seeds) {
            RunOptions opt;
            opt.config_path = config_path;
            opt.policy_override = policy;
            opt.seed_override = seed;
            FileConfig cfg = resolve_config(opt);

            std::string trace_path =
                out_dir + "/sweep_" + policy + "_s" + std::to_string(seed) + ".jsonl";
            std::ofstream trace_stream(trace_path);
            if (!trace_stream) {
                std::cerr << "error: cannot open trace output " << trace_path << "\n";
                return 2;
            }
            JsonlTraceWriter writer(trace_stream, false);
            writer.write_meta(make_meta(cfg));
            run_scenario(cfg.scenario, &writer);
            trace_stream.close();
            traces.push_back(read_trace_file(trace_path));
        }
    }

    RunReport report = build_report(traces);
    write_report_files(report, out_dir + "/sweep", format);
    std::cout << report_to_json(report)["policies"].dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Speculative-planning agent runtime and simulation harness"};
    app.require_subcommand(1);

    RunOptions run_opt;
    CLI::App* run = app.add_subcommand("run", "Execute a configured scenario or live run");
    run->add_option("--config", run_opt.config_path, "JSON config file")->required();
    run->add_option("--policy", run_opt.policy_override, "Policy override");
    run->add_option("--seed", run_opt.seed_override, "Seed override");
    run->add_option("--trace", run_opt.trace_path, "Trace JSONL output path");
    run->add_option("--report", run_opt.report_prefix, "Also write report files with this prefix");
    run->add_option("--format", run_opt.format, "Report format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    run->add_flag("--log-full-text", run_opt.log_full_text,
                  "Record full prompt/answer text in traces (hashes only by default)");

    std::string replay_trace;
    std::string replay_format = "json";
    std::string replay_out;
    CLI::App* replay = app.add_subcommand("replay", "Recompute metrics from a trace file");
    replay->add_option("--trace", replay_trace, "Trace JSONL path")->required();
    replay->add_option("--format", replay_format, "Output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    replay->add_option("--out", replay_out, "Write report files with this prefix");

    std::vector<std::string> report_traces;
    std::string report_format = "csv";
    std::string report_out;
    CLI::App* report = app.add_subcommand("report", "Summarize one or more trace files");
    report->add_option("--trace", report_traces, "Trace JSONL paths")->required();
    report->add_option("--format", report_format, "Output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    report->add_option("--out", report_out, "Write report files with this prefix");

    std::string sweep_config;
    std::string sweep_policies = "idlespec,vanilla";
    std::string sweep_seeds = "0..9";
    std::string sweep_out = ".";
    std::string sweep_format = "csv";
    CLI::App* sweep = app.add_subcommand("sweep", "Run a (policy x seed) grid");
    sweep->add_option("--config", sweep_config, "JSON config file")->required();
    sweep->add_option("--policies", sweep_policies, "Comma-separated policy list");
    sweep->add_option("--seeds", sweep_seeds, "Seed list: a,b,c or lo..hi");
    sweep->add_option("--out", sweep_out, "Output directory");
    sweep->add_option("--format", sweep_format, "Report format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_command(run_opt);
        if (replay->parsed()) return replay_command(replay_trace, replay_format, replay_out);
        if (report->parsed()) return report_command(report_traces, report_format, report_out);
        if (sweep->parsed())
            return sweep_command(sweep_config, sweep_policies, sweep_seeds, sweep_out,
                                 sweep_format);
    } catch (const TraceParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
