#include "specplan/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace specplan {

using nlohmann::json;

int histogram_bucket(int64_t ms) {
    if (ms < 1) return -1;
    return static_cast<int>(std::floor(10.0 * std::log10(static_cast<double>(ms))));
}

std::pair<double, double> histogram_bucket_range(int bucket) {
    if (bucket < 0) return {0.0, 1.0};
    return {std::pow(10.0, bucket / 10.0), std::pow(10.0, (bucket + 1) / 10.0)};
}

RunReport build_report(const std::vector<TraceFile>& traces) {
    RunReport report;
    std::map<std::string, std::vector<TaskMetrics>> by_policy;
    std::string fingerprint;
    bool fingerprint_mixed = false;

    for (const auto& trace : traces) {
        std::string policy = trace.meta ? trace.meta->policy : "unknown";
        if (trace.meta) {
            if (fingerprint.empty()) {
                fingerprint = trace.meta->config_fingerprint;
            } else if (fingerprint != trace.meta->config_fingerprint) {
                fingerprint_mixed = true;
            }
        }

        for (TaskMetrics& m : compute_metrics(trace.events)) {
            by_policy[policy].push_back(m);
            report.tasks.emplace_back(policy, std::move(m));
        }
        for (const auto& ev : trace.events) {
            if (ev.kind == TraceEventKind::ToolComplete) {
                int bucket = histogram_bucket(ev.payload.value("duration_ms", int64_t{0}));
                report.tool_histograms[policy][bucket] += 1;
            }
        }
    }

    report.config_fingerprint = fingerprint_mixed ? "mixed" : fingerprint;
    for (const auto& [policy, metrics] : by_policy) report.policies[policy] = aggregate_run(metrics);
    return report;
}

namespace {

void append_metric_rows(std::ostringstream& os, const std::string& policy, const RunSummary& s) {
    auto row = [&](const char* metric, double value) {
        os << policy << "," << metric << "," << value << "\n";
    };
    row("n_tasks", s.n);
    row("mean_itu", s.mean_itu);
    row("mean_ultra_short_ratio", s.mean_ultra_short);
    row("mean_wall_ms", s.mean_wall_ms);
    row("mean_reasoning_ms", s.mean_reasoning_ms);
    row("mean_idle_ms", s.mean_idle_ms);
    row("mean_steps", s.mean_steps);
    row("mean_tokens_idle", s.mean_tokens_idle);
    row("mean_tokens_test", s.mean_tokens_test);
    row("success_rate", s.success_rate);
}

json summary_to_json(const RunSummary& s) {
    json per_bin = json::object();
    for (const auto& [bin, b] : s.per_bin) {
        per_bin[to_string(bin)] = {
            {"n", b.n}, {"mean_itu", b.mean_itu}, {"mean_wall_ms", b.mean_wall_ms}};
    }
    return json{{"n_tasks", s.n},
                {"mean_itu", s.mean_itu},
                {"mean_ultra_short_ratio", s.mean_ultra_short},
                {"mean_wall_ms", s.mean_wall_ms},
                {"mean_reasoning_ms", s.mean_reasoning_ms},
                {"mean_idle_ms", s.mean_idle_ms},
                {"mean_steps", s.mean_steps},
                {"mean_tokens_idle", s.mean_tokens_idle},
                {"mean_tokens_test", s.mean_tokens_test},
                {"success_rate", s.success_rate},
                {"per_bin", per_bin}};
}

json task_to_json(const TaskMetrics& m) {
    json j{{"task_id", m.task_id},
           {"itu", m.itu},
           {"ultra_short_ratio", m.ultra_short_ratio},
           {"bin", to_string(m.bin)},
           {"tokens_idle", m.tokens_idle},
           {"tokens_test", m.tokens_test},
           {"wall_ms", m.wall_ms},
           {"reasoning_ms", m.reasoning_ms},
           {"idle_ms", m.idle_ms},
           {"steps", m.steps}};
    if (m.success.has_value()) j["success"] = *m.success;
    return j;
}

}  // namespace

std::string summary_csv(const RunReport& report) {
    std::ostringstream os;
    os << "policy,metric,value\n";
    for (const auto& [policy, summary] : report.policies) append_metric_rows(os, policy, summary);
    return os.str();
}

std::string tasks_csv(const RunReport& report) {
    std::ostringstream os;
    os << "policy,task_id,itu,ultra_short_ratio,bin,tokens_idle,tokens_test,wall_ms,"
          "reasoning_ms,idle_ms,steps,success\n";
    for (const auto& [policy, m] : report.tasks) {
        os << policy << "," << m.task_id << "," << m.itu << "," << m.ultra_short_ratio << ","
           << to_string(m.bin) << "," << m.tokens_idle << "," << m.tokens_test << "," << m.wall_ms
           << "," << m.reasoning_ms << "," << m.idle_ms << "," << m.steps << ","
           << (m.success.has_value() ? (*m.success ? "true" : "false") : "") << "\n";
    }
    return os.str();
}

std::string histogram_csv(const RunReport& report) {
    std::ostringstream os;
    os << "policy,bucket_lo_ms,bucket_hi_ms,count\n";
    for (const auto& [policy, buckets] : report.tool_histograms) {
        for (const auto& [bucket, count] : buckets) {
            auto [lo, hi] = histogram_bucket_range(bucket);
            os << policy << "," << lo << "," << hi << "," << count << "\n";
        }
    }
    return os.str();
}

json report_to_json(const RunReport& report) {
    json tasks = json::array();
    for (const auto& [policy, m] : report.tasks) {
        json row = task_to_json(m);
        row["policy"] = policy;
        tasks.push_back(std::move(row));
    }
    json policies = json::object();
    for (const auto& [policy, summary] : report.policies)
        policies[policy] = summary_to_json(summary);
    json histograms = json::object();
    for (const auto& [policy, buckets] : report.tool_histograms) {
        json rows = json::array();
        for (const auto& [bucket, count] : buckets) {
            auto [lo, hi] = histogram_bucket_range(bucket);
            rows.push_back({{"lo_ms", lo}, {"hi_ms", hi}, {"count", count}});
        }
        histograms[policy] = std::move(rows);
    }
    return json{{"config_fingerprint", report.config_fingerprint},
                {"tasks", tasks},
                {"policies", policies},
                {"tool_histograms", histograms}};
}

void write_report_files(const RunReport& report, const std::string& prefix,
                        const std::string& format) {
    auto write = [](const std::string& path, const std::string& content) {
        std::ofstream os(path);
        if (!os) throw std::runtime_error("cannot write report file: " + path);
        os << content;
    };
    if (format == "csv") {
        write(prefix + "_summary.csv", summary_csv(report));
        write(prefix + "_tasks.csv", tasks_csv(report));
        write(prefix + "_histogram.csv", histogram_csv(report));
    } else if (format == "json") {
        write(prefix + "_report.json", report_to_json(report).dump(2) + "\n");
    } else {
        throw std::runtime_error("unknown report format: " + format);
    }
}

}  // namespace specplan
