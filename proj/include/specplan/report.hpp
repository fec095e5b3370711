#pragma once

#include <map>
#include <string>
#include <vector>

#include "specplan/metrics.hpp"
#include "specplan/trace.hpp"

namespace specplan {

// Report derived purely from trace bytes: per-task metric rows, per-policy
// summaries, and per-policy tool-duration histograms (logarithmic buckets,
// 10 per decade).
struct RunReport {
    std::string config_fingerprint;
    std::vector<std::pair<std::string, TaskMetrics>> tasks;  // (policy, metrics)
    std::map<std::string, RunSummary> policies;
    std::map<std::string, std::map<int, int64_t>> tool_histograms;  // policy -> bucket -> count
};

// Bucket index b covers [10^(b/10), 10^((b+1)/10)) ms; durations below 1 ms
// land in bucket -1.
int histogram_bucket(int64_t ms);
std::pair<double, double> histogram_bucket_range(int bucket);

RunReport build_report(const std::vector<TraceFile>& traces);

// "policy,metric,value" rows, one per (policy, metric).
std::string summary_csv(const RunReport& report);
// One row per task with every TaskMetrics field.
std::string tasks_csv(const RunReport& report);
// "policy,bucket_lo_ms,bucket_hi_ms,count" rows.
std::string histogram_csv(const RunReport& report);

nlohmann::json report_to_json(const RunReport& report);

// Writes <prefix>_summary, <prefix>_tasks and <prefix>_histogram in the
// requested format ("csv" writes three CSVs, "json" one combined file).
void write_report_files(const RunReport& report, const std::string& prefix,
                        const std::string& format);

}  // namespace specplan
