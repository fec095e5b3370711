#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "specplan/clock.hpp"
#include "specplan/core_types.hpp"
#include "specplan/model_client.hpp"
#include "specplan/rng.hpp"

namespace specplan {

// Per-tool latency source. Draws are strictly positive and fully determined
// by the supplied rng stream.
class LatencyModel {
public:
    enum class Kind { Constant, LogNormal, Empirical };

    static LatencyModel constant(int64_t ms);
    static LatencyModel lognormal(double log_mean, double log_sd);
    static LatencyModel empirical(std::vector<int64_t> samples_ms);

    int64_t draw(Rng& rng) const;

    Kind kind() const { return kind_; }
    int64_t constant_ms() const { return constant_ms_; }
    double log_mean() const { return log_mean_; }
    double log_sd() const { return log_sd_; }
    const std::vector<int64_t>& samples() const { return samples_; }

private:
    LatencyModel() = default;

    Kind kind_ = Kind::Constant;
    int64_t constant_ms_ = 0;
    double log_mean_ = 0.0;
    double log_sd_ = 1.0;
    std::vector<int64_t> samples_;
};

struct ToolResult {
    std::string content;
    bool success = true;
};

using ToolBehavior = std::function<ToolResult(const ToolCall&)>;

struct ToolSpec {
    std::string name;
    ToolBehavior behavior;
    LatencyModel latency = LatencyModel::constant(0);
};

// An execution started on the clock. The observation content is fixed at
// start; it becomes visible at arrival_ms. On a wall clock a timer thread
// fires the arrival flag; on a virtual clock the caller advances to arrival.
struct PendingTool {
    Observation observation;
    int64_t started_ms = 0;
    int64_t latency_ms = 0;
    std::shared_ptr<FlagAbort> arrival_flag;  // wall-clock only
    std::shared_ptr<std::thread> timer;

    int64_t arrival_ms() const { return started_ms + latency_ms; }
};

class ToolRegistry {
public:
    // Duplicate names are rejected.
    void register_tool(ToolSpec spec);
    std::vector<std::string> list_tools() const;
    bool has(const std::string& name) const;

    // Starts execution; the latency is drawn immediately and completion
    // occurs that many ms after start on the supplied clock. Unknown tools
    // yield an immediate error observation with success=false.
    PendingTool begin_execute(const ToolCall& call, Clock& clock, Rng& latency_rng) const;

    // Blocking form: advances the clock through the full execution.
    std::pair<Observation, int64_t> execute(const ToolCall& call, Clock& clock,
                                            Rng& latency_rng) const;

    // Waits for a started execution and returns its observation.
    static Observation await(const PendingTool& pending, Clock& clock);

private:
    std::map<std::string, ToolSpec> tools_;
};

}  // namespace specplan
