#include "specplan/tool_runtime.hpp"

#include <cmath>
#include <stdexcept>

namespace specplan {

LatencyModel LatencyModel::constant(int64_t ms) {
    LatencyModel m;
    m.kind_ = Kind::Constant;
    m.constant_ms_ = ms < 0 ? 0 : ms;
    return m;
}

LatencyModel LatencyModel::lognormal(double log_mean, double log_sd) {
    if (log_sd <= 0.0) throw std::invalid_argument("lognormal log_sd must be positive");
    LatencyModel m;
    m.kind_ = Kind::LogNormal;
    m.log_mean_ = log_mean;
    m.log_sd_ = log_sd;
    return m;
}

LatencyModel LatencyModel::empirical(std::vector<int64_t> samples_ms) {
    if (samples_ms.empty()) throw std::invalid_argument("empirical latency needs samples");
    for (int64_t s : samples_ms) {
        if (s <= 0) throw std::invalid_argument("empirical latency samples must be positive");
    }
    LatencyModel m;
    m.kind_ = Kind::Empirical;
    m.samples_ = std::move(samples_ms);
    return m;
}

int64_t LatencyModel::draw(Rng& rng) const {
    switch (kind_) {
        case Kind::Constant:
            return constant_ms_;
        case Kind::LogNormal: {
            double v = std::exp(log_mean_ + log_sd_ * rng.normal());
            int64_t ms = static_cast<int64_t>(std::llround(v));
            return ms < 1 ? 1 : ms;
        }
        case Kind::Empirical:
            return samples_[static_cast<size_t>(rng.below(samples_.size()))];
    }
    return constant_ms_;
}

void ToolRegistry::register_tool(ToolSpec spec) {
    if (spec.name.empty()) throw std::invalid_argument("tool name must be non-empty");
    auto [it, inserted] = tools_.emplace(spec.name, std::move(spec));
    if (!inserted) throw std::invalid_argument("duplicate tool registration: " + it->first);
}

std::vector<std::string> ToolRegistry::list_tools() const {
    std::vector<std::string> names;
    names.reserve(tools_.size());
    for (const auto& [name, _] : tools_) names.push_back(name);
    return names;
}

bool ToolRegistry::has(const std::string& name) const { return tools_.count(name) > 0; }

PendingTool ToolRegistry::begin_execute(const ToolCall& call, Clock& clock,
                                        Rng& latency_rng) const {
    PendingTool pending;
    pending.started_ms = clock.now_ms();
    pending.observation.call_id = call.call_id;

    auto it = tools_.find(call.tool_name);
    if (it == tools_.end()) {
        pending.latency_ms = 0;
        pending.observation.content = "error: unknown tool '" + call.tool_name + "'";
        pending.observation.success = false;
        pending.observation.arrived_at_ms = pending.started_ms;
        return pending;
    }

    const ToolSpec& spec = it->second;
    pending.latency_ms = spec.latency.draw(latency_rng);
    ToolResult result = spec.behavior ? spec.behavior(call) : ToolResult{"", true};
    pending.observation.content = std::move(result.content);
    pending.observation.success = result.success;
    pending.observation.arrived_at_ms = pending.arrival_ms();

    if (!clock.is_virtual() && pending.latency_ms > 0) {
        auto flag = std::make_shared<FlagAbort>();
        pending.arrival_flag = flag;
        int64_t latency = pending.latency_ms;
        pending.timer = std::shared_ptr<std::thread>(
            new std::thread([flag, latency] {
                std::this_thread::sleep_for(std::chrono::milliseconds(latency));
                flag->trigger();
            }),
            [](std::thread* t) {
                if (t->joinable()) t->join();
                delete t;
            });
    }
    return pending;
}

Observation ToolRegistry::await(const PendingTool& pending, Clock& clock) {
    if (clock.is_virtual()) {
        if (pending.arrival_ms() > clock.now_ms()) clock.advance_to(pending.arrival_ms());
    } else if (pending.arrival_flag) {
        while (!pending.arrival_flag->wait_for_ms(1000)) {
        }
    }
    return pending.observation;
}

std::pair<Observation, int64_t> ToolRegistry::execute(const ToolCall& call, Clock& clock,
                                                      Rng& latency_rng) const {
    PendingTool pending = begin_execute(call, clock, latency_rng);
    Observation obs = await(pending, clock);
    return {obs, pending.latency_ms};
}

}  // namespace specplan
