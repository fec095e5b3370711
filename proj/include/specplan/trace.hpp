#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace specplan {

enum class TraceEventKind {
    StepStart,
    MainGen,
    ToolStart,
    DraftStart,
    DraftComplete,
    DraftCancelled,
    ToolComplete,
    Forecast,
    PosteriorUpdate,
    Aggregate,
    FinalAnswer,
};

std::string to_string(TraceEventKind k);
std::optional<TraceEventKind> trace_kind_from_string(std::string_view s);

// One timestamped event in a task execution. Events of a task are strictly
// ordered by (t_ms, seq). Payload fields by kind:
//   STEP_START       {}
//   MAIN_GEN         {call_kind, role, duration_ms, prompt_tokens,
//                     completion_tokens, content_hash[, content_text]}
//   TOOL_START       {tool, call_id}
//   TOOL_COMPLETE    {call_id, duration_ms, success, content_hash}
//   DRAFT_START      {strategy, iteration, alpha, beta[, p_hat]}
//   DRAFT_COMPLETE   {strategy, iteration, duration_ms, prompt_tokens,
//                     completion_tokens, content_hash[, content_text]}
//   DRAFT_CANCELLED  {strategy, iteration, duration_ms, completion_tokens,
//                     estimated: true}
//   FORECAST         {duration_ms, prompt_tokens, completion_tokens, parsed
//                     [, signal]}
//   POSTERIOR_UPDATE {alpha, beta, signal}
//   AGGREGATE        {n_plans, plan_hashes}
//   FINAL_ANSWER     {answer_hash[, answer_text][, matches_gold]}
struct TraceEvent {
    int64_t t_ms = 0;
    std::string task_id;
    int step = 0;
    uint64_t seq = 0;
    TraceEventKind kind = TraceEventKind::StepStart;
    nlohmann::json payload = nlohmann::json::object();

    bool operator==(const TraceEvent& other) const = default;
};

// Run-level metadata written as the first line of every trace file.
struct TraceMeta {
    std::string policy;
    uint64_t seed = 0;
    std::string config_fingerprint;
    bool log_full_text = false;
};

nlohmann::json to_json(const TraceEvent& ev);
TraceEvent trace_event_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TraceMeta& meta);
TraceMeta trace_meta_from_json(const nlohmann::json& j);

uint64_t content_hash(std::string_view bytes);
std::string content_hash_hex(std::string_view bytes);

class TraceSink {
public:
    virtual ~TraceSink() = default;
    virtual void emit(const TraceEvent& ev) = 0;
};

class MemoryTrace final : public TraceSink {
public:
    void emit(const TraceEvent& ev) override { events_.push_back(ev); }
    const std::vector<TraceEvent>& events() const { return events_; }

private:
    std::vector<TraceEvent> events_;
};

// JSONL writer: one UTF-8 JSON object per line, LF terminated, flushed per
// line so partial traces survive crashes. Free-text payload fields are
// dropped unless full-text logging is on; content hashes always remain.
class JsonlTraceWriter final : public TraceSink {
public:
    JsonlTraceWriter(std::ostream& os, bool log_full_text = false);
    void write_meta(const TraceMeta& meta);
    void emit(const TraceEvent& ev) override;

private:
    std::ostream& os_;
    bool log_full_text_;
};

class FanoutSink final : public TraceSink {
public:
    FanoutSink(TraceSink* a, TraceSink* b) : a_(a), b_(b) {}
    void emit(const TraceEvent& ev) override {
        if (a_) a_->emit(ev);
        if (b_) b_->emit(ev);
    }

private:
    TraceSink* a_;
    TraceSink* b_;
};

class TraceParseError : public std::runtime_error {
public:
    TraceParseError(size_t line, const std::string& what)
        : std::runtime_error("trace line " + std::to_string(line) + ": " + what), line_(line) {}
    size_t line() const { return line_; }

private:
    size_t line_;
};

struct TraceFile {
    std::optional<TraceMeta> meta;
    std::vector<TraceEvent> events;
};

TraceFile parse_trace(std::istream& is);
TraceFile read_trace_file(const std::string& path);

// Structural validation over arbitrary event lists: per-task (t, seq)
// ordering, posterior increments (each POSTERIOR_UPDATE adds exactly one
// count matching its signal; the first update starts from (1,1) when
// fresh_prior is set), and per-window draft-completion caps.
std::vector<std::string> validate_trace(const std::vector<TraceEvent>& events,
                                        int draft_cap = 5, bool fresh_prior = true);

}  // namespace specplan
