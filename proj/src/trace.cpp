#include "specplan/trace.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

namespace specplan {

namespace {

constexpr std::array<std::pair<TraceEventKind, const char*>, 11> kKindNames = {{
    {TraceEventKind::StepStart, "STEP_START"},
    {TraceEventKind::MainGen, "MAIN_GEN"},
    {TraceEventKind::ToolStart, "TOOL_START"},
    {TraceEventKind::DraftStart, "DRAFT_START"},
    {TraceEventKind::DraftComplete, "DRAFT_COMPLETE"},
    {TraceEventKind::DraftCancelled, "DRAFT_CANCELLED"},
    {TraceEventKind::ToolComplete, "TOOL_COMPLETE"},
    {TraceEventKind::Forecast, "FORECAST"},
    {TraceEventKind::PosteriorUpdate, "POSTERIOR_UPDATE"},
    {TraceEventKind::Aggregate, "AGGREGATE"},
    {TraceEventKind::FinalAnswer, "FINAL_ANSWER"},
}};

}  // namespace

std::string to_string(TraceEventKind k) {
    for (const auto& [kind, name] : kKindNames) {
        if (kind == k) return name;
    }
    return "STEP_START";
}

std::optional<TraceEventKind> trace_kind_from_string(std::string_view s) {
    for (const auto& [kind, name] : kKindNames) {
        if (s == name) return kind;
    }
    return std::nullopt;
}

namespace {
// Local FNV-1a so trace.cpp does not pull rng.hpp for one helper.
uint64_t fnv1a64_local(std::string_view bytes) {
    uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}
}  // namespace

uint64_t content_hash(std::string_view bytes) { return fnv1a64_local(bytes); }

std::string content_hash_hex(std::string_view bytes) {
    uint64_t h = fnv1a64_local(bytes);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

nlohmann::json to_json(const TraceEvent& ev) {
    return nlohmann::json{{"t", ev.t_ms},     {"task", ev.task_id},
                          {"step", ev.step},  {"seq", ev.seq},
                          {"kind", to_string(ev.kind)}, {"payload", ev.payload}};
}

TraceEvent trace_event_from_json(const nlohmann::json& j) {
    TraceEvent ev;
    ev.t_ms = j.at("t").get<int64_t>();
    ev.task_id = j.at("task").get<std::string>();
    ev.step = j.at("step").get<int>();
    ev.seq = j.at("seq").get<uint64_t>();
    auto kind = trace_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw std::invalid_argument("unknown event kind: " + j.at("kind").dump());
    ev.kind = *kind;
    ev.payload = j.value("payload", nlohmann::json::object());
    return ev;
}

nlohmann::json to_json(const TraceMeta& meta) {
    return nlohmann::json{{"meta",
                           {{"policy", meta.policy},
                            {"seed", meta.seed},
                            {"config_fingerprint", meta.config_fingerprint},
                            {"log_full_text", meta.log_full_text}}}};
}

TraceMeta trace_meta_from_json(const nlohmann::json& j) {
    const nlohmann::json& m = j.at("meta");
    TraceMeta meta;
    meta.policy = m.value("policy", "");
    meta.seed = m.value("seed", uint64_t{0});
    meta.config_fingerprint = m.value("config_fingerprint", "");
    meta.log_full_text = m.value("log_full_text", false);
    return meta;
}

JsonlTraceWriter::JsonlTraceWriter(std::ostream& os, bool log_full_text)
    : os_(os), log_full_text_(log_full_text) {}

void JsonlTraceWriter::write_meta(const TraceMeta& meta) {
    os_ << to_json(meta).dump() << '\n';
    os_.flush();
}

void JsonlTraceWriter::emit(const TraceEvent& ev) {
    if (!log_full_text_ &&
        (ev.payload.contains("content_text") || ev.payload.contains("answer_text"))) {
        TraceEvent stripped = ev;
        stripped.payload.erase("content_text");
        stripped.payload.erase("answer_text");
        os_ << to_json(stripped).dump() << '\n';
    } else {
        os_ << to_json(ev).dump() << '\n';
    }
    os_.flush();
}

TraceFile parse_trace(std::istream& is) {
    TraceFile out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw TraceParseError(line_no, "invalid JSON");
        if (j.contains("meta")) {
            if (line_no != 1) throw TraceParseError(line_no, "meta line must come first");
            out.meta = trace_meta_from_json(j);
            continue;
        }
        try {
            out.events.push_back(trace_event_from_json(j));
        } catch (const std::exception& e) {
            throw TraceParseError(line_no, e.what());
        }
    }
    return out;
}

TraceFile read_trace_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open trace file: " + path);
    return parse_trace(is);
}

std::vector<std::string> validate_trace(const std::vector<TraceEvent>& events, int draft_cap,
                                        bool fresh_prior) {
    std::vector<std::string> out;

    struct TaskState {
        bool any = false;
        int64_t last_t = 0;
        uint64_t last_seq = 0;
        bool has_update = false;
        int alpha = 1;
        int beta = 1;
        int window_completes = 0;
    };
    std::map<std::string, TaskState> tasks;

    for (const TraceEvent& ev : events) {
        TaskState& st = tasks[ev.task_id];
        if (st.any) {
            bool ordered = ev.t_ms > st.last_t || (ev.t_ms == st.last_t && ev.seq > st.last_seq);
            if (!ordered)
                out.push_back("task " + ev.task_id + ": events out of (t, seq) order at seq " +
                              std::to_string(ev.seq));
        }
        st.any = true;
        st.last_t = ev.t_ms;
        st.last_seq = ev.seq;

        switch (ev.kind) {
            case TraceEventKind::ToolStart:
                st.window_completes = 0;
                break;
            case TraceEventKind::DraftComplete:
                if (++st.window_completes > draft_cap)
                    out.push_back("task " + ev.task_id + ": draft completions over cap in window at step " +
                                  std::to_string(ev.step));
                break;
            case TraceEventKind::PosteriorUpdate: {
                int alpha = ev.payload.value("alpha", 0);
                int beta = ev.payload.value("beta", 0);
                std::string signal = ev.payload.value("signal", "");
                int d_alpha = alpha - st.alpha;
                int d_beta = beta - st.beta;
                bool prog_ok = signal == "PROG" && d_alpha == 1 && d_beta == 0;
                bool rec_ok = signal == "REC" && d_alpha == 0 && d_beta == 1;
                bool base_ok = st.has_update || !fresh_prior || (st.alpha == 1 && st.beta == 1);
                if (!(prog_ok || rec_ok) || !base_ok) {
                    out.push_back("task " + ev.task_id + ": posterior update (" +
                                  std::to_string(alpha) + "," + std::to_string(beta) +
                                  ") does not increment (" + std::to_string(st.alpha) + "," +
                                  std::to_string(st.beta) + ") by signal " + signal);
                }
                st.alpha = alpha;
                st.beta = beta;
                st.has_update = true;
                break;
            }
            default:
                break;
        }
    }
    return out;
}

}  // namespace specplan
