#include "specplan/model_client.hpp"

#include <cctype>

namespace specplan {

std::string to_string(CallKind k) {
    switch (k) {
        case CallKind::Main: return "MAIN";
        case CallKind::Draft: return "DRAFT";
        case CallKind::Forecast: return "FORECAST";
        case CallKind::Aggregate: return "AGGREGATE";
    }
    return "MAIN";
}

std::optional<CallKind> call_kind_from_string(std::string_view s) {
    if (s == "MAIN") return CallKind::Main;
    if (s == "DRAFT") return CallKind::Draft;
    if (s == "FORECAST") return CallKind::Forecast;
    if (s == "AGGREGATE") return CallKind::Aggregate;
    return std::nullopt;
}

void FlagAbort::trigger() {
    std::lock_guard<std::mutex> lock(state_->mu);
    state_->fired = true;
    state_->cv.notify_all();
}

bool FlagAbort::fired() const {
    std::lock_guard<std::mutex> lock(state_->mu);
    return state_->fired;
}

bool FlagAbort::wait_for_ms(int64_t ms) const {
    std::unique_lock<std::mutex> lock(state_->mu);
    if (ms <= 0) return state_->fired;
    state_->cv.wait_for(lock, std::chrono::milliseconds(ms), [this] { return state_->fired; });
    return state_->fired;
}

int count_tokens(std::string_view text) {
    int count = 0;
    bool in_unit = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            in_unit = false;
        } else if (!in_unit) {
            in_unit = true;
            ++count;
        }
    }
    return count;
}

int count_prompt_tokens(const GenerationRequest& req) {
    int total = 0;
    for (const auto& m : req.messages) total += count_tokens(m.content);
    return total;
}

MockModelClient::MockModelClient()
    : fn_([](const GenerationRequest& req) {
          return req.messages.empty() ? std::string() : req.messages.back().content;
      }) {}

MockModelClient::MockModelClient(Fn fn) : fn_(std::move(fn)) {}

GenerationResult MockModelClient::generate(const GenerationRequest& req, const AbortSignal&) {
    GenerationResult res;
    res.content = fn_(req);
    res.prompt_tokens = count_prompt_tokens(req);
    res.completion_tokens = count_tokens(res.content);
    return res;
}

GenerationResult SimModelBase::generate(const GenerationRequest& req, const AbortSignal& abort) {
    if (req.messages.empty())
        throw ModelError(ModelErrorKind::Config, "generation request has no messages");

    const int64_t start = clock_.now_ms();
    ScriptedResponse scripted = respond(req);
    const int64_t full_end = start + scripted.latency_ms;
    const int full_tokens = scripted.completion_tokens >= 0 ? scripted.completion_tokens
                                                            : count_tokens(scripted.text);

    GenerationResult res;
    res.prompt_tokens = count_prompt_tokens(req);

    // A completion landing exactly at the abort time still counts as complete;
    // the abort wins only when it fires strictly earlier.
    std::optional<int64_t> abort_at;
    if (auto d = abort.deadline_ms(); d && *d < full_end) abort_at = *d;

    if (clock_.is_virtual()) {
        if (abort_at) {
            clock_.advance_to(std::max(start, *abort_at));
        } else {
            clock_.advance_to(full_end);
        }
    } else {
        bool fired = abort.wait_for_ms(scripted.latency_ms);
        if (fired && clock_.now_ms() < full_end) abort_at = clock_.now_ms();
        if (!abort_at) clock_.advance_to(full_end);
    }

    const int64_t end = clock_.now_ms();
    res.duration_ms = end - start;

    if (abort_at) {
        res.aborted = true;
        res.tokens_estimated = true;
        res.completion_tokens =
            scripted.latency_ms > 0
                ? static_cast<int>(full_tokens * res.duration_ms / scripted.latency_ms)
                : 0;
        return res;
    }

    if (scripted.fail)
        throw ModelError(ModelErrorKind::Transport, "scripted transport failure");

    res.content = std::move(scripted.text);
    res.completion_tokens = full_tokens;
    return res;
}

const ScriptedRule& ScriptedPolicy::match(const GenerationRequest& req) const {
    const std::string& last = req.messages.empty() ? std::string() : req.messages.back().content;
    for (const auto& rule : rules) {
        if (rule.kind && *rule.kind != req.call_kind) continue;
        if (!rule.contains.empty() && last.find(rule.contains) == std::string::npos) continue;
        return rule;
    }
    return default_rule;
}

SimModelBase::ScriptedResponse ScriptedModelClient::respond(const GenerationRequest& req) {
    const ScriptedRule& rule = policy_.match(req);
    return ScriptedResponse{rule.response, rule.latency_ms, rule.completion_tokens, rule.fail};
}

}  // namespace specplan
