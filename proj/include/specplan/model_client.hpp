#pragma once

#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "specplan/clock.hpp"

namespace specplan {

enum class CallKind { Main, Draft, Forecast, Aggregate };
enum class Role { System, User, Assistant };

std::string to_string(CallKind k);
std::optional<CallKind> call_kind_from_string(std::string_view s);

struct Message {
    Role role = Role::User;
    std::string content;
};

struct GenerationRequest {
    std::vector<Message> messages;
    double temperature = 0.6;
    double top_p = 1.0;
    int max_output_tokens = 2048;
    CallKind call_kind = CallKind::Main;
};

struct GenerationResult {
    std::string content;
    int prompt_tokens = 0;
    int completion_tokens = 0;
    int64_t duration_ms = 0;
    bool aborted = false;
    // True when token counts are local approximations (aborted calls, or
    // upstream responses without usage data).
    bool tokens_estimated = false;
};

enum class ModelErrorKind { Transport, Timeout, BadResponse, Config };

class ModelError : public std::runtime_error {
public:
    ModelError(ModelErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    ModelErrorKind kind() const { return kind_; }

private:
    ModelErrorKind kind_;
};

// Cooperative cancellation handle. Simulated executions know their fire time
// in advance (deadline_ms); live executions flip a flag that waiters observe.
class AbortSignal {
public:
    virtual ~AbortSignal() = default;
    virtual bool fired() const = 0;
    // Virtual-clock fire time, when scheduled ahead of time.
    virtual std::optional<int64_t> deadline_ms() const { return std::nullopt; }
    // Wall-clock wait: returns true if the signal fires within the window.
    virtual bool wait_for_ms(int64_t) const { return fired(); }
};

class NeverAbort final : public AbortSignal {
public:
    bool fired() const override { return false; }
};

// Fires at a known virtual time.
class DeadlineAbort final : public AbortSignal {
public:
    DeadlineAbort(const Clock& clock, int64_t deadline_ms)
        : clock_(clock), deadline_(deadline_ms) {}
    bool fired() const override { return clock_.now_ms() >= deadline_; }
    std::optional<int64_t> deadline_ms() const override { return deadline_; }

private:
    const Clock& clock_;
    int64_t deadline_;
};

// Thread-safe latch for wall-clock runs; trigger() releases all waiters.
class FlagAbort final : public AbortSignal {
public:
    FlagAbort() : state_(std::make_shared<State>()) {}
    void trigger();
    bool fired() const override;
    bool wait_for_ms(int64_t ms) const override;

private:
    struct State {
        std::mutex mu;
        std::condition_variable cv;
        bool fired = false;
    };
    std::shared_ptr<State> state_;
};

class ModelClient {
public:
    virtual ~ModelClient() = default;
    virtual GenerationResult generate(const GenerationRequest& req, const AbortSignal& abort) = 0;
    GenerationResult generate(const GenerationRequest& req) {
        NeverAbort never;
        return generate(req, never);
    }
};

// Deterministic whitespace-unit count; a documented approximation used when
// no upstream usage data exists.
int count_tokens(std::string_view text);
int count_prompt_tokens(const GenerationRequest& req);

// Pure function of the request; zero latency. For prompt-assembly tests.
class MockModelClient final : public ModelClient {
public:
    using ModelClient::generate;
    using Fn = std::function<std::string(const GenerationRequest&)>;
    MockModelClient();  // echoes the last message content
    explicit MockModelClient(Fn fn);
    GenerationResult generate(const GenerationRequest& req, const AbortSignal& abort) override;

private:
    Fn fn_;
};

// Shared timing/abort/accounting for clock-driven simulation clients.
// Subclasses decide what text a request produces and how long it takes;
// this base plays the latency out on the clock and honours aborts.
class SimModelBase : public ModelClient {
public:
    using ModelClient::generate;
    explicit SimModelBase(Clock& clock) : clock_(clock) {}
    GenerationResult generate(const GenerationRequest& req, const AbortSignal& abort) final;

protected:
    struct ScriptedResponse {
        std::string text;
        int64_t latency_ms = 0;
        int completion_tokens = -1;  // -1: count from text
        bool fail = false;           // transport failure surfaced at completion time
    };
    virtual ScriptedResponse respond(const GenerationRequest& req) = 0;

    Clock& clock_;
};

struct ScriptedRule {
    std::optional<CallKind> kind;  // match any kind when unset
    std::string contains;          // substring of the last message; empty matches all
    std::string response;
    int64_t latency_ms = 0;
    int completion_tokens = -1;
    bool fail = false;
};

// First matching rule wins; falls back to default_rule.
struct ScriptedPolicy {
    std::vector<ScriptedRule> rules;
    ScriptedRule default_rule;

    const ScriptedRule& match(const GenerationRequest& req) const;
};

class ScriptedModelClient final : public SimModelBase {
public:
    ScriptedModelClient(Clock& clock, ScriptedPolicy policy)
        : SimModelBase(clock), policy_(std::move(policy)) {}

protected:
    ScriptedResponse respond(const GenerationRequest& req) override;

private:
    ScriptedPolicy policy_;
};

}  // namespace specplan
