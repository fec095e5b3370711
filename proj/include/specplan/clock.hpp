#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

namespace specplan {

// Monotonic millisecond clock shared by the runtime. The simulator supplies a
// virtual clock that advances only through explicit calls; live runs supply
// the wall clock. Both produce schema-identical traces.
class Clock {
public:
    virtual ~Clock() = default;
    virtual int64_t now_ms() const = 0;
    // Advance (virtual) or block (wall) until the given time. Never moves
    // backwards; targets in the past are a no-op.
    virtual void advance_to(int64_t t_ms) = 0;
    virtual bool is_virtual() const = 0;

    void advance_by(int64_t ms) { advance_to(now_ms() + ms); }
};

// Discrete-event virtual clock. Scheduled events fire as the clock passes
// their timestamp; simultaneous events fire in insertion order.
class VirtualClock final : public Clock {
public:
    int64_t now_ms() const override { return now_; }
    bool is_virtual() const override { return true; }

    void advance_to(int64_t t_ms) override;
    void schedule(int64_t t_ms, std::function<void()> fn);
    size_t pending_events() const { return queue_.size(); }

private:
    struct Event {
        int64_t t;
        uint64_t seq;
        std::function<void()> fn;
    };
    struct After {
        bool operator()(const Event& a, const Event& b) const {
            return a.t != b.t ? a.t > b.t : a.seq > b.seq;
        }
    };

    int64_t now_ = 0;
    uint64_t next_seq_ = 0;
    std::priority_queue<Event, std::vector<Event>, After> queue_;
};

class WallClock final : public Clock {
public:
    WallClock() : epoch_(std::chrono::steady_clock::now()) {}
    int64_t now_ms() const override;
    void advance_to(int64_t t_ms) override;
    bool is_virtual() const override { return false; }

private:
    std::chrono::steady_clock::time_point epoch_;
};

}  // namespace specplan
