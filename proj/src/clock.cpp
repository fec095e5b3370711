#include "specplan/clock.hpp"

#include <thread>
#include <utility>

namespace specplan {

void VirtualClock::advance_to(int64_t t_ms) {
    while (!queue_.empty() && queue_.top().t <= t_ms) {
        // Copy out before pop: the callback may schedule further events.
        Event ev = queue_.top();
        queue_.pop();
        if (ev.t > now_) now_ = ev.t;
        if (ev.fn) ev.fn();
    }
    if (t_ms > now_) now_ = t_ms;
}

void VirtualClock::schedule(int64_t t_ms, std::function<void()> fn) {
    int64_t t = t_ms < now_ ? now_ : t_ms;
    queue_.push(Event{t, next_seq_++, std::move(fn)});
}

int64_t WallClock::now_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - epoch_)
        .count();
}

void WallClock::advance_to(int64_t t_ms) {
    int64_t remaining = t_ms - now_ms();
    if (remaining > 0) std::this_thread::sleep_for(std::chrono::milliseconds(remaining));
}

}  // namespace specplan
