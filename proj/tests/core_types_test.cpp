#include <doctest.h>

#include "specplan/core_types.hpp"
#include "specplan/rng.hpp"

using namespace specplan;

namespace {

TrajectoryStep make_step(int index, int64_t base_ms) {
    TrajectoryStep s;
    s.index = index;
    s.thought = "look";
    s.action = {"lookup", {{"key", "k" + std::to_string(index)}}, "c" + std::to_string(index)};
    s.observation = Observation{s.action.call_id, "key=k" + std::to_string(index + 1),
                                base_ms + 5000, true};
    s.timing = {base_ms, base_ms + 2000, base_ms + 2000, base_ms + 5000, 0};
    return s;
}

}  // namespace

TEST_SUITE("core_types") {

TEST_CASE("well-formed trajectory has no violations") {
    TrajectoryState state;
    state.task_id = "t1";
    for (int i = 0; i < 3; ++i) state.steps.push_back(make_step(i, i * 6000));
    state.finished = true;
    state.final_answer = "done";
    CHECK(validate_trajectory(state).empty());
}

TEST_CASE("in-flight final step may lack an observation") {
    TrajectoryState state;
    state.task_id = "t1";
    state.steps.push_back(make_step(0, 0));
    state.steps.push_back(make_step(1, 6000));
    state.steps.back().observation.reset();
    CHECK(validate_trajectory(state).empty());

    state.steps[0].observation.reset();  // non-final step must have one
    CHECK(!validate_trajectory(state).empty());
}

TEST_CASE("finished requires a final answer and vice versa") {
    TrajectoryState state;
    state.task_id = "t1";
    state.steps.push_back(make_step(0, 0));

    state.finished = true;
    auto violations = validate_trajectory(state);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0] == "finished without final_answer");

    state.finished = false;
    state.final_answer = "early";
    violations = validate_trajectory(state);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0] == "final_answer present but not finished");
}

TEST_CASE("timing order and index order are enforced") {
    TrajectoryState state;
    state.task_id = "t1";
    state.steps.push_back(make_step(0, 0));
    state.steps.push_back(make_step(1, 6000));
    state.steps[1].index = 5;
    state.steps[1].timing.tool_end_ms = state.steps[1].timing.tool_start_ms - 1;
    auto violations = validate_trajectory(state);
    CHECK(violations.size() == 2);
}

TEST_CASE("over-cap draft list is a violation") {
    std::vector<Draft> drafts(6, Draft{DraftStrategy::Progressive, "p", 0,
                                       DraftStatus::Complete, 3, 0});
    auto violations = validate_draft_list(drafts, 5);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0] == "DraftBuffer over cap");
    CHECK(validate_draft_list(std::vector<Draft>(5, drafts[0]), 5).empty());
}

TEST_CASE("busy interval outside the idle window is a violation") {
    IdleWindow w;
    w.step_index = 0;
    w.start_ms = 1000;
    w.idle_duration_ms = 4000;
    w.busy_intervals_ms = {{1000, 2000}, {2500, 5000}};
    CHECK(validate_idle_window(w).empty());

    w.busy_intervals_ms.push_back({4500, 5200});  // past window end, overlapping
    auto violations = validate_idle_window(w);
    CHECK(!violations.empty());
    bool found = false;
    for (const auto& v : violations) found = found || v == "busy interval outside idle window";
    CHECK(found);
}

TEST_CASE("busy total above idle duration is a violation") {
    IdleWindow w;
    w.start_ms = 0;
    w.idle_duration_ms = 1000;
    w.busy_intervals_ms = {{0, 800}, {800, 1000}};
    CHECK(validate_idle_window(w).empty());
}

TEST_CASE("draft buffer never exceeds its cap under random insertion") {
    Rng rng(7, "buffer");
    for (int trial = 0; trial < 50; ++trial) {
        int cap = 1 + static_cast<int>(rng.below(8));
        DraftBuffer buffer(cap);
        int accepted = 0;
        int attempts = static_cast<int>(rng.below(30));
        for (int i = 0; i < attempts; ++i) {
            Draft d;
            d.iteration = i;
            d.status = rng.u01() < 0.2 ? DraftStatus::Cancelled : DraftStatus::Complete;
            bool ok = buffer.push(d);
            if (ok) ++accepted;
            CHECK(static_cast<int>(buffer.size()) <= cap);
            if (d.status == DraftStatus::Cancelled) CHECK(!ok);
        }
        CHECK(static_cast<int>(buffer.size()) == accepted);
        // insertion order preserved
        for (size_t i = 1; i < buffer.drafts().size(); ++i) {
            CHECK(buffer.drafts()[i - 1].iteration < buffer.drafts()[i].iteration);
        }
    }
}

TEST_CASE("observation call id must match the step action") {
    TrajectoryState state;
    state.task_id = "t1";
    state.steps.push_back(make_step(0, 0));
    state.steps[0].observation->call_id = "other";
    CHECK(!validate_trajectory(state).empty());
}

}  // TEST_SUITE
