#pragma once

// Exhaustive enumeration of engine event interleavings with invariant checks.

#include <sstream>
#include <string>

#include "support.hpp"
#include "ttharness/engine.hpp"
#include "ttharness/error.hpp"

namespace ttharness::testing {

struct InterleavingReport {
    std::size_t sequences = 0;
    std::size_t events = 0;
    std::size_t rejected = 0;
    std::size_t deliveries = 0;
    std::size_t violations = 0;
    std::string first_violation;
};

class InterleavingChecker {
public:
    // U user message, t short tick, W tick at the next wakeup, R model response,
    // F model failure, C close.
    static constexpr std::string_view kAlphabet = "UtWRFC";

    InterleavingChecker(DialogueMode mode, bool repoll) {
        EngineConfig cfg;
        cfg.mode = mode;
        cfg.repoll = repoll;
        cfg.seed = 11;
        root_ = make_session("x", cfg);
    }

    InterleavingReport run(std::size_t max_len) {
        report_ = {};
        Track track;
        std::string trace;
        dfs(root_, track, trace, max_len);
        return report_;
    }

private:
    struct Track {
        TimePoint now = tp("2024-06-10 10:00:00");
        int outstanding = 0;
        TimePoint plan_since{};
    };

    void fail(const std::string& trace, const std::string& what) {
        if (report_.violations++ == 0) report_.first_violation = trace + ": " + what;
    }

    void dfs(const SessionState& state, const Track& track, std::string& trace,
             std::size_t depth) {
        if (depth == 0) return;
        for (char ev : kAlphabet) {
            trace.push_back(ev);
            SessionState next = state;
            Track t = track;
            step(next, t, ev, trace);
            ++report_.sequences;
            dfs(next, t, trace, depth - 1);
            trace.pop_back();
        }
    }

    void step(SessionState& s, Track& t, char ev, const std::string& trace) {
        using namespace std::chrono_literals;
        const SessionState before = s;
        EngineEvent event = TickEvent{t.now};
        switch (ev) {
            case 'U':
                t.now += 400ms;
                event = UserMessageEvent{user("hey there", floor_seconds(t.now)), t.now};
                break;
            case 't':
                t.now += 1s;
                event = TickEvent{t.now};
                break;
            case 'W': {
                const auto wake = next_wakeup(s);
                t.now = wake ? std::max(t.now, *wake) : t.now + s.config.t1;
                event = TickEvent{t.now};
                break;
            }
            case 'R':
                t.now += 1s;
                // proposed at the query time, so the repair path runs too
                event = ModelResponseEvent{{sys("sure", floor_seconds(t.now - 1s), Origin::model),
                                            sys("why not", floor_seconds(t.now - 1s), Origin::model)},
                                           t.now};
                break;
            case 'F':
                t.now += 1s;
                event = ModelFailureEvent{"down", t.now};
                break;
            default:
                event = CloseEvent{t.now};
        }
        ++report_.events;

        Actions actions;
        try {
            actions = ttharness::apply(s, event);
        } catch (const Error&) {
            ++report_.rejected;
            if (!(s == before)) fail(trace, "rejected event mutated the state");
            return;
        }

        const bool accepted_reply = (ev == 'R' || ev == 'F') && before.in_flight && !before.closed;
        if (accepted_reply) --t.outstanding;
        if (ev == 'C') t.outstanding = 0;
        if (ev == 'R' && accepted_reply) {
            t.plan_since = t.now;
            for (const auto& entry : s.send_plan)
                if (entry.due_at < t.now) fail(trace, "plan entry predates the response");
        }

        for (const auto& action : actions) {
            if (std::holds_alternative<QueryModel>(action)) {
                if (t.outstanding != 0) fail(trace, "second query while one is outstanding");
                ++t.outstanding;
            } else {
                const auto& d = std::get<DeliverMessage>(action);
                ++report_.deliveries;
                if (before.closed) fail(trace, "delivery after close");
                if (d.generation != s.plan_generation) fail(trace, "stale delivery");
                if (d.due_at < t.plan_since) fail(trace, "delivery from a superseded plan");
                if (d.due_at > t.now) fail(trace, "delivery before its due time");
            }
        }
        if (t.outstanding != (s.in_flight ? 1 : 0)) fail(trace, "in-flight flag out of sync");
        if (t.outstanding > 1) fail(trace, "more than one query outstanding");

        const auto& old_msgs = before.history.messages;
        const auto& new_msgs = s.history.messages;
        if (new_msgs.size() < old_msgs.size() ||
            !std::equal(old_msgs.begin(), old_msgs.end(), new_msgs.begin()))
            fail(trace, "history is not append-only");
        for (std::size_t i = 1; i < new_msgs.size(); ++i)
            if (new_msgs[i].sent_at() < new_msgs[i - 1].sent_at())
                fail(trace, "history timestamps decrease");
    }

    SessionState root_;
    InterleavingReport report_;
};

}  // namespace ttharness::testing
