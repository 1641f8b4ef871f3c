#include "ttharness/engine.hpp"

#include <algorithm>

#include "ttharness/error.hpp"

namespace ttharness {

namespace {

void append_history(SessionState& state, const Message& msg) {
    auto& msgs = state.history.messages;
    const Timestamp floor_ts = msgs.empty() ? msg.sent_at() : msgs.back().sent_at();
    msgs.push_back(msg.with_sent_at(std::max(msg.sent_at(), floor_ts)));
}

QueryModel start_query(SessionState& state) {
    QueryModel query;
    query.query_id = ++state.queries_issued;
    query.context = state.history;
    query.batch = std::move(state.pending_inputs);
    state.in_flight_batch = query.batch;
    query.self_continuation = state.next_is_self_continuation && query.batch.empty();
    if (query.self_continuation) ++state.self_continuations;
    state.pending_inputs.clear();
    state.next_is_self_continuation = false;
    state.in_flight = true;
    state.batch_deadline.reset();
    return query;
}

}  // namespace

Dialogue SessionState::suffix() const {
    Dialogue out;
    out.mode = history.mode;
    out.topic = history.topic;
    out.messages.assign(history.messages.begin() + static_cast<std::ptrdiff_t>(primed_size),
                        history.messages.end());
    return out;
}

SessionState make_session(std::string session_id, EngineConfig config, Dialogue primed_history) {
    config.delay.check();
    if (config.t1.count() < 0) throw Error(ErrorCode::configuration, "engine.t1_s is negative");
    check_ordering(primed_history.messages);
    SessionState state;
    state.session_id = std::move(session_id);
    state.config = config;
    state.history = std::move(primed_history);
    state.history.mode = config.mode;
    state.primed_size = state.history.messages.size();
    state.rng.seed(config.seed);
    return state;
}

TimePoint event_time(const EngineEvent& event) {
    return std::visit([](const auto& e) { return e.at; }, event);
}

Actions on_user_message(SessionState& state, const Message& msg, TimePoint now) {
    if (state.closed) throw Error(ErrorCode::closed, "session " + state.session_id + " is closed");
    if (msg.role() != Role::User)
        throw Error(ErrorCode::bad_request, "only user messages can be submitted");
    if (state.config.mode == DialogueMode::ping_pong &&
        (!state.pending_inputs.empty() || state.in_flight || !state.send_plan.empty()))
        throw Error(ErrorCode::conflict, "ping-pong session is awaiting the response");

    const Message stamped = msg.with_sent_at(floor_seconds(now));
    append_history(state, stamped);
    state.pending_inputs.push_back(state.history.messages.back());
    state.self_continuations = 0;
    state.next_is_self_continuation = false;
    if (!state.in_flight && !state.batch_deadline) state.batch_deadline = now + state.config.t1;
    return {};
}

Actions tick(SessionState& state, TimePoint now) {
    Actions actions;
    if (state.closed) return actions;

    std::size_t delivered = 0;
    for (const ScheduledMessage& entry : state.send_plan) {
        if (entry.due_at > now) break;
        const Message sent = entry.message.with_sent_at(floor_seconds(entry.due_at));
        append_history(state, sent);
        actions.emplace_back(
            DeliverMessage{state.history.messages.back(), state.plan_generation, entry.due_at});
        ++delivered;
    }
    state.send_plan.erase(state.send_plan.begin(),
                          state.send_plan.begin() + static_cast<std::ptrdiff_t>(delivered));

    if (state.batch_deadline && *state.batch_deadline <= now && !state.in_flight)
        actions.emplace_back(start_query(state));
    return actions;
}

Actions on_model_response(SessionState& state, std::vector<Message> proposed, TimePoint now) {
    if (state.closed) return {};
    if (!state.in_flight) throw Error(ErrorCode::conflict, "no model query is outstanding");
    state.in_flight = false;
    state.in_flight_batch.clear();
    state.last_error.reset();

    if (state.config.mode == DialogueMode::ping_pong && !proposed.empty()) {
        proposed.erase(proposed.begin() + 1, proposed.end());
        proposed.front() = proposed.front().with_sent_at(floor_seconds(now));
    }
    if (!proposed.empty()) {
        const auto repaired =
            validate_and_resample(proposed, now, state.config.delay, state.rng);
        state.send_plan = schedule_outputs(repaired, now, state.config.delay, state.rng);
        ++state.plan_generation;
    }

    Actions actions;
    if (!state.pending_inputs.empty()) {
        actions.emplace_back(start_query(state));
    } else if (state.config.repoll && state.self_continuations < 1 && !proposed.empty()) {
        state.batch_deadline = now + state.config.t1;
        state.next_is_self_continuation = true;
    }
    return actions;
}

Actions on_model_failure(SessionState& state, std::string diagnostic, TimePoint now) {
    if (state.closed) return {};
    if (!state.in_flight) throw Error(ErrorCode::conflict, "no model query is outstanding");
    state.in_flight = false;
    state.pending_inputs.insert(state.pending_inputs.begin(), state.in_flight_batch.begin(),
                                state.in_flight_batch.end());
    state.in_flight_batch.clear();
    state.last_error = std::move(diagnostic);
    if (!state.pending_inputs.empty()) state.batch_deadline = now + state.config.t1;
    return {};
}

Actions close_session(SessionState& state, TimePoint) {
    state.closed = true;
    state.in_flight = false;
    state.in_flight_batch.clear();
    state.send_plan.clear();
    state.pending_inputs.clear();
    state.batch_deadline.reset();
    state.next_is_self_continuation = false;
    return {};
}

Actions apply(SessionState& state, const EngineEvent& event) {
    return std::visit(
        [&state](const auto& e) -> Actions {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, UserMessageEvent>)
                return on_user_message(state, e.message, e.at);
            else if constexpr (std::is_same_v<T, ModelResponseEvent>)
                return on_model_response(state, e.proposed, e.at);
            else if constexpr (std::is_same_v<T, ModelFailureEvent>)
                return on_model_failure(state, e.diagnostic, e.at);
            else if constexpr (std::is_same_v<T, TickEvent>)
                return tick(state, e.at);
            else
                return close_session(state, e.at);
        },
        event);
}

std::optional<TimePoint> next_wakeup(const SessionState& state) {
    if (state.closed) return std::nullopt;
    std::optional<TimePoint> wake;
    if (!state.send_plan.empty()) wake = state.send_plan.front().due_at;
    if (state.batch_deadline && !state.in_flight)
        wake = wake ? std::min(*wake, *state.batch_deadline) : *state.batch_deadline;
    return wake;
}

}  // namespace ttharness
