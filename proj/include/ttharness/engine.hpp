#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ttharness/dialogue.hpp"
#include "ttharness/timing.hpp"

namespace ttharness {

struct EngineConfig {
    DialogueMode mode = DialogueMode::burst;
    /// Batching window before the first unprocessed user message is sent to the model.
    std::chrono::milliseconds t1{3000};
    DelayModel delay;
    /// Allow one self-continuation query after a response when the user stayed silent.
    bool repoll = false;
    std::uint64_t seed = 0;

    friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

/// All state of one live session: the Input Listener's buffer, the Model Caller's
/// in-flight marker and the Output Sender's plan.
struct SessionState {
    std::string session_id;
    EngineConfig config;
    Dialogue history;              // append-only
    std::size_t primed_size = 0;   // messages present before the live interaction
    std::vector<Message> pending_inputs;
    bool in_flight = false;
    std::vector<Message> in_flight_batch;  // restored to pending_inputs if the query fails
    SendPlan send_plan;
    std::uint64_t plan_generation = 0;
    std::optional<TimePoint> batch_deadline;
    std::uint64_t queries_issued = 0;
    int self_continuations = 0;
    bool next_is_self_continuation = false;
    bool closed = false;
    std::optional<std::string> last_error;
    Rng rng;

    friend bool operator==(const SessionState&, const SessionState&) = default;

    [[nodiscard]] bool idle() const noexcept {
        return !in_flight && send_plan.empty() && !batch_deadline && pending_inputs.empty();
    }

    /// Messages appended after priming: the live interaction.
    [[nodiscard]] Dialogue suffix() const;
};

[[nodiscard]] SessionState make_session(std::string session_id, EngineConfig config,
                                        Dialogue primed_history = {});

struct QueryModel {
    std::uint64_t query_id;
    Dialogue context;              // history snapshot at emission
    std::vector<Message> batch;    // user messages consumed by this query
    bool self_continuation = false;

    friend bool operator==(const QueryModel&, const QueryModel&) = default;
};

struct DeliverMessage {
    Message message;
    std::uint64_t generation;
    TimePoint due_at;

    friend bool operator==(const DeliverMessage&, const DeliverMessage&) = default;
};

using EngineAction = std::variant<QueryModel, DeliverMessage>;
using Actions = std::vector<EngineAction>;

struct UserMessageEvent {
    Message message;
    TimePoint at;
};
struct ModelResponseEvent {
    std::vector<Message> proposed;
    TimePoint at;
};
struct ModelFailureEvent {
    std::string diagnostic;
    TimePoint at;
};
struct TickEvent {
    TimePoint at;
};
struct CloseEvent {
    TimePoint at;
};

using EngineEvent =
    std::variant<UserMessageEvent, ModelResponseEvent, ModelFailureEvent, TickEvent, CloseEvent>;

[[nodiscard]] TimePoint event_time(const EngineEvent& event);

/// Buffers a user message and opens the t1 window unless a window or query is open.
/// Throws ErrorCode::closed after close, ErrorCode::conflict for a second ping-pong input.
Actions on_user_message(SessionState& state, const Message& msg, TimePoint now);

/// Fires the batch query when its window has closed and delivers every due message.
Actions tick(SessionState& state, TimePoint now);

/// Supersedes unsent messages with the repaired, rescheduled proposal. Throws
/// ErrorCode::conflict when no query is outstanding. Dropped after close.
Actions on_model_response(SessionState& state, std::vector<Message> proposed, TimePoint now);

/// The outstanding query failed; the session records the diagnostic and retries the
/// pending batch after another t1 window.
Actions on_model_failure(SessionState& state, std::string diagnostic, TimePoint now);

Actions close_session(SessionState& state, TimePoint now);

/// Dispatches any event to the handlers above.
Actions apply(SessionState& state, const EngineEvent& event);

/// Earliest time at which tick() would act, if any.
[[nodiscard]] std::optional<TimePoint> next_wakeup(const SessionState& state);

}  // namespace ttharness
