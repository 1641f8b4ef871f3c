#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ttharness/chatbot.hpp"
#include "ttharness/engine.hpp"

namespace ttharness {

/// One message of the live interaction as seen on the stream. Sequence numbers count the
/// live suffix from 1.
struct Frame {
    std::uint64_t seq;
    Role role;
    Timestamp sent_at;
    std::string content;
};

/// A session driven by the wall clock. Engine events are applied one at a time under the
/// session lock; model queries run on a worker thread outside it.
class LiveSession {
public:
    using Clock = std::function<TimePoint()>;

    LiveSession(SessionState state, std::shared_ptr<const Chatbot> chatbot, EventSink sink = {},
                Clock clock = system_now);
    ~LiveSession();

    LiveSession(const LiveSession&) = delete;
    LiveSession& operator=(const LiveSession&) = delete;

    /// Throws ErrorCode::closed once the session has ended.
    void submit(std::string content);
    void close();

    [[nodiscard]] std::vector<Frame> frames_after(std::uint64_t seq) const;
    /// Blocks until a frame newer than `seq` exists, the session closes, or the timeout passes.
    [[nodiscard]] std::vector<Frame> wait_frames(std::uint64_t seq,
                                                 std::chrono::milliseconds timeout) const;

    [[nodiscard]] SessionState snapshot() const;
    [[nodiscard]] bool closed() const;
    /// True when nothing is buffered, scheduled or in flight.
    [[nodiscard]] bool idle() const;

private:
    void apply_locked(const EngineEvent& event);
    void scheduler_loop();
    void worker_loop(QueryModel query);
    void launch_locked(QueryModel query);

    SessionState state_;
    std::shared_ptr<const Chatbot> chatbot_;
    EventSink sink_;
    Clock clock_;

    mutable std::mutex mutex_;
    mutable std::condition_variable changed_;
    bool stopping_ = false;
    bool worker_busy_ = false;
    std::optional<QueryModel> pending_query_;
    std::thread worker_;
    std::thread scheduler_;
};

}  // namespace ttharness
