#include "ttharness/live_session.hpp"

#include "ttharness/error.hpp"

namespace ttharness {

LiveSession::LiveSession(SessionState state, std::shared_ptr<const Chatbot> chatbot,
                         EventSink sink, Clock clock)
    : state_(std::move(state)),
      chatbot_(std::move(chatbot)),
      sink_(std::move(sink)),
      clock_(std::move(clock)) {
    scheduler_ = std::thread([this] { scheduler_loop(); });
}

LiveSession::~LiveSession() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    changed_.notify_all();
    if (scheduler_.joinable()) scheduler_.join();
    if (worker_.joinable()) worker_.join();
}

void LiveSession::apply_locked(const EngineEvent& event) {
    auto actions = apply(state_, event);
    if (sink_) sink_(event);
    for (auto& action : actions)
        if (auto* query = std::get_if<QueryModel>(&action)) launch_locked(std::move(*query));
    changed_.notify_all();
}

void LiveSession::launch_locked(QueryModel query) {
    // Single flight: the engine never emits a second query while one is outstanding, and a
    // query emitted from a response is picked up by the same worker.
    if (worker_busy_) {
        pending_query_ = std::move(query);
        return;
    }
    if (worker_.joinable()) worker_.join();
    worker_busy_ = true;
    worker_ = std::thread([this, q = std::move(query)]() mutable { worker_loop(std::move(q)); });
}

void LiveSession::worker_loop(QueryModel query) {
    while (true) {
        EngineEvent result = TickEvent{};
        try {
            const auto reply = chatbot_->respond(query, clock_(), state_.session_id);
            result = ModelResponseEvent{reply.proposed, clock_()};
        } catch (const Error& e) {
            result = ModelFailureEvent{e.what(), clock_()};
        } catch (const std::exception& e) {
            result = ModelFailureEvent{e.what(), clock_()};
        }
        std::lock_guard lock(mutex_);
        if (stopping_) {
            worker_busy_ = false;
            return;
        }
        apply_locked(result);
        if (!pending_query_) {
            worker_busy_ = false;
            return;
        }
        query = std::move(*pending_query_);
        pending_query_.reset();
    }
}

void LiveSession::scheduler_loop() {
    std::unique_lock lock(mutex_);
    while (!stopping_ && !state_.closed) {
        const auto wake = next_wakeup(state_);
        if (!wake) {
            changed_.wait(lock);
            continue;
        }
        const TimePoint now = clock_();
        if (*wake > now) {
            changed_.wait_for(lock, *wake - now);
            continue;
        }
        apply_locked(TickEvent{now});
    }
}

void LiveSession::submit(std::string content) {
    std::lock_guard lock(mutex_);
    const TimePoint now = clock_();
    apply_locked(UserMessageEvent{Message(Role::User, floor_seconds(now), std::move(content)), now});
}

void LiveSession::close() {
    std::lock_guard lock(mutex_);
    if (state_.closed) return;
    apply_locked(CloseEvent{clock_()});
}

std::vector<Frame> LiveSession::frames_after(std::uint64_t seq) const {
    std::lock_guard lock(mutex_);
    std::vector<Frame> frames;
    const auto& msgs = state_.history.messages;
    for (std::size_t i = state_.primed_size + seq; i < msgs.size(); ++i) {
        frames.push_back({static_cast<std::uint64_t>(i - state_.primed_size + 1), msgs[i].role(),
                          msgs[i].sent_at(), msgs[i].content()});
    }
    return frames;
}

std::vector<Frame> LiveSession::wait_frames(std::uint64_t seq,
                                            std::chrono::milliseconds timeout) const {
    {
        std::unique_lock lock(mutex_);
        changed_.wait_for(lock, timeout, [&] {
            return state_.closed || stopping_ ||
                   state_.history.messages.size() > state_.primed_size + seq;
        });
    }
    return frames_after(seq);
}

SessionState LiveSession::snapshot() const {
    std::lock_guard lock(mutex_);
    return state_;
}

bool LiveSession::closed() const {
    std::lock_guard lock(mutex_);
    return state_.closed;
}

bool LiveSession::idle() const {
    std::lock_guard lock(mutex_);
    return state_.idle() && !worker_busy_;
}

}  // namespace ttharness
