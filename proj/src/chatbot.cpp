#include "ttharness/chatbot.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ttharness {

Chatbot::Chatbot(std::shared_ptr<ChatBackend> backend, PersonaContext persona,
                 GenerationParams params, RetryPolicy retry)
    : backend_(std::move(backend)),
      persona_(std::move(persona)),
      params_(std::move(params)),
      retry_(std::move(retry)) {
    params_.check();
}

ChatbotReply Chatbot::respond(const QueryModel& query, TimePoint now,
                              const std::string& session_id) const {
    PersonaContext ctx = persona_;
    ctx.history = query.context;
    // The batch was appended to the history on arrival; show it as the pending lines.
    auto& msgs = ctx.history.messages;
    for (const Message& pending : query.batch) {
        auto it = std::find(msgs.rbegin(), msgs.rend(), pending);
        if (it != msgs.rend()) msgs.erase(std::next(it).base());
    }
    ChatbotReply reply;
    reply.prompt = build_chatbot_prompt(ctx, query.batch);
    reply.raw = complete_with_retry(*backend_, {reply.prompt, params_, session_id}, retry_).text;

    auto parsed = parse_burst_response(reply.raw, now, persona_.display_offset);
    if (persona_.mode == DialogueMode::ping_pong) {
        if (!parsed.messages.empty()) {
            const Message& first = parsed.messages.front();
            std::string content = first.content();
            reply.proposed.emplace_back(Role::System, floor_seconds(now), std::move(content),
                                        Origin::model);
        }
        return reply;
    }
    reply.proposed = std::move(parsed.messages);
    reply.salvaged = parsed.salvaged;
    return reply;
}

ScriptedHuman::ScriptedHuman(std::vector<std::vector<std::string>> bursts)
    : bursts_(std::move(bursts)) {}

ScriptedHuman ScriptedHuman::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::not_found, "cannot open human script " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    std::vector<std::vector<std::string>> bursts;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '[') {
        try {
            bursts = nlohmann::json::parse(text).get<std::vector<std::vector<std::string>>>();
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::parse, path.string() + ": " + e.what());
        }
        return ScriptedHuman(std::move(bursts));
    }
    std::istringstream lines(text);
    std::string line;
    std::vector<std::string> current;
    while (std::getline(lines, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) {
            if (!current.empty()) bursts.push_back(std::move(current));
            current.clear();
            continue;
        }
        current.push_back(line);
    }
    if (!current.empty()) bursts.push_back(std::move(current));
    return ScriptedHuman(std::move(bursts));
}

std::optional<std::vector<std::string>> ScriptedHuman::next_burst(const Dialogue&) {
    if (cursor_ >= bursts_.size()) return std::nullopt;
    return bursts_[cursor_++];
}

namespace {

/// Simulated clock around one session: the model answers after a fixed latency.
class Simulation {
public:
    Simulation(SessionState& state, const Chatbot& chatbot, const DriveOptions& options,
               const EventSink& sink, TimePoint start)
        : state_(state), chatbot_(chatbot), options_(options), sink_(sink), now_(start) {}

    TimePoint now() const { return now_; }

    void user(std::string text, TimePoint at) {
        advance(at);
        now_ = at;
        apply(UserMessageEvent{Message(Role::User, floor_seconds(at), std::move(text)), at});
    }

    /// Processes timed work up to `limit` (or until the session goes quiet).
    void advance(std::optional<TimePoint> limit) {
        while (true) {
            std::optional<TimePoint> wake = next_wakeup(state_);
            if (response_due_ && (!wake || *response_due_ <= *wake)) {
                if (limit && *response_due_ > *limit) return;
                now_ = *response_due_;
                response_due_.reset();
                // Applying the response may issue the next query and refill response_.
                EngineEvent event = std::move(*response_);
                response_.reset();
                apply(std::move(event));
                continue;
            }
            if (!wake || (limit && *wake > *limit)) return;
            now_ = std::max(now_, *wake);
            apply(TickEvent{now_});
        }
    }

private:
    void apply(EngineEvent event) {
        auto actions = ttharness::apply(state_, event);
        if (sink_) sink_(event);
        for (auto& action : actions) {
            if (auto* query = std::get_if<QueryModel>(&action)) issue(*query);
        }
    }

    void issue(const QueryModel& query) {
        const TimePoint done = now_ + options_.model_latency;
        try {
            auto reply = chatbot_.respond(query, done, state_.session_id);
            response_ = ModelResponseEvent{std::move(reply.proposed), done};
            failures_ = 0;
        } catch (const Error& e) {
            // Give up rather than retry a dead backend forever on the simulated clock.
            if (++failures_ >= kMaxConsecutiveFailures) throw;
            response_ = ModelFailureEvent{e.what(), done};
        }
        response_due_ = done;
    }

    SessionState& state_;
    const Chatbot& chatbot_;
    const DriveOptions& options_;
    const EventSink& sink_;
    TimePoint now_;
    std::optional<TimePoint> response_due_;
    std::optional<EngineEvent> response_;
    int failures_ = 0;
    static constexpr int kMaxConsecutiveFailures = 3;
};

}  // namespace

FinalTurns run_final_turns(SessionState& state, const Chatbot& chatbot, HumanEndpoint& human,
                           std::size_t m, TimePoint start, const DriveOptions& options,
                           const EventSink& sink) {
    FinalTurns result;
    Simulation sim(state, chatbot, options, sink, start);
    while (count_turns(state.suffix()) < m) {
        auto burst = human.next_burst(state.suffix());
        if (!burst || burst->empty()) break;
        if (state.config.mode == DialogueMode::ping_pong) burst->resize(1);
        TimePoint at = sim.now();
        for (std::size_t i = 0; i < burst->size(); ++i) {
            at += i == 0 ? options.think_time : options.typing_gap;
            sim.user((*burst)[i], at);
        }
        sim.advance(std::nullopt);
    }
    const Dialogue suffix = state.suffix();
    result.turns = std::min(count_turns(suffix), m);
    result.complete = result.turns == m;
    result.suffix = last_turns(suffix, m);
    result.finished_at = sim.now();
    return result;
}

}  // namespace ttharness
