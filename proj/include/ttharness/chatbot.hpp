#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ttharness/backend.hpp"
#include "ttharness/engine.hpp"
#include "ttharness/prompts.hpp"

namespace ttharness {

struct ChatbotReply {
    std::vector<Message> proposed;
    std::size_t salvaged = 0;
    std::string prompt;
    std::string raw;
};

/// Answers engine queries with a persona prompt sent to a backend.
class Chatbot {
public:
    Chatbot(std::shared_ptr<ChatBackend> backend, PersonaContext persona,
            GenerationParams params = {}, RetryPolicy retry = {});

    /// `query.context` is the full session history; the batch is shown as the pending lines.
    [[nodiscard]] ChatbotReply respond(const QueryModel& query, TimePoint now,
                                       const std::string& session_id = {}) const;

    [[nodiscard]] const PersonaContext& persona() const noexcept { return persona_; }
    [[nodiscard]] ChatBackend& backend() const noexcept { return *backend_; }

private:
    std::shared_ptr<ChatBackend> backend_;
    PersonaContext persona_;
    GenerationParams params_;
    RetryPolicy retry_;
};

/// Source of the live side of the final turns.
class HumanEndpoint {
public:
    virtual ~HumanEndpoint() = default;
    /// Next burst of user lines given what the human has seen so far; nullopt = disconnect.
    [[nodiscard]] virtual std::optional<std::vector<std::string>> next_burst(
        const Dialogue& seen) = 0;
};

/// Plays back bursts from a file: bursts separated by blank lines, one message per line.
/// A JSON array of arrays of strings is accepted too.
class ScriptedHuman final : public HumanEndpoint {
public:
    explicit ScriptedHuman(std::vector<std::vector<std::string>> bursts);
    [[nodiscard]] static ScriptedHuman from_file(const std::filesystem::path& path);

    std::optional<std::vector<std::string>> next_burst(const Dialogue& seen) override;

private:
    std::vector<std::vector<std::string>> bursts_;
    std::size_t cursor_ = 0;
};

struct DriveOptions {
    std::chrono::milliseconds think_time{2000};   // before the first line of a burst
    std::chrono::milliseconds typing_gap{800};    // between lines of a burst
    std::chrono::milliseconds model_latency{1500};
};

struct FinalTurns {
    Dialogue suffix;          // the last m complete turns of the live interaction
    bool complete = false;    // false when the human disconnected first
    std::size_t turns = 0;
    TimePoint finished_at{};
};

using EventSink = std::function<void(const EngineEvent&)>;

/// Drives a primed session against a human endpoint on a simulated clock until the live
/// suffix holds `m` complete turns. Every applied event is passed to `sink`.
FinalTurns run_final_turns(SessionState& state, const Chatbot& chatbot, HumanEndpoint& human,
                           std::size_t m, TimePoint start, const DriveOptions& options = {},
                           const EventSink& sink = {});

}  // namespace ttharness
