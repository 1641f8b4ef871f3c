#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ttharness/clock.hpp"

namespace ttharness {

enum class Role { User, System };
enum class Origin { human, model, generated };
enum class DialogueMode { ping_pong, burst };

[[nodiscard]] const char* to_string(Role role) noexcept;
[[nodiscard]] const char* to_string(Origin origin) noexcept;
[[nodiscard]] const char* to_string(DialogueMode mode) noexcept;
[[nodiscard]] Origin origin_from_string(std::string_view text);
[[nodiscard]] DialogueMode mode_from_string(std::string_view text);

/// One timestamped utterance. Content is a single non-blank line.
class Message {
public:
    Message(Role role, Timestamp sent_at, std::string content, Origin origin = Origin::human);

    [[nodiscard]] Role role() const noexcept { return role_; }
    [[nodiscard]] Timestamp sent_at() const noexcept { return sent_at_; }
    [[nodiscard]] const std::string& content() const noexcept { return content_; }
    [[nodiscard]] Origin origin() const noexcept { return origin_; }

    [[nodiscard]] Message with_sent_at(Timestamp ts) const;

    friend bool operator==(const Message&, const Message&) = default;

private:
    Role role_;
    Timestamp sent_at_;
    std::string content_;
    Origin origin_;
};

struct Dialogue {
    std::vector<Message> messages;
    DialogueMode mode = DialogueMode::burst;
    std::optional<std::string> topic;

    friend bool operator==(const Dialogue&, const Dialogue&) = default;
};

/// Throws ErrorCode::ordering if timestamps decrease.
void check_ordering(std::span<const Message> messages);

/// Throws if timestamps decrease or, in ping-pong mode, roles fail to alternate from User.
void validate(const Dialogue& dialogue);

struct BurstTurn {
    std::vector<Message> user_run;
    std::vector<Message> system_run;

    [[nodiscard]] bool complete() const noexcept {
        return !user_run.empty() && !system_run.empty();
    }

    friend bool operator==(const BurstTurn&, const BurstTurn&) = default;
};

/// Splits a burst dialogue into maximal user runs each followed by the system run that
/// answers it. A leading system run becomes a turn with an empty user run; a trailing
/// user run becomes a turn with an empty system run. Both are incomplete.
[[nodiscard]] std::vector<BurstTurn> segment_burst_turns(const Dialogue& dialogue);

/// Inverse of segmentation: the runs concatenated in order.
[[nodiscard]] std::vector<Message> flatten(std::span<const BurstTurn> turns);

struct ReviewFlag {
    std::size_t message_index;  // index into the converted dialogue
    std::string reason;

    friend bool operator==(const ReviewFlag&, const ReviewFlag&) = default;
};

struct PingPongConversion {
    Dialogue dialogue;
    std::vector<ReviewFlag> flags;
};

/// Keeps the first message of every same-role run. Retained messages with fewer than
/// `min_chars` characters are flagged as candidates for manual removal.
[[nodiscard]] PingPongConversion to_ping_pong(const Dialogue& dialogue, std::size_t min_chars = 2);

/// Ping-pong: adjacent (User, System) pairs. Burst: complete burst turns.
[[nodiscard]] std::size_t count_turns(const Dialogue& dialogue);

/// Keeps the last `m` complete turns (fewer if not available). Burst turns keep their
/// runs intact; ping-pong keeps the (User, System) pairs.
[[nodiscard]] Dialogue last_turns(const Dialogue& dialogue, std::size_t m);

/// Keeps the first `m` complete turns.
[[nodiscard]] Dialogue first_turns(const Dialogue& dialogue, std::size_t m);

/// Complete turns of either mode, as (user run, system run) pairs.
[[nodiscard]] std::vector<BurstTurn> complete_turns(const Dialogue& dialogue);

/// Unicode scalar values in a UTF-8 string.
[[nodiscard]] std::size_t char_count(std::string_view utf8) noexcept;

struct TranscriptLabels {
    std::string user = "User";
    std::string system = "Response";

    [[nodiscard]] static TranscriptLabels chatbot() { return {}; }
    [[nodiscard]] static TranscriptLabels judge() { return {"A", "B"}; }
};

struct TranscriptOptions {
    TranscriptLabels labels;
    std::chrono::minutes display_offset{0};
    /// Ping-pong transcripts carry no timestamps; message i gets base + i seconds.
    Timestamp synthesized_base{};
    Origin origin = Origin::human;
    /// Overrides the mode: burst renders timestamps, ping-pong does not.
    std::optional<bool> timestamps;
};

/// Lines of `Label: [YYYY-MM-DD hh:mm:ss] content` (burst) or `Label: content` (ping-pong).
/// Blank lines are skipped.
[[nodiscard]] Dialogue parse_transcript(std::string_view text, DialogueMode mode,
                                        const TranscriptOptions& options = {});

[[nodiscard]] std::string render_transcript(const Dialogue& dialogue,
                                            const TranscriptOptions& options = {});

[[nodiscard]] std::string render_line(const Message& message, const TranscriptOptions& options,
                                      bool timestamps);

}  // namespace ttharness
