#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ttharness/backend.hpp"
#include "ttharness/prompts.hpp"

namespace ttharness {

/// Classifies `User:` / `Response:` lines; burst mode also reads `[timestamp]`s.
/// Ping-pong output keeps the first message of each same-role run and drops a leading
/// response so roles alternate. Throws ErrorCode::parse when no line is recognizable.
[[nodiscard]] Dialogue parse_generated_dialogue(std::string_view text, DialogueMode mode,
                                                Timestamp synthesized_base = {},
                                                std::chrono::minutes display_offset = {});

/// Asks for `count` topics, strips list markers and markdown, and deduplicates by title
/// (case-insensitive), re-asking up to `max_attempts` times.
[[nodiscard]] std::vector<std::string> generate_topics(ChatBackend& backend, int count,
                                                       int max_attempts = 3,
                                                       const RetryPolicy& retry = {});

/// Topic list parsing, exposed for tests.
[[nodiscard]] std::vector<std::string> parse_topic_list(std::string_view text);

struct PseudoGenPlan {
    int m = 10;
    std::vector<std::string> topics;
    DialogueMode mode = DialogueMode::burst;
    Dialogue seed_history;
    std::string persona_preamble;
    int max_calls_per_topic = 5;
    GenerationParams params;

    /// m >= 1, topics non-empty and distinct.
    void check() const;
};

enum class TopicStatus { ok, failed_call_limit, backend_error, skipped };

[[nodiscard]] const char* to_string(TopicStatus status) noexcept;

struct GenerationCall {
    std::size_t topic_index;
    int call;                 // 1-based within the topic
    std::size_t turns_parsed; // complete turns in this call's output
    std::size_t accumulated;  // complete turns for the topic after this call
    bool truncated;
    std::string error;
};

struct TopicOutcome {
    std::string topic;
    TopicStatus status = TopicStatus::skipped;
    Dialogue dialogue;  // exactly m complete turns when status == ok
    int calls = 0;
    std::string error;
};

struct PseudoDialogueResult {
    std::vector<TopicOutcome> topics;
    Dialogue history;  // seed followed by each successful topic's dialogue
    std::vector<GenerationCall> log;

    [[nodiscard]] bool complete() const;
    [[nodiscard]] std::size_t total_turns() const;
};

/// For each topic: call the backend until at least m complete turns have accumulated, keep
/// the first m, then append them to the history used for the next topic.
[[nodiscard]] PseudoDialogueResult generate_pseudo_dialogue(ChatBackend& backend,
                                                            const PseudoGenPlan& plan,
                                                            const RetryPolicy& retry = {});

}  // namespace ttharness
