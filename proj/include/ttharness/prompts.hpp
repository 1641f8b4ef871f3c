#pragma once

#include <chrono>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ttharness/dialogue.hpp"

namespace ttharness {

/// The target individual's chat records plus the role-play instruction block.
struct PersonaContext {
    Dialogue history;
    DialogueMode mode = DialogueMode::burst;
    /// Replaces the built-in instruction block when non-empty.
    std::string persona_preamble;
    std::chrono::minutes display_offset{0};
};

/// Raw template text as shipped in templates/.
[[nodiscard]] std::string_view chatbot_template(DialogueMode mode);
[[nodiscard]] std::string_view pseudo_template(DialogueMode mode);
[[nodiscard]] std::string_view judge_template();
[[nodiscard]] std::string_view topic_template();

/// Replaces every `{name}` occurrence. Throws if a placeholder is absent.
[[nodiscard]] std::string substitute(std::string_view text, std::string_view placeholder,
                                     std::string_view value);

/// Persona prompt with the history and the pending user lines, ending in "Response:".
[[nodiscard]] std::string build_chatbot_prompt(const PersonaContext& ctx,
                                               std::span<const Message> pending);

/// Pseudo-dialogue prompt for one topic. `partial` (the topic's dialogue so far) is shown
/// after the history without becoming part of it.
[[nodiscard]] std::string build_pseudo_prompt(const PersonaContext& ctx, std::string_view topic,
                                              int rounds, const Dialogue& partial = {});

[[nodiscard]] std::string build_topic_prompt(int count);

/// Both conversations are rendered with A/B labels and without timestamps.
[[nodiscard]] std::string build_judge_prompt(const Dialogue& conv1, const Dialogue& conv2);

inline constexpr std::string_view kOptionA =
    "(A) User B in Conversation 1 is AI, User B in Conversation 2 is Human";
inline constexpr std::string_view kOptionB =
    "(B) User B in Conversation 1 is Human, User B in Conversation 2 is AI";

struct BurstParse {
    std::vector<Message> messages;
    std::size_t salvaged = 0;
};

/// One system message per non-empty line. Lines without a valid `[timestamp]` keep their
/// text and are stamped `now` for later repair.
[[nodiscard]] BurstParse parse_burst_response(std::string_view text, TimePoint now,
                                              std::chrono::minutes display_offset = {});

}  // namespace ttharness
