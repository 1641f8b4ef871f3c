#include "ttharness/dialogue.hpp"

#include <algorithm>

#include "ttharness/error.hpp"

namespace ttharness {

namespace {

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; });
}

}  // namespace

const char* to_string(Role role) noexcept {
    return role == Role::User ? "user" : "system";
}

const char* to_string(Origin origin) noexcept {
    switch (origin) {
        case Origin::human: return "human";
        case Origin::model: return "model";
        case Origin::generated: return "generated";
    }
    return "human";
}

const char* to_string(DialogueMode mode) noexcept {
    return mode == DialogueMode::burst ? "burst" : "ping_pong";
}

Origin origin_from_string(std::string_view text) {
    if (text == "human") return Origin::human;
    if (text == "model") return Origin::model;
    if (text == "generated") return Origin::generated;
    throw Error(ErrorCode::bad_request, "unknown origin '" + std::string(text) + "'");
}

DialogueMode mode_from_string(std::string_view text) {
    if (text == "burst") return DialogueMode::burst;
    if (text == "ping_pong" || text == "ping-pong" || text == "pp") return DialogueMode::ping_pong;
    throw Error(ErrorCode::bad_request, "unknown dialogue mode '" + std::string(text) + "'");
}

Message::Message(Role role, Timestamp sent_at, std::string content, Origin origin)
    : role_(role), sent_at_(sent_at), content_(std::move(content)), origin_(origin) {
    if (is_blank(content_)) throw Error(ErrorCode::bad_request, "message content is empty");
    if (content_.find('\n') != std::string::npos)
        throw Error(ErrorCode::bad_request, "message content spans multiple lines");
}

Message Message::with_sent_at(Timestamp ts) const {
    Message copy = *this;
    copy.sent_at_ = ts;
    return copy;
}

void check_ordering(std::span<const Message> messages) {
    for (std::size_t i = 1; i < messages.size(); ++i) {
        if (messages[i].sent_at() < messages[i - 1].sent_at())
            throw Error(ErrorCode::ordering,
                        "message " + std::to_string(i) + " is earlier than its predecessor");
    }
}

void validate(const Dialogue& dialogue) {
    check_ordering(dialogue.messages);
    if (dialogue.mode != DialogueMode::ping_pong) return;
    for (std::size_t i = 0; i < dialogue.messages.size(); ++i) {
        const Role expected = i % 2 == 0 ? Role::User : Role::System;
        if (dialogue.messages[i].role() != expected)
            throw Error(ErrorCode::ordering,
                        "ping-pong roles do not alternate at message " + std::to_string(i));
    }
}

std::vector<BurstTurn> segment_burst_turns(const Dialogue& dialogue) {
    check_ordering(dialogue.messages);
    std::vector<BurstTurn> turns;
    for (const Message& msg : dialogue.messages) {
        if (msg.role() == Role::User) {
            if (turns.empty() || !turns.back().system_run.empty()) turns.emplace_back();
            turns.back().user_run.push_back(msg);
        } else {
            if (turns.empty()) turns.emplace_back();
            turns.back().system_run.push_back(msg);
        }
    }
    return turns;
}

std::vector<Message> flatten(std::span<const BurstTurn> turns) {
    std::vector<Message> out;
    for (const BurstTurn& t : turns) {
        out.insert(out.end(), t.user_run.begin(), t.user_run.end());
        out.insert(out.end(), t.system_run.begin(), t.system_run.end());
    }
    return out;
}

PingPongConversion to_ping_pong(const Dialogue& dialogue, std::size_t min_chars) {
    PingPongConversion result;
    result.dialogue.mode = DialogueMode::ping_pong;
    result.dialogue.topic = dialogue.topic;
    for (std::size_t i = 0; i < dialogue.messages.size(); ++i) {
        const Message& msg = dialogue.messages[i];
        if (i > 0 && dialogue.messages[i - 1].role() == msg.role()) continue;
        if (char_count(msg.content()) < min_chars) {
            result.flags.push_back({result.dialogue.messages.size(),
                                    "shorter than " + std::to_string(min_chars) + " characters"});
        }
        result.dialogue.messages.push_back(msg);
    }
    return result;
}

std::vector<BurstTurn> complete_turns(const Dialogue& dialogue) {
    if (dialogue.mode == DialogueMode::burst) {
        auto turns = segment_burst_turns(dialogue);
        std::erase_if(turns, [](const BurstTurn& t) { return !t.complete(); });
        return turns;
    }
    std::vector<BurstTurn> pairs;
    const auto& msgs = dialogue.messages;
    for (std::size_t i = 0; i + 1 < msgs.size(); ++i) {
        if (msgs[i].role() == Role::User && msgs[i + 1].role() == Role::System) {
            pairs.push_back({{msgs[i]}, {msgs[i + 1]}});
            ++i;
        }
    }
    return pairs;
}

std::size_t count_turns(const Dialogue& dialogue) {
    return complete_turns(dialogue).size();
}

namespace {

Dialogue slice_turns(const Dialogue& dialogue, std::size_t m, bool from_end) {
    auto turns = complete_turns(dialogue);
    if (turns.size() > m) {
        if (from_end)
            turns.erase(turns.begin(), turns.end() - static_cast<std::ptrdiff_t>(m));
        else
            turns.resize(m);
    }
    return Dialogue{flatten(turns), dialogue.mode, dialogue.topic};
}

}  // namespace

Dialogue last_turns(const Dialogue& dialogue, std::size_t m) {
    return slice_turns(dialogue, m, true);
}

Dialogue first_turns(const Dialogue& dialogue, std::size_t m) {
    return slice_turns(dialogue, m, false);
}

std::size_t char_count(std::string_view utf8) noexcept {
    return static_cast<std::size_t>(std::count_if(utf8.begin(), utf8.end(), [](char c) {
        return (static_cast<unsigned char>(c) & 0xC0u) != 0x80u;
    }));
}

std::string render_line(const Message& message, const TranscriptOptions& options,
                        bool timestamps) {
    std::string line =
        message.role() == Role::User ? options.labels.user : options.labels.system;
    line += ": ";
    if (timestamps) {
        line += '[';
        line += format_timestamp(message.sent_at(), options.display_offset);
        line += "] ";
    }
    line += message.content();
    return line;
}

std::string render_transcript(const Dialogue& dialogue, const TranscriptOptions& options) {
    const bool timestamps = options.timestamps.value_or(dialogue.mode == DialogueMode::burst);
    std::string out;
    for (std::size_t i = 0; i < dialogue.messages.size(); ++i) {
        if (i > 0) out += '\n';
        out += render_line(dialogue.messages[i], options, timestamps);
    }
    return out;
}

Dialogue parse_transcript(std::string_view text, DialogueMode mode,
                          const TranscriptOptions& options) {
    const bool timestamps = options.timestamps.value_or(mode == DialogueMode::burst);
    Dialogue dialogue;
    dialogue.mode = mode;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (is_blank(line)) {
            if (end == text.size()) break;
            continue;
        }

        const std::size_t colon = line.find(':');
        if (colon == std::string_view::npos) throw ParseError(line_no, "missing role label");
        const std::string_view label = line.substr(0, colon);
        Role role;
        if (label == options.labels.user)
            role = Role::User;
        else if (label == options.labels.system)
            role = Role::System;
        else
            throw ParseError(line_no, "unknown role label '" + std::string(label) + "'");

        std::string_view rest = line.substr(colon + 1);
        if (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);

        Timestamp sent_at =
            options.synthesized_base + std::chrono::seconds{dialogue.messages.size()};
        if (timestamps) {
            if (rest.size() < 21 || rest.front() != '[' || rest[20] != ']')
                throw ParseError(line_no, "expected [YYYY-MM-DD hh:mm:ss]");
            auto ts = parse_timestamp(rest.substr(1, 19), options.display_offset);
            if (!ts) throw ParseError(line_no, "malformed timestamp '" +
                                                   std::string(rest.substr(1, 19)) + "'");
            sent_at = *ts;
            rest.remove_prefix(21);
            if (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
        }
        if (is_blank(rest)) throw ParseError(line_no, "empty message content");
        dialogue.messages.emplace_back(role, sent_at, std::string(rest), options.origin);
        if (end == text.size()) break;
    }
    return dialogue;
}

}  // namespace ttharness
