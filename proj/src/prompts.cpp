#include "ttharness/prompts.hpp"

#include "ttharness/error.hpp"
#include "ttharness/templates.gen.hpp"

namespace ttharness {

namespace {

constexpr std::string_view kHistoryMarker = "{Dialogue History}";

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

/// Swaps the instruction block (everything before the history marker) for a custom one.
std::string with_preamble(std::string_view tpl, const std::string& preamble) {
    if (preamble.empty()) return std::string(tpl);
    const auto pos = tpl.find(kHistoryMarker);
    std::string out = preamble;
    while (!out.empty() && out.back() == '\n') out.pop_back();
    out += "\n\n";
    out += tpl.substr(pos);
    return out;
}

TranscriptOptions prompt_options(const PersonaContext& ctx) {
    TranscriptOptions opts;
    opts.labels = TranscriptLabels::chatbot();
    opts.display_offset = ctx.display_offset;
    opts.timestamps = ctx.mode == DialogueMode::burst;
    return opts;
}

}  // namespace

std::string_view chatbot_template(DialogueMode mode) {
    return mode == DialogueMode::burst ? templates::chatbot_burst : templates::chatbot_ping_pong;
}

std::string_view pseudo_template(DialogueMode mode) {
    return mode == DialogueMode::burst ? templates::pseudo_burst : templates::pseudo_ping_pong;
}

std::string_view judge_template() { return templates::judge; }

std::string_view topic_template() { return templates::topics; }

std::string substitute(std::string_view text, std::string_view placeholder,
                       std::string_view value) {
    std::string out;
    std::size_t pos = 0;
    bool found = false;
    while (true) {
        const auto hit = text.find(placeholder, pos);
        if (hit == std::string_view::npos) break;
        out.append(text.substr(pos, hit - pos));
        out.append(value);
        pos = hit + placeholder.size();
        found = true;
    }
    if (!found)
        throw Error(ErrorCode::configuration,
                    "template has no " + std::string(placeholder) + " placeholder");
    out.append(text.substr(pos));
    return out;
}

std::string build_chatbot_prompt(const PersonaContext& ctx, std::span<const Message> pending) {
    if (ctx.history.messages.empty())
        throw Error(ErrorCode::configuration, "persona history is empty");
    const auto opts = prompt_options(ctx);
    std::string pending_lines;
    for (const Message& msg : pending) {
        if (msg.role() != Role::User)
            throw Error(ErrorCode::bad_request, "pending messages must come from the user");
        if (!pending_lines.empty()) pending_lines += '\n';
        pending_lines += render_line(msg, opts, *opts.timestamps);
    }
    std::string prompt = with_preamble(chatbot_template(ctx.mode), ctx.persona_preamble);
    prompt = substitute(prompt, kHistoryMarker, render_transcript(ctx.history, opts));
    if (pending_lines.empty()) {
        // Self-continuation: nothing new from the user, the history ends the context.
        return substitute(prompt, "\n\n{Pending}", "");
    }
    return substitute(prompt, "{Pending}", pending_lines);
}

std::string build_pseudo_prompt(const PersonaContext& ctx, std::string_view topic, int rounds,
                                const Dialogue& partial) {
    if (rounds < 1) throw Error(ErrorCode::domain, "round count must be at least 1");
    const auto opts = prompt_options(ctx);
    std::string transcript = render_transcript(ctx.history, opts);
    if (!partial.messages.empty()) {
        if (!transcript.empty()) transcript += '\n';
        transcript += render_transcript(partial, opts);
    }
    std::string prompt = with_preamble(pseudo_template(ctx.mode), ctx.persona_preamble);
    prompt = substitute(prompt, "{topic}", topic);
    prompt = substitute(prompt, "{rounds}", std::to_string(rounds));
    return substitute(prompt, kHistoryMarker, transcript);
}

std::string build_topic_prompt(int count) {
    if (count < 1) throw Error(ErrorCode::domain, "topic count must be at least 1");
    std::string prompt = substitute(topic_template(), "{count}", std::to_string(count));
    return substitute(prompt, "{topics}", count == 1 ? "topic" : "topics");
}

std::string build_judge_prompt(const Dialogue& conv1, const Dialogue& conv2) {
    if (conv1.messages.empty() || conv2.messages.empty())
        throw Error(ErrorCode::domain, "judge conversations must not be empty");
    TranscriptOptions opts;
    opts.labels = TranscriptLabels::judge();
    opts.timestamps = false;
    std::string prompt = substitute(judge_template(), "{Conversation_1}",
                                    render_transcript(conv1, opts));
    return substitute(prompt, "{Conversation_2}", render_transcript(conv2, opts));
}

BurstParse parse_burst_response(std::string_view text, TimePoint now,
                                std::chrono::minutes display_offset) {
    BurstParse result;
    const Timestamp fallback = floor_seconds(now);
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        if (line.empty()) continue;

        std::string_view body = line;
        if (body.starts_with("Response:")) body = trim(body.substr(9));
        if (body.size() > 21 && body.front() == '[' && body[20] == ']') {
            const auto ts = parse_timestamp(body.substr(1, 19), display_offset);
            const auto content = trim(body.substr(21));
            if (ts && !content.empty()) {
                result.messages.emplace_back(Role::System, *ts, std::string(content),
                                             Origin::model);
                continue;
            }
        }
        result.messages.emplace_back(Role::System, fallback, std::string(body.empty() ? line : body), Origin::model);
        ++result.salvaged;
    }
    return result;
}

}  // namespace ttharness
