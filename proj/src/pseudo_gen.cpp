#include "ttharness/pseudo_gen.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "ttharness/error.hpp"

namespace ttharness {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool starts_with_label(std::string_view line, std::string_view label, std::string_view& rest) {
    if (line.size() <= label.size() || line[label.size()] != ':') return false;
    if (lower(line.substr(0, label.size())) != lower(label)) return false;
    rest = trim(line.substr(label.size() + 1));
    return true;
}

Timestamp last_timestamp(const Dialogue& d, Timestamp fallback) {
    return d.messages.empty() ? fallback : d.messages.back().sent_at();
}

/// Moves a generated chunk forward so it does not start before `floor_ts`.
std::vector<Message> shift_after(std::vector<Message> msgs, Timestamp floor_ts) {
    if (msgs.empty() || msgs.front().sent_at() >= floor_ts) return msgs;
    const auto offset = floor_ts - msgs.front().sent_at();
    for (Message& m : msgs) m = m.with_sent_at(m.sent_at() + offset);
    return msgs;
}

}  // namespace

const char* to_string(TopicStatus status) noexcept {
    switch (status) {
        case TopicStatus::ok: return "ok";
        case TopicStatus::failed_call_limit: return "failed_call_limit";
        case TopicStatus::backend_error: return "backend_error";
        case TopicStatus::skipped: return "skipped";
    }
    return "skipped";
}

Dialogue parse_generated_dialogue(std::string_view text, DialogueMode mode,
                                  Timestamp synthesized_base, std::chrono::minutes display_offset) {
    Dialogue raw;
    raw.mode = mode;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = trim(text.substr(pos, end - pos));
        pos = end + 1;

        std::string_view rest;
        Role role;
        if (starts_with_label(line, "User", rest))
            role = Role::User;
        else if (starts_with_label(line, "Response", rest))
            role = Role::System;
        else
            continue;

        const Timestamp prev = last_timestamp(raw, synthesized_base);
        Timestamp ts = raw.messages.empty() ? synthesized_base : prev + std::chrono::seconds{1};
        if (mode == DialogueMode::burst && rest.size() > 21 && rest.front() == '[' &&
            rest[20] == ']') {
            if (auto parsed = parse_timestamp(rest.substr(1, 19), display_offset)) {
                ts = std::max(*parsed, prev);
                rest = trim(rest.substr(21));
            }
        }
        if (rest.empty()) continue;
        raw.messages.emplace_back(role, ts, std::string(rest), Origin::generated);
    }
    if (raw.messages.empty()) throw Error(ErrorCode::parse, "no User/Response lines in output");
    if (mode == DialogueMode::burst) return raw;

    Dialogue out = to_ping_pong(raw, 0).dialogue;
    if (!out.messages.empty() && out.messages.front().role() == Role::System)
        out.messages.erase(out.messages.begin());
    for (std::size_t i = 0; i < out.messages.size(); ++i)
        out.messages[i] =
            out.messages[i].with_sent_at(synthesized_base + std::chrono::seconds{i});
    if (out.messages.empty()) throw Error(ErrorCode::parse, "no user-led exchange in output");
    return out;
}

std::vector<std::string> parse_topic_list(std::string_view text) {
    std::vector<std::string> topics;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        if (line.empty()) continue;

        // "1." "1)" "-" "*" "•" markers
        std::size_t i = 0;
        while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
        if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
            line = trim(line.substr(i + 1));
        } else if (i == 0) {
            if (line.starts_with("- ") || line.starts_with("* ") || line.starts_with("+ "))
                line = trim(line.substr(2));
            else if (line.starts_with("\xE2\x80\xA2"))
                line = trim(line.substr(3));
            else if (line.back() == ':')
                continue;  // a heading such as "Here are 10 topics:"
        } else {
            continue;
        }

        std::string topic;
        for (std::size_t k = 0; k < line.size(); ++k) {
            if (line.compare(k, 2, "**") == 0) {
                ++k;
                continue;
            }
            topic += line[k];
        }
        topic = std::string(trim(topic));
        if (!topic.empty()) topics.push_back(std::move(topic));
    }
    return topics;
}

namespace {

std::string topic_key(const std::string& topic) {
    const auto colon = topic.find(':');
    return lower(trim(std::string_view(topic).substr(0, colon)));
}

}  // namespace

std::vector<std::string> generate_topics(ChatBackend& backend, int count, int max_attempts,
                                         const RetryPolicy& retry) {
    if (count < 1) throw Error(ErrorCode::domain, "topic count must be at least 1");
    const std::string prompt = build_topic_prompt(count);
    std::vector<std::string> topics;
    std::set<std::string> seen;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        const auto text = complete_with_retry(backend, {prompt, {}, "topics"}, retry).text;
        for (auto& topic : parse_topic_list(text)) {
            if (seen.insert(topic_key(topic)).second) topics.push_back(std::move(topic));
        }
        if (topics.size() >= static_cast<std::size_t>(count)) {
            topics.resize(static_cast<std::size_t>(count));
            return topics;
        }
    }
    throw Error(ErrorCode::backend_failure,
                "only " + std::to_string(topics.size()) + " distinct topics after " +
                    std::to_string(max_attempts) + " attempts, wanted " + std::to_string(count));
}

void PseudoGenPlan::check() const {
    if (m < 1) throw Error(ErrorCode::domain, "m must be at least 1");
    if (topics.empty()) throw Error(ErrorCode::domain, "topic list is empty");
    if (max_calls_per_topic < 1) throw Error(ErrorCode::domain, "call limit must be positive");
    std::set<std::string> unique(topics.begin(), topics.end());
    if (unique.size() != topics.size()) throw Error(ErrorCode::domain, "topics are not distinct");
    params.check();
}

bool PseudoDialogueResult::complete() const {
    return std::all_of(topics.begin(), topics.end(),
                       [](const TopicOutcome& t) { return t.status == TopicStatus::ok; });
}

std::size_t PseudoDialogueResult::total_turns() const {
    std::size_t total = 0;
    for (const auto& t : topics)
        if (t.status == TopicStatus::ok) total += count_turns(t.dialogue);
    return total;
}

PseudoDialogueResult generate_pseudo_dialogue(ChatBackend& backend, const PseudoGenPlan& plan,
                                              const RetryPolicy& retry) {
    plan.check();
    const auto m = static_cast<std::size_t>(plan.m);
    PseudoDialogueResult result;
    result.history = plan.seed_history;
    result.history.mode = plan.mode;

    bool halted = false;
    for (std::size_t ti = 0; ti < plan.topics.size(); ++ti) {
        TopicOutcome outcome;
        outcome.topic = plan.topics[ti];
        if (halted) {
            result.topics.push_back(std::move(outcome));
            continue;
        }

        PersonaContext ctx{result.history, plan.mode, plan.persona_preamble, {}};
        std::vector<BurstTurn> turns;
        while (turns.size() < m) {
            if (outcome.calls >= plan.max_calls_per_topic) {
                outcome.status = TopicStatus::failed_call_limit;
                outcome.error = "no " + std::to_string(m) + " turns after " +
                                std::to_string(outcome.calls) + " calls";
                break;
            }
            ++outcome.calls;
            const Dialogue partial{flatten(turns), plan.mode, outcome.topic};
            const std::string prompt = build_pseudo_prompt(ctx, outcome.topic, plan.m, partial);
            GenerationCall call{ti, outcome.calls, 0, turns.size(), false, {}};

            std::string text;
            try {
                text = complete_with_retry(backend, {prompt, plan.params, "pseudo"}, retry).text;
            } catch (const Error& e) {
                outcome.status = TopicStatus::backend_error;
                outcome.error = e.what();
                call.error = e.what();
                result.log.push_back(call);
                halted = true;
                break;
            }

            const Timestamp floor_ts =
                last_timestamp(partial, last_timestamp(result.history, Timestamp{})) +
                std::chrono::seconds{partial.messages.empty() && result.history.messages.empty()
                                         ? 0
                                         : 1};
            Dialogue chunk;
            try {
                chunk = parse_generated_dialogue(text, plan.mode, floor_ts);
            } catch (const Error& e) {
                call.error = e.what();
                result.log.push_back(call);
                continue;
            }
            chunk.messages = shift_after(std::move(chunk.messages), floor_ts);
            auto produced = complete_turns(chunk);
            call.turns_parsed = produced.size();
            turns.insert(turns.end(), produced.begin(), produced.end());
            if (turns.size() > m) {
                turns.resize(m);
                call.truncated = true;
            }
            call.accumulated = turns.size();
            result.log.push_back(call);
        }
        if (halted || outcome.status == TopicStatus::failed_call_limit) {
            result.topics.push_back(std::move(outcome));
            continue;
        }

        outcome.status = TopicStatus::ok;
        outcome.dialogue = Dialogue{flatten(turns), plan.mode, outcome.topic};
        auto& hist = result.history.messages;
        hist.insert(hist.end(), outcome.dialogue.messages.begin(),
                    outcome.dialogue.messages.end());
        result.topics.push_back(std::move(outcome));
    }
    return result;
}

}  // namespace ttharness
