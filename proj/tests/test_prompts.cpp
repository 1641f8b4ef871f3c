#include <doctest.h>

#include <regex>

#include "support.hpp"
#include "ttharness/error.hpp"
#include "ttharness/prompts.hpp"

using namespace ttharness;
using namespace ttharness::testing;

namespace {

PersonaContext persona(DialogueMode mode) {
    PersonaContext ctx;
    ctx.mode = mode;
    ctx.history = pattern("USUS", mode);
    return ctx;
}

std::size_t occurrences(std::string_view text, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string_view::npos;
         pos = text.find(needle, pos + needle.size()))
        ++n;
    return n;
}

}  // namespace

TEST_SUITE("prompts") {

TEST_CASE("burst prompt ends with the pending lines and the response cue") {
    const std::vector<Message> pending = {user("are you free", ts("2024-06-10 11:00:00")),
                                          user("tonight?", ts("2024-06-10 11:00:04"))};
    const auto prompt = build_chatbot_prompt(persona(DialogueMode::burst), pending);
    const std::string tail =
        "User: [2024-06-10 11:00:00] are you free\n"
        "User: [2024-06-10 11:00:04] tonight?\n"
        "Response:";
    CHECK(prompt.ends_with(tail));
    CHECK(prompt.find("Response: [2024-06-10 10:00:03] S4\n\n" + tail) != std::string::npos);
}

TEST_CASE("prompt builders are byte-deterministic") {
    const std::vector<Message> pending = {user("hey", ts("2024-06-10 11:00:00"))};
    const auto ctx = persona(DialogueMode::burst);
    CHECK(build_chatbot_prompt(ctx, pending) == build_chatbot_prompt(ctx, pending));
    CHECK(build_pseudo_prompt(ctx, "Food", 10) == build_pseudo_prompt(ctx, "Food", 10));
    CHECK(build_topic_prompt(10) == build_topic_prompt(10));
}

TEST_CASE("ping-pong persona prompt carries the one-sentence rule and no timestamps") {
    const std::vector<Message> pending = {user("hey", ts("2024-06-10 11:00:00"))};
    const auto prompt = build_chatbot_prompt(persona(DialogueMode::ping_pong), pending);
    CHECK(prompt.find("reply in one short sentence") != std::string::npos);
    CHECK(prompt.ends_with("User: U3\nResponse: S4\n\nUser: hey\nResponse:"));
    CHECK(prompt.find("[2024") == std::string::npos);
}

TEST_CASE("self-continuation prompt drops the pending block") {
    const auto prompt = build_chatbot_prompt(persona(DialogueMode::burst), {});
    CHECK(prompt.ends_with("Response: [2024-06-10 10:00:03] S4\nResponse:"));
    CHECK(prompt.find("{Pending}") == std::string::npos);
}

TEST_CASE("chatbot prompt preconditions") {
    PersonaContext empty;
    CHECK_THROWS_AS((void)build_chatbot_prompt(empty, {}), Error);
    const std::vector<Message> bad = {sys("not a user line", ts("2024-06-10 11:00:00"))};
    CHECK_THROWS_AS((void)build_chatbot_prompt(persona(DialogueMode::burst), bad), Error);
}

TEST_CASE("persona preamble replaces the instruction block") {
    auto ctx = persona(DialogueMode::burst);
    ctx.persona_preamble = "You are Sam, a retired sailor.";
    const auto prompt = build_chatbot_prompt(ctx, {});
    CHECK(prompt.starts_with("You are Sam, a retired sailor.\n\n"));
    CHECK(prompt.find("undergraduate") == std::string::npos);
}

TEST_CASE("pseudo prompt names the topic and round count") {
    const auto prompt = build_pseudo_prompt(persona(DialogueMode::ping_pong), "Travel Experiences", 10);
    CHECK(prompt.find("generate 10 consecutive rounds") != std::string::npos);
    CHECK(prompt.find("around the topic Travel Experiences:") != std::string::npos);
    const auto one = build_pseudo_prompt(persona(DialogueMode::ping_pong), "Food", 1);
    CHECK(one.find("generate 1 consecutive rounds") != std::string::npos);
    CHECK_THROWS_AS((void)build_pseudo_prompt(persona(DialogueMode::burst), "Food", 0), Error);
}

TEST_CASE("burst pseudo prompt asks for runs of more than three messages") {
    const auto prompt = build_pseudo_prompt(persona(DialogueMode::burst), "Food", 10);
    CHECK(prompt.find("send more than 3 multiple consecutive messages") != std::string::npos);
    CHECK(prompt.ends_with("Response: [2024-06-10 10:00:03] S4"));
}

TEST_CASE("pseudo prompt shows the partial dialogue after the history") {
    const Dialogue partial = pattern("US", DialogueMode::burst, ts("2024-06-11 09:00:00"));
    const auto prompt = build_pseudo_prompt(persona(DialogueMode::burst), "Food", 10, partial);
    CHECK(prompt.ends_with("Response: [2024-06-10 10:00:03] S4\n"
                           "User: [2024-06-11 09:00:00] U1\n"
                           "Response: [2024-06-11 09:00:01] S2"));
}

TEST_CASE("topic prompt wording") {
    CHECK(build_topic_prompt(10) ==
          "Generate 10 diverse topics for daily conversations without repetition.");
    CHECK(build_topic_prompt(1) ==
          "Generate 1 diverse topic for daily conversations without repetition.");
    CHECK_THROWS_AS((void)build_topic_prompt(0), Error);
}

TEST_CASE("judge prompt carries both options verbatim") {
    const auto c1 = pattern("US", DialogueMode::ping_pong);
    const auto c2 = pattern("UUS", DialogueMode::burst);
    const auto prompt = build_judge_prompt(c1, c2);
    CHECK(prompt.find(kOptionA) != std::string::npos);
    CHECK(prompt.find(kOptionB) != std::string::npos);
    CHECK(prompt.find("Conversation 1: A: U1\nB: S2\nConversation 2: A: U1\nA: U2\nB: S3\n") !=
          std::string::npos);
    CHECK(prompt.find("[2024") == std::string::npos);
}

TEST_CASE("swapping judge inputs swaps transcripts, not options") {
    const auto c1 = pattern("US");
    const auto c2 = pattern("UUS");
    const auto ab = build_judge_prompt(c1, c2);
    const auto ba = build_judge_prompt(c2, c1);
    CHECK(ab != ba);
    CHECK(ab.substr(ab.find("(A)")) == ba.substr(ba.find("(A)")));
    CHECK_THROWS_AS((void)build_judge_prompt(Dialogue{}, c2), Error);
}

TEST_CASE("burst responses parse one message per line") {
    const auto now = tp("2024-06-10 10:36:00");
    const auto two = parse_burst_response("[2024-06-10 10:35:01] hey\n[2024-06-10 10:35:05] what's up", now);
    REQUIRE(two.messages.size() == 2);
    CHECK(two.salvaged == 0);
    CHECK(two.messages[0].sent_at() == ts("2024-06-10 10:35:01"));
    CHECK(two.messages[1].content() == "what's up");
    CHECK(parse_burst_response("", now).messages.empty());

    const auto salvaged = parse_burst_response("no timestamp here", now);
    REQUIRE(salvaged.messages.size() == 1);
    CHECK(salvaged.salvaged == 1);
    CHECK(salvaged.messages[0].sent_at() == ts("2024-06-10 10:36:00"));
    CHECK(salvaged.messages[0].content() == "no timestamp here");

    const auto labelled = parse_burst_response("Response: [2024-06-10 10:35:01] hey\nResponse: ok", now);
    REQUIRE(labelled.messages.size() == 2);
    CHECK(labelled.messages[0].content() == "hey");
    CHECK(labelled.messages[1].content() == "ok");
}

TEST_CASE("property: burst parsing keeps every non-empty line") {
    Rng rng(55);
    std::uniform_int_distribution<int> lines(0, 10);
    std::bernoulli_distribution stamped(0.5), blank(0.2);
    for (int i = 0; i < 2000; ++i) {
        std::string text;
        std::size_t expected = 0;
        const int n = lines(rng);
        for (int k = 0; k < n; ++k) {
            if (blank(rng)) {
                text += "   \n";
                continue;
            }
            if (stamped(rng)) text += "[2024-06-10 10:35:0" + std::to_string(k % 10) + "] ";
            text += random_content(rng) + "\n";
            ++expected;
        }
        REQUIRE(parse_burst_response(text, tp("2024-06-10 10:00:00")).messages.size() == expected);
    }
}

TEST_CASE("every template placeholder has exactly one substitution site") {
    const std::regex placeholder(R"(\{[A-Za-z_ 0-9]+\})");
    struct Expect {
        std::string_view text;
        std::vector<std::string> names;
    };
    const std::vector<Expect> all = {
        {chatbot_template(DialogueMode::burst), {"{Dialogue History}", "{Pending}"}},
        {chatbot_template(DialogueMode::ping_pong), {"{Dialogue History}", "{Pending}"}},
        {pseudo_template(DialogueMode::burst), {"{rounds}", "{topic}", "{Dialogue History}"}},
        {pseudo_template(DialogueMode::ping_pong), {"{rounds}", "{topic}", "{Dialogue History}"}},
        {judge_template(), {"{Conversation_1}", "{Conversation_2}"}},
        {topic_template(), {"{count}", "{topics}"}},
    };
    for (const auto& e : all) {
        const std::string text(e.text);
        std::size_t found = 0;
        for (auto it = std::sregex_iterator(text.begin(), text.end(), placeholder);
             it != std::sregex_iterator(); ++it)
            ++found;
        CHECK(found == e.names.size());
        for (const auto& name : e.names) CHECK(occurrences(text, name) == 1);
    }
}

TEST_CASE("substitute refuses a missing placeholder") {
    CHECK(substitute("a {x} b", "{x}", "1") == "a 1 b");
    CHECK_THROWS_AS((void)substitute("a b", "{x}", "1"), Error);
}

}
