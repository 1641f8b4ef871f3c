#include <doctest.h>

#include "pseudo_fixtures.hpp"
#include "ttharness/error.hpp"
#include "ttharness/pseudo_gen.hpp"

using namespace ttharness;
using namespace ttharness::testing;

namespace {

std::vector<std::string> numbered_topics(int n) {
    std::vector<std::string> topics;
    for (int i = 0; i < n; ++i) topics.push_back("Topic " + std::to_string(i + 1));
    return topics;
}

PseudoGenPlan plan_for(std::vector<std::string> topics, int m = 10) {
    PseudoGenPlan plan;
    plan.m = m;
    plan.topics = std::move(topics);
    plan.seed_history = pattern("USUS");
    return plan;
}

bool is_prefix(const Dialogue& a, const Dialogue& b) {
    return a.messages.size() <= b.messages.size() &&
           std::equal(a.messages.begin(), a.messages.end(), b.messages.begin());
}

}  // namespace

TEST_SUITE("pseudo_gen") {

TEST_CASE("alternating labelled lines give a ping-pong dialogue") {
    const auto d = parse_generated_dialogue("User: hi\nResponse: hey\nUser: lunch?\nResponse: sure",
                                            DialogueMode::ping_pong, ts("2024-06-10 10:00:00"));
    CHECK(roles_of(d) == "USUS");
    CHECK(d.messages[3].content() == "sure");
    CHECK(d.messages[3].sent_at() == ts("2024-06-10 10:00:03"));
    CHECK(d.messages[0].origin() == Origin::generated);
    CHECK_NOTHROW(validate(d));
}

TEST_CASE("generated ping-pong output is normalised to alternate from the user") {
    const auto d = parse_generated_dialogue(
        "Sure! Here is the conversation:\nResponse: stray\nuser: a\nUser: b\nRESPONSE: c",
        DialogueMode::ping_pong);
    CHECK(roles_of(d) == "US");
    CHECK(d.messages[0].content() == "a");
    CHECK(d.messages[1].content() == "c");
}

TEST_CASE("empty generator output is a parse error") {
    CHECK_THROWS_AS((void)parse_generated_dialogue("", DialogueMode::burst), Error);
    CHECK_THROWS_AS((void)parse_generated_dialogue("just prose", DialogueMode::ping_pong), Error);
}

TEST_CASE("burst output segments like the transcript parser") {
    Timestamp clock = ts("2024-06-10 10:00:00");
    const std::string text = generated_turns(clock, 3, 3, 2);
    const auto d = parse_generated_dialogue(text, DialogueMode::burst);
    TranscriptOptions opts;
    opts.origin = Origin::generated;
    const auto oracle = parse_transcript(text, DialogueMode::burst, opts);
    CHECK(d.messages == oracle.messages);
    CHECK(segment_burst_turns(d) == segment_burst_turns(oracle));
    CHECK(count_turns(d) == 3);
}

TEST_CASE("out-of-order generated timestamps are clamped forward") {
    const auto d = parse_generated_dialogue(
        "User: [2024-06-10 10:00:10] a\nResponse: [2024-06-10 10:00:05] b\nResponse: c",
        DialogueMode::burst);
    CHECK(d.messages[1].sent_at() == ts("2024-06-10 10:00:10"));
    CHECK(d.messages[2].sent_at() == ts("2024-06-10 10:00:11"));
    CHECK_NOTHROW(check_ordering(d.messages));
}

TEST_CASE("topic lists lose markers, markdown and headings") {
    const auto topics = parse_topic_list(
        "Here are 3 topics:\n1. **Travel**: trips and places\n2) Food\n- Movies\n\n");
    CHECK(topics == std::vector<std::string>{"Travel: trips and places", "Food", "Movies"});
}

TEST_CASE("ten scripted topics") {
    std::string list;
    for (int i = 1; i <= 10; ++i) list += std::to_string(i) + ". Topic " + std::to_string(i) + "\n";
    ScriptedBackend backend({list});
    CHECK(generate_topics(backend, 10) == numbered_topics(10));
    CHECK(backend.calls() == 1);
}

TEST_CASE("a duplicate topic triggers another request") {
    ScriptedBackend backend({"1. Food\n2. Travel\n3. food", "1. Music"});
    const auto topics = generate_topics(backend, 3);
    CHECK(topics == std::vector<std::string>{"Food", "Travel", "Music"});
    CHECK(backend.calls() == 2);
}

TEST_CASE("single topic request") {
    ScriptedBackend backend({"Pets"});
    CHECK(generate_topics(backend, 1) == std::vector<std::string>{"Pets"});
    CHECK_THROWS_AS((void)generate_topics(backend, 0), Error);
}

TEST_CASE("topic generation gives up after repeated duplicates") {
    ScriptedBackend backend({"1. Food", "1. Food", "1. Food"});
    CHECK_THROWS_AS((void)generate_topics(backend, 2), Error);
}

TEST_CASE("exactly m turns per call: one call per topic") {
    Timestamp clock = ts("2024-06-11 00:00:00");
    std::vector<std::string> script;
    for (int i = 0; i < 3; ++i) script.push_back(generated_turns(clock, 10));
    ScriptedBackend backend(script);
    const auto result = generate_pseudo_dialogue(backend, plan_for(numbered_topics(3)));
    CHECK(backend.calls() == 3);
    CHECK(result.complete());
    CHECK(result.total_turns() == 30);
}

TEST_CASE("4 then 7 turns at m=10: two calls, first ten turns kept") {
    Timestamp clock = ts("2024-06-11 00:00:00");
    const std::string first = generated_turns(clock, 4, 2, 1, "a");
    const std::string second = generated_turns(clock, 7, 1, 3, "b");
    ScriptedBackend backend({first, second});
    const auto result = generate_pseudo_dialogue(backend, plan_for({"Travel Experiences"}));

    CHECK(backend.calls() == 2);
    REQUIRE(result.log.size() == 2);
    CHECK(result.log[0].accumulated == 4);
    CHECK(result.log[1].turns_parsed == 7);
    CHECK(result.log[1].truncated);
    REQUIRE(result.topics.size() == 1);
    CHECK(result.topics[0].status == TopicStatus::ok);
    CHECK(count_turns(result.topics[0].dialogue) == 10);

    TranscriptOptions opts;
    opts.origin = Origin::generated;
    const auto oracle = first_turns(parse_transcript(first + second, DialogueMode::burst, opts), 10);
    CHECK(result.topics[0].dialogue.messages == oracle.messages);

    // the second call saw the first call's turns as the partial dialogue
    const auto prompts = backend.prompts("pseudo");
    REQUIRE(prompts.size() == 2);
    CHECK(prompts[1].find("a r3.0") != std::string::npos);
    CHECK(prompts[0].find("a r3.0") == std::string::npos);
}

TEST_CASE("ten topics of ten turns extend the history by exactly 100 turns") {
    Timestamp clock = ts("2024-06-11 00:00:00");
    std::vector<std::string> script;
    for (int i = 0; i < 10; ++i) script.push_back(generated_turns(clock, 10, 2, 2, "k" + std::to_string(i)));
    ScriptedBackend backend(script);
    const auto plan = plan_for(numbered_topics(10));
    const auto result = generate_pseudo_dialogue(backend, plan);

    CHECK(result.total_turns() == 100);
    CHECK(count_turns(result.history) == count_turns(plan.seed_history) + 100);
    CHECK(is_prefix(plan.seed_history, result.history));
    Dialogue running = plan.seed_history;
    for (const auto& t : result.topics) {
        REQUIRE(t.status == TopicStatus::ok);
        Dialogue next = running;
        next.messages.insert(next.messages.end(), t.dialogue.messages.begin(), t.dialogue.messages.end());
        CHECK(is_prefix(running, next));
        CHECK(is_prefix(next, result.history));
        running = next;
    }
    CHECK(running.messages == result.history.messages);
}

TEST_CASE("each prompt carries the history built so far") {
    Timestamp clock = ts("2024-06-11 00:00:00");
    const std::string a = generated_turns(clock, 2, 1, 1, "first");
    const std::string b = generated_turns(clock, 2, 1, 1, "second");
    ScriptedBackend backend({a, b});
    (void)generate_pseudo_dialogue(backend, plan_for({"A", "B"}, 2));
    const auto prompts = backend.prompts("pseudo");
    REQUIRE(prompts.size() == 2);
    CHECK(prompts[1].find("first r1.0") != std::string::npos);
    CHECK(prompts[1].find("around the topic B:") != std::string::npos);
}

TEST_CASE("a backend failure stops generation and keeps earlier topics") {
    Timestamp clock = ts("2024-06-11 00:00:00");
    ScriptedBackend backend({generated_turns(clock, 10)});
    const auto result = generate_pseudo_dialogue(backend, plan_for(numbered_topics(3)));
    REQUIRE(result.topics.size() == 3);
    CHECK(result.topics[0].status == TopicStatus::ok);
    CHECK(result.topics[1].status == TopicStatus::backend_error);
    CHECK(result.topics[2].status == TopicStatus::skipped);
    CHECK_FALSE(result.complete());
    CHECK(result.total_turns() == 10);
}

TEST_CASE("unusable output counts against the call limit") {
    ScriptedBackend backend({"nothing useful"}, "junk", true);
    auto plan = plan_for({"A", "B"});
    plan.max_calls_per_topic = 3;
    const auto result = generate_pseudo_dialogue(backend, plan);
    CHECK(result.topics[0].status == TopicStatus::failed_call_limit);
    CHECK(result.topics[1].status == TopicStatus::failed_call_limit);
    CHECK(backend.calls() == 6);
}

TEST_CASE("plan preconditions") {
    ScriptedBackend backend({});
    CHECK_THROWS_AS((void)generate_pseudo_dialogue(backend, plan_for({}, 10)), Error);
    CHECK_THROWS_AS((void)generate_pseudo_dialogue(backend, plan_for({"A"}, 0)), Error);
    CHECK_THROWS_AS((void)generate_pseudo_dialogue(backend, plan_for({"A", "A"})), Error);
}

TEST_CASE("property: c turns per call takes ceil(m/c) calls and keeps exactly m") {
    Rng rng(1234);
    for (int trial = 0; trial < 300; ++trial) {
        std::uniform_int_distribution<int> pick_m(1, 12);
        const int m = pick_m(rng);
        std::uniform_int_distribution<int> pick_c(1, 2 * m);
        const int c = pick_c(rng);
        Timestamp clock = ts("2024-06-11 00:00:00");
        std::vector<std::string> script;
        const int expected_calls = (m + c - 1) / c;
        for (int i = 0; i < 2 * expected_calls; ++i)
            script.push_back(generated_turns(clock, static_cast<std::size_t>(c), 1 + i % 3, 1 + i % 2));
        ScriptedBackend backend(script);
        auto plan = plan_for({"A", "B"}, m);
        plan.max_calls_per_topic = 2 * m + 1;
        const auto result = generate_pseudo_dialogue(backend, plan);
        CAPTURE(m);
        CAPTURE(c);
        REQUIRE(result.complete());
        REQUIRE(backend.calls() == static_cast<std::size_t>(2 * expected_calls));
        for (const auto& t : result.topics) {
            REQUIRE(t.calls == expected_calls);
            REQUIRE(count_turns(t.dialogue) == static_cast<std::size_t>(m));
        }
        REQUIRE(count_turns(result.history) == count_turns(plan.seed_history) + 2 * static_cast<std::size_t>(m));
    }
}

TEST_CASE("property: random turn counts per call always end at exactly m") {
    Rng rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        const int m = 1 + static_cast<int>(rng() % 10);
        Timestamp clock = ts("2024-06-11 00:00:00");
        std::vector<std::string> script;
        for (int i = 0; i < 40; ++i)
            script.push_back(generated_turns(clock, 1 + rng() % (2 * m), 1 + rng() % 4, 1 + rng() % 4));
        ScriptedBackend backend(script);
        auto plan = plan_for({"A", "B", "C"}, m);
        plan.max_calls_per_topic = 40;
        plan.mode = trial % 2 == 0 ? DialogueMode::burst : DialogueMode::ping_pong;
        if (plan.mode == DialogueMode::ping_pong) plan.seed_history = pattern("USUS", DialogueMode::ping_pong);
        const auto result = generate_pseudo_dialogue(backend, plan);
        REQUIRE(result.complete());
        for (const auto& t : result.topics) REQUIRE(count_turns(t.dialogue) == static_cast<std::size_t>(m));
        REQUIRE_NOTHROW(check_ordering(result.history.messages));
    }
}

}
