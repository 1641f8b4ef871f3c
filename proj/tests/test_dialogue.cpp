#include <doctest.h>

#include "support.hpp"
#include "ttharness/error.hpp"

using namespace ttharness;
using namespace ttharness::testing;

TEST_SUITE("dialogue") {

TEST_CASE("segmentation splits maximal user runs and their answers") {
    const auto turns = segment_burst_turns(pattern("UUSSUS"));
    REQUIRE(turns.size() == 2);
    CHECK(turns[0].user_run.size() == 2);
    CHECK(turns[0].system_run.size() == 2);
    CHECK(turns[1].user_run.size() == 1);
    CHECK(turns[1].system_run.size() == 1);
    CHECK(count_turns(pattern("UUSSUS")) == 2);
}

TEST_CASE("single exchange is one turn") {
    CHECK(segment_burst_turns(pattern("US")).size() == 1);
    CHECK(count_turns(pattern("US")) == 1);
    CHECK(count_turns(pattern("US", DialogueMode::ping_pong)) == 1);
}

TEST_CASE("trailing user run is an incomplete turn") {
    const auto turns = segment_burst_turns(pattern("UUU"));
    REQUIRE(turns.size() == 1);
    CHECK(turns[0].user_run.size() == 3);
    CHECK_FALSE(turns[0].complete());
    CHECK(count_turns(pattern("UUU")) == 0);
}

TEST_CASE("leading system run is an incomplete turn") {
    const auto turns = segment_burst_turns(pattern("SUS"));
    REQUIRE(turns.size() == 2);
    CHECK_FALSE(turns[0].complete());
    CHECK(turns[1].complete());
}

TEST_CASE("segmentation rejects decreasing timestamps") {
    Dialogue d;
    d.messages = {user("a", ts("2024-06-10 10:00:05")), sys("b", ts("2024-06-10 10:00:01"))};
    CHECK_THROWS_AS((void)segment_burst_turns(d), Error);
}

TEST_CASE("to_ping_pong keeps the first message of each run") {
    const auto conv = to_ping_pong(pattern("UUSSUS"));
    CHECK(roles_of(conv.dialogue) == "USUS");
    CHECK(conv.dialogue.messages[0].content() == "U1");
    CHECK(conv.dialogue.messages[1].content() == "S3");
    CHECK(conv.dialogue.messages[2].content() == "U5");
    CHECK(conv.dialogue.messages[3].content() == "S6");
    CHECK(conv.dialogue.mode == DialogueMode::ping_pong);
}

TEST_CASE("to_ping_pong is the identity on alternating input") {
    const auto d = pattern("US");
    const auto conv = to_ping_pong(d);
    CHECK(conv.dialogue.messages == d.messages);
}

TEST_CASE("to_ping_pong leaves singleton runs with a leading system message") {
    const auto d = pattern("SUS");
    CHECK(to_ping_pong(d).dialogue.messages == d.messages);
}

TEST_CASE("to_ping_pong flags short retained messages") {
    Dialogue d;
    d.messages = {user("k", ts("2024-06-10 10:00:00")), user("longer", ts("2024-06-10 10:00:01")),
                  sys("ok then", ts("2024-06-10 10:00:02"))};
    const auto conv = to_ping_pong(d);
    REQUIRE(conv.flags.size() == 1);
    CHECK(conv.flags[0].message_index == 0);
}

TEST_CASE("count_turns examples") {
    CHECK(count_turns(pattern("USUSUS", DialogueMode::ping_pong)) == 3);
    CHECK(count_turns(pattern("UUSUSS")) == 2);
    CHECK(count_turns(Dialogue{}) == 0);
}

TEST_CASE("last_turns keeps whole runs of the most recent turns") {
    const auto d = pattern("UUSSUSUSS");
    const auto tail = last_turns(d, 2);
    CHECK(roles_of(tail) == "USUSS");
    CHECK(tail.messages.front().content() == "U5");
    CHECK(count_turns(last_turns(d, 10)) == 3);
    CHECK(last_turns(d, 0).messages.empty());
    CHECK(roles_of(first_turns(d, 1)) == "UUSS");
}

TEST_CASE("parse_transcript reads the timestamped line format") {
    const auto d = parse_transcript("User: [2024-06-10 10:34:22] Hi!", DialogueMode::burst);
    REQUIRE(d.messages.size() == 1);
    CHECK(d.messages[0] == user("Hi!", ts("2024-06-10 10:34:22")));

    const auto r = parse_transcript("Response: [2024-06-10 10:35:01] hey", DialogueMode::burst);
    REQUIRE(r.messages.size() == 1);
    CHECK(r.messages[0].role() == Role::System);
    CHECK(r.messages[0].content() == "hey");

    CHECK(parse_transcript("", DialogueMode::burst).messages.empty());
}

TEST_CASE("parse_transcript reports the failing line") {
    const std::string text =
        "User: [2024-06-10 10:34:22] Hi!\nUser: [2024-06-10 25:00:00] nope\n";
    try {
        (void)parse_transcript(text, DialogueMode::burst);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS((void)parse_transcript("Someone: [2024-06-10 10:34:22] x", DialogueMode::burst),
                    ParseError);
    CHECK_THROWS_AS((void)parse_transcript("User: [2024-06-10 10:34:22]   ", DialogueMode::burst),
                    ParseError);
}

TEST_CASE("display offset shifts the wire format, not the stored time") {
    TranscriptOptions opts;
    opts.display_offset = std::chrono::minutes{480};
    const auto d = parse_transcript("User: [2024-06-10 18:00:00] hi", DialogueMode::burst, opts);
    CHECK(d.messages[0].sent_at() == ts("2024-06-10 10:00:00"));
    CHECK(render_transcript(d, opts) == "User: [2024-06-10 18:00:00] hi");
}

TEST_CASE("render_transcript examples") {
    CHECK(render_transcript(Dialogue{}).empty());
    Dialogue one;
    one.messages = {user("Hi!", ts("2024-06-10 10:34:22"))};
    CHECK(render_transcript(one) == "User: [2024-06-10 10:34:22] Hi!");

    const auto two = pattern("UUSS");
    CHECK(render_transcript(two) ==
          "User: [2024-06-10 10:00:00] U1\n"
          "User: [2024-06-10 10:00:01] U2\n"
          "Response: [2024-06-10 10:00:02] S3\n"
          "Response: [2024-06-10 10:00:03] S4");
}

TEST_CASE("ping-pong transcripts carry no timestamps") {
    const auto d = pattern("US", DialogueMode::ping_pong);
    CHECK(render_transcript(d) == "User: U1\nResponse: S2");
    TranscriptOptions opts;
    opts.synthesized_base = ts("2024-06-10 10:00:00");
    CHECK(parse_transcript(render_transcript(d), DialogueMode::ping_pong, opts) == d);
}

TEST_CASE("char_count counts scalar values") {
    CHECK(char_count("") == 0);
    CHECK(char_count("hello") == 5);
    CHECK(char_count("你好") == 2);
    CHECK(char_count("é😀") == 2);
}

TEST_CASE("property: parse inverts render on random dialogues") {
    Rng rng(101);
    for (int i = 0; i < 2000; ++i) {
        const Dialogue d = random_burst(rng);
        CAPTURE(i);
        REQUIRE(parse_transcript(render_transcript(d), DialogueMode::burst) == d);
    }
}

TEST_CASE("property: segmentation is a partition with complete turns non-empty") {
    Rng rng(202);
    for (int i = 0; i < 2000; ++i) {
        const Dialogue d = random_burst(rng);
        const auto turns = segment_burst_turns(d);
        REQUIRE(flatten(turns) == d.messages);
        std::size_t complete = 0;
        for (std::size_t k = 0; k < turns.size(); ++k) {
            if (turns[k].complete()) {
                ++complete;
                REQUIRE_FALSE(turns[k].user_run.empty());
                REQUIRE_FALSE(turns[k].system_run.empty());
            } else {
                // only the first or last segment may be incomplete
                REQUIRE((k == 0 || k + 1 == turns.size()));
            }
        }
        REQUIRE(count_turns(d) == complete);
    }
}

TEST_CASE("property: to_ping_pong alternates and is idempotent") {
    Rng rng(303);
    for (int i = 0; i < 2000; ++i) {
        const Dialogue d = random_burst(rng);
        const auto once = to_ping_pong(d).dialogue;
        REQUIRE(strictly_alternating(once));
        REQUIRE(to_ping_pong(once).dialogue == once);
        // every kept message is the first of its run in the input
        std::size_t j = 0;
        for (std::size_t k = 0; k < d.messages.size(); ++k) {
            if (k > 0 && d.messages[k].role() == d.messages[k - 1].role()) continue;
            REQUIRE(j < once.messages.size());
            REQUIRE(once.messages[j] == d.messages[k]);
            ++j;
        }
        REQUIRE(j == once.messages.size());
    }
}

}
