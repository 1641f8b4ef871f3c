#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "ttharness/error.hpp"

using namespace ttharness;
using namespace ttharness::testing;
using namespace std::chrono_literals;

TEST_SUITE("timing") {

TEST_CASE("n=10 draws have mean 3 s and sd 0.3 s") {
    Rng rng(7);
    const DelayModel model;
    const int n = 20000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
        const double d = sample_send_delay(10, model, rng).count();
        sum += d;
        sq += d * d;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sq / n - mean * mean);
    // standard error of the mean is 0.3/sqrt(20000) ~ 0.0021
    CHECK(mean == doctest::Approx(3.0).epsilon(0.004));
    CHECK(sd == doctest::Approx(0.3).epsilon(0.03));
}

TEST_CASE("zero characters wait zero seconds") {
    Rng rng(1);
    CHECK(sample_send_delay(0, DelayModel{}, rng).count() == 0.0);
}

TEST_CASE("floor applies to short messages") {
    Rng rng(1);
    DelayModel model;
    model.floor = 0.5;
    CHECK(sample_send_delay(0, model, rng).count() == 0.5);
}

TEST_CASE("same seed, same delays; matches a direct normal draw") {
    Rng a(42), b(42), oracle(42);
    for (int i = 0; i < 50; ++i) {
        const double x = sample_send_delay(17, DelayModel{}, a).count();
        CHECK(x == sample_send_delay(17, DelayModel{}, b).count());
        // a fresh distribution per message, so no cached second variate carries over
        std::normal_distribution<double> rate(0.3, 0.03);
        CHECK(x == doctest::Approx(std::max(0.0, rate(oracle)) * 17).epsilon(1e-12));
    }
}

TEST_CASE("delay model rejects bad parameters") {
    CHECK_THROWS_AS((DelayModel{0.0, 0.03, 0.0}).check(), Error);
    CHECK_THROWS_AS((DelayModel{0.3, -1.0, 0.0}).check(), Error);
    CHECK_THROWS_AS((DelayModel{0.3, 0.03, -0.1}).check(), Error);
    CHECK_NOTHROW(DelayModel{}.check());
}

TEST_CASE("a message in the past moves to now plus its typing delay") {
    const TimePoint now = tp("2024-06-10 10:00:00");
    const std::vector<Message> proposed = {sys("hello there", ts("2024-06-10 09:59:55"))};
    Rng rng(5), oracle(5);
    const auto out = validate_and_resample(proposed, now, DelayModel{}, rng);
    const auto delay = to_millis(sample_send_delay(11, DelayModel{}, oracle));
    REQUIRE(out.size() == 1);
    CHECK(out[0].sent_at() == ceil_seconds(now + delay));
    CHECK(out[0].content() == "hello there");
}

TEST_CASE("valid ascending future timestamps are left alone") {
    const TimePoint now = tp("2024-06-10 10:00:00");
    const std::vector<Message> proposed = {sys("a", ts("2024-06-10 10:00:03")),
                                           sys("b", ts("2024-06-10 10:00:09"))};
    Rng rng(5);
    CHECK(validate_and_resample(proposed, now, DelayModel{}, rng) == proposed);
}

TEST_CASE("equal timestamps: the second moves later by its delay") {
    const TimePoint now = tp("2024-06-10 10:00:00");
    const std::vector<Message> proposed = {sys("first", ts("2024-06-10 10:00:05")),
                                           sys("second one", ts("2024-06-10 10:00:05"))};
    Rng rng(9), oracle(9);
    const auto out = validate_and_resample(proposed, now, DelayModel{}, rng);
    const auto delay = to_millis(sample_send_delay(10, DelayModel{}, oracle));
    CHECK(out[0] == proposed[0]);
    CHECK(out[1].sent_at() == ceil_seconds(tp("2024-06-10 10:00:05") + delay));
    CHECK(out[1].sent_at() > out[0].sent_at());
}

TEST_CASE("one message: due after its own delay") {
    const TimePoint now = tp("2024-06-10 10:00:00") + 250ms;
    const std::vector<Message> msgs = {sys("0123456789", ts("2024-06-10 10:00:00"))};
    Rng rng(11), oracle(11);
    const auto plan = schedule_outputs(msgs, now, DelayModel{}, rng);
    REQUIRE(plan.size() == 1);
    CHECK(plan[0].due_at == now + to_millis(sample_send_delay(10, DelayModel{}, oracle)));
}

TEST_CASE("empty list, empty plan") {
    Rng rng(1);
    CHECK(schedule_outputs({}, tp("2024-06-10 10:00:00"), DelayModel{}, rng).empty());
}

TEST_CASE("property: plans are strictly increasing, gaps cover each delay, deterministic") {
    Rng gen(77);
    std::uniform_int_distribution<int> count(0, 8), step(0, 30);
    for (int i = 0; i < 3000; ++i) {
        std::vector<Message> msgs;
        Timestamp at = ts("2024-06-10 10:00:00");
        const int n = count(gen);
        for (int k = 0; k < n; ++k) {
            at += std::chrono::seconds{step(gen)};
            msgs.push_back(sys(random_content(gen), at));
        }
        const TimePoint now = tp("2024-06-10 09:59:00") + std::chrono::milliseconds{step(gen) * 97};
        const std::uint64_t seed = gen();
        Rng a(seed), b(seed), oracle(seed);
        const auto plan = schedule_outputs(msgs, now, DelayModel{}, a);
        REQUIRE(plan == schedule_outputs(msgs, now, DelayModel{}, b));
        REQUIRE(plan.size() == msgs.size());
        TimePoint prev = now;
        for (std::size_t k = 0; k < plan.size(); ++k) {
            const auto delay =
                to_millis(sample_send_delay(char_count(msgs[k].content()), DelayModel{}, oracle));
            REQUIRE(plan[k].message == msgs[k]);
            REQUIRE(plan[k].due_at - prev >= delay);
            if (k > 0) REQUIRE(plan[k].due_at > plan[k - 1].due_at);
            prev = plan[k].due_at;
        }
    }
}

TEST_CASE("property: repaired timestamps are never before now and strictly increase") {
    Rng gen(88);
    std::uniform_int_distribution<int> count(0, 8), offset(-60, 60);
    for (int i = 0; i < 3000; ++i) {
        const TimePoint now = tp("2024-06-10 10:00:00") + std::chrono::milliseconds{gen() % 1000};
        std::vector<Message> msgs;
        const int n = count(gen);
        for (int k = 0; k < n; ++k)
            msgs.push_back(sys(random_content(gen),
                               ts("2024-06-10 10:00:00") + std::chrono::seconds{offset(gen)}));
        Rng rng(gen());
        const auto out = validate_and_resample(msgs, now, DelayModel{}, rng);
        REQUIRE(out.size() == msgs.size());
        for (std::size_t k = 0; k < out.size(); ++k) {
            REQUIRE(to_time_point(out[k].sent_at()) >= now);
            REQUIRE(out[k].content() == msgs[k].content());
            if (k > 0) REQUIRE(out[k].sent_at() > out[k - 1].sent_at());
        }
    }
}

}
