#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ttharness/clock.hpp"
#include "ttharness/dialogue.hpp"
#include "ttharness/timing.hpp"

namespace ttharness::testing {

inline Timestamp ts(const std::string& text) {
    auto parsed = parse_timestamp(text);
    if (!parsed) throw std::invalid_argument("bad test timestamp " + text);
    return *parsed;
}

inline TimePoint tp(const std::string& text) { return to_time_point(ts(text)); }

inline Message user(const std::string& text, Timestamp at = {},
                    Origin origin = Origin::human) {
    return Message(Role::User, at, text, origin);
}

inline Message sys(const std::string& text, Timestamp at = {}, Origin origin = Origin::human) {
    return Message(Role::System, at, text, origin);
}

/// Builds a dialogue from a role pattern such as "UUSSUS", one second per message.
inline Dialogue pattern(const std::string& roles, DialogueMode mode = DialogueMode::burst,
                        Timestamp base = ts("2024-06-10 10:00:00")) {
    Dialogue d;
    d.mode = mode;
    for (std::size_t i = 0; i < roles.size(); ++i) {
        const Role role = roles[i] == 'U' ? Role::User : Role::System;
        d.messages.emplace_back(role, base + std::chrono::seconds{i},
                                std::string(1, roles[i]) + std::to_string(i + 1));
    }
    return d;
}

inline std::string roles_of(const Dialogue& d) {
    std::string out;
    for (const auto& m : d.messages) out += m.role() == Role::User ? 'U' : 'S';
    return out;
}

/// Random single-line content: printable ASCII plus a few multi-byte characters.
inline std::string random_content(Rng& rng) {
    static const std::vector<std::string> pieces = {
        "a", "b", "z", "Q", "0", "7", " ", ",", "?", "!", ":", "[", "]", "é", "你", "好", "😀"};
    std::uniform_int_distribution<std::size_t> len(1, 12);
    std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
    std::string s;
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) s += pieces[pick(rng)];
    if (s.find_first_not_of(' ') == std::string::npos) s = "x" + s;
    return s;
}

/// Random burst dialogue with non-decreasing timestamps.
inline Dialogue random_burst(Rng& rng, std::size_t max_messages = 24) {
    std::uniform_int_distribution<std::size_t> count(0, max_messages);
    std::bernoulli_distribution coin(0.5);
    std::uniform_int_distribution<int> step(0, 90);
    Dialogue d;
    Timestamp at = ts("2024-06-10 09:00:00");
    const std::size_t n = count(rng);
    for (std::size_t i = 0; i < n; ++i) {
        at += std::chrono::seconds{step(rng)};
        d.messages.emplace_back(coin(rng) ? Role::User : Role::System, at, random_content(rng));
    }
    return d;
}

inline bool strictly_alternating(const Dialogue& d) {
    for (std::size_t i = 1; i < d.messages.size(); ++i)
        if (d.messages[i].role() == d.messages[i - 1].role()) return false;
    return true;
}

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag = "t") {
        static std::atomic<unsigned> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("ttharness-" + tag + "-" + std::to_string(std::random_device{}()) + "-" +
                std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

}  // namespace ttharness::testing
