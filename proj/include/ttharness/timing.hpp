#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "ttharness/clock.hpp"
#include "ttharness/dialogue.hpp"

namespace ttharness {

/// Seeded random source. Callers own it; nothing in the library keeps global state.
using Rng = std::mt19937_64;

/// Typing-speed model: a message of n characters waits r * n seconds, r ~ Normal(mean, sd).
struct DelayModel {
    double per_char_mean = 0.3;
    double per_char_sd = 0.03;
    double floor = 0.0;

    /// Throws ErrorCode::configuration on a non-positive mean or negative sd/floor.
    void check() const;

    friend bool operator==(const DelayModel&, const DelayModel&) = default;
};

[[nodiscard]] Seconds sample_send_delay(std::size_t n_chars, const DelayModel& model, Rng& rng);

[[nodiscard]] inline std::chrono::milliseconds to_millis(Seconds s) {
    return std::chrono::round<std::chrono::milliseconds>(s);
}

/// Repairs model-proposed send times: a message earlier than `now`, or not later than its
/// predecessor, is moved to max(now, predecessor) + its sampled typing delay.
/// Output is strictly increasing and never earlier than `now`.
[[nodiscard]] std::vector<Message> validate_and_resample(std::span<const Message> messages,
                                                         TimePoint now, const DelayModel& model,
                                                         Rng& rng);

struct ScheduledMessage {
    Message message;
    TimePoint due_at;

    friend bool operator==(const ScheduledMessage&, const ScheduledMessage&) = default;
};

/// Due times are strictly increasing and not earlier than the plan's creation time.
using SendPlan = std::vector<ScheduledMessage>;

/// First message is due after its typing delay; each later one after the larger of its
/// timestamp gap and its own typing delay.
[[nodiscard]] SendPlan schedule_outputs(std::span<const Message> messages, TimePoint now,
                                        const DelayModel& model, Rng& rng);

}  // namespace ttharness
