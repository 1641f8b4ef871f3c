#include "ttharness/timing.hpp"

#include <algorithm>

#include "ttharness/error.hpp"

namespace ttharness {

void DelayModel::check() const {
    if (!(per_char_mean > 0.0))
        throw Error(ErrorCode::configuration, "delay.mean_s_per_char must be positive");
    if (per_char_sd < 0.0)
        throw Error(ErrorCode::configuration, "delay.sd_s_per_char must be non-negative");
    if (floor < 0.0) throw Error(ErrorCode::configuration, "delay.floor_s must be non-negative");
}

Seconds sample_send_delay(std::size_t n_chars, const DelayModel& model, Rng& rng) {
    std::normal_distribution<double> rate_dist(model.per_char_mean, model.per_char_sd);
    // One rate per message; a negative rate would be a ten-sigma draw.
    const double rate = std::max(0.0, rate_dist(rng));
    return Seconds{std::max(model.floor, rate * static_cast<double>(n_chars))};
}

std::vector<Message> validate_and_resample(std::span<const Message> messages, TimePoint now,
                                           const DelayModel& model, Rng& rng) {
    std::vector<Message> out;
    out.reserve(messages.size());
    const Timestamp now_s = ceil_seconds(now);
    for (const Message& msg : messages) {
        const bool has_pred = !out.empty();
        const Timestamp pred = has_pred ? out.back().sent_at() : Timestamp{};
        if (to_time_point(msg.sent_at()) >= now && (!has_pred || msg.sent_at() > pred)) {
            out.push_back(msg);
            continue;
        }
        const TimePoint anchor = has_pred ? std::max(now, to_time_point(pred)) : now;
        const auto delay = to_millis(sample_send_delay(char_count(msg.content()), model, rng));
        Timestamp repaired = std::max(ceil_seconds(anchor + delay), now_s);
        if (has_pred && repaired <= pred) repaired = pred + std::chrono::seconds{1};
        out.push_back(msg.with_sent_at(repaired));
    }
    return out;
}

SendPlan schedule_outputs(std::span<const Message> messages, TimePoint now,
                          const DelayModel& model, Rng& rng) {
    SendPlan plan;
    plan.reserve(messages.size());
    for (std::size_t i = 0; i < messages.size(); ++i) {
        const auto delay =
            to_millis(sample_send_delay(char_count(messages[i].content()), model, rng));
        TimePoint due;
        if (i == 0) {
            due = now + delay;
        } else {
            const auto gap = std::chrono::duration_cast<std::chrono::milliseconds>(
                messages[i].sent_at() - messages[i - 1].sent_at());
            due = plan.back().due_at + std::max({gap, delay, std::chrono::milliseconds{1}});
        }
        plan.push_back({messages[i], due});
    }
    return plan;
}

}  // namespace ttharness
