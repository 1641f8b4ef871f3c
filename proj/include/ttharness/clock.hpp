#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace ttharness {

/// Wall-clock time of a message. Transcripts carry second resolution.
using Timestamp = std::chrono::sys_seconds;

/// Engine time. Send plans are scheduled with millisecond resolution.
using TimePoint = std::chrono::sys_time<std::chrono::milliseconds>;

using Seconds = std::chrono::duration<double>;

/// Renders `YYYY-MM-DD hh:mm:ss`, shifted by `display_offset` from UTC.
[[nodiscard]] std::string format_timestamp(Timestamp ts,
                                           std::chrono::minutes display_offset = {});

/// Parses `YYYY-MM-DD hh:mm:ss` in the display zone back to UTC.
/// Returns nullopt on anything that is not a valid calendar time.
[[nodiscard]] std::optional<Timestamp> parse_timestamp(std::string_view text,
                                                       std::chrono::minutes display_offset = {});

[[nodiscard]] inline Timestamp floor_seconds(TimePoint t) {
    return std::chrono::floor<std::chrono::seconds>(t);
}

[[nodiscard]] inline Timestamp ceil_seconds(TimePoint t) {
    return std::chrono::ceil<std::chrono::seconds>(t);
}

[[nodiscard]] inline TimePoint to_time_point(Timestamp ts) {
    return std::chrono::time_point_cast<std::chrono::milliseconds>(ts);
}

[[nodiscard]] inline std::int64_t to_millis(TimePoint t) {
    return t.time_since_epoch().count();
}

[[nodiscard]] inline TimePoint from_millis(std::int64_t ms) {
    return TimePoint{std::chrono::milliseconds{ms}};
}

[[nodiscard]] inline TimePoint system_now() {
    return std::chrono::time_point_cast<std::chrono::milliseconds>(
        std::chrono::system_clock::now());
}

}  // namespace ttharness
