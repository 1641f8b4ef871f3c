#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ttharness {

/// Error categories shared by the library, the service and the CLI.
enum class ErrorCode {
    bad_request,
    not_found,
    conflict,
    backend_failure,
    closed,
    parse,
    ordering,
    configuration,
    corruption,
    domain,
};

[[nodiscard]] const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Parse failure that remembers the 1-based line it happened on.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& message)
        : Error(ErrorCode::parse, "line " + std::to_string(line) + ": " + message), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace ttharness
