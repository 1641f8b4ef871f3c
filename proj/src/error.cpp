#include "ttharness/error.hpp"

namespace ttharness {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::bad_request: return "bad_request";
        case ErrorCode::not_found: return "not_found";
        case ErrorCode::conflict: return "conflict";
        case ErrorCode::backend_failure: return "backend_failure";
        case ErrorCode::closed: return "closed";
        case ErrorCode::parse: return "parse";
        case ErrorCode::ordering: return "ordering";
        case ErrorCode::configuration: return "configuration";
        case ErrorCode::corruption: return "corruption";
        case ErrorCode::domain: return "domain";
    }
    return "unknown";
}

}  // namespace ttharness
