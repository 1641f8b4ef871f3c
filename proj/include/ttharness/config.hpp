#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "ttharness/backend.hpp"
#include "ttharness/timing.hpp"

namespace ttharness {

struct BackendSpec {
    std::string type;  // "openai" or "scripted"
    OpenAiConfig openai;
    std::filesystem::path script;
};

/// Harness configuration, read from a JSON file whose nested objects give the dotted keys
/// (backend.base_url, engine.t1_s, delay.mean_s_per_char, paths.store_root, ...).
struct HarnessConfig {
    OpenAiConfig backend;
    std::chrono::milliseconds t1{3000};
    bool repoll = false;
    DelayModel delay;
    GenerationParams params;
    std::vector<std::string> judge_backends;
    std::filesystem::path store_root = "ttharness-store";
    std::chrono::minutes display_offset{0};
    /// Extra named backends.
    std::map<std::string, BackendSpec> backends;
};

[[nodiscard]] HarnessConfig load_config(const std::filesystem::path& path);
[[nodiscard]] HarnessConfig parse_config(std::string_view json_text);

/// Resolves a backend id: a name from `backends`, "openai" (or the configured model name)
/// for the live provider, or "scripted:<path>" for a script file.
/// Throws ErrorCode::not_found for anything else.
[[nodiscard]] std::shared_ptr<ChatBackend> make_backend(const HarnessConfig& config,
                                                        std::string_view id);

}  // namespace ttharness
