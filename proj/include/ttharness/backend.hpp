#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "ttharness/error.hpp"

namespace ttharness {

struct GenerationParams {
    double temperature = 1.0;
    int max_tokens = 1024;
    std::vector<std::string> stop;

    void check() const;
};

struct CompletionRequest {
    std::string prompt;
    GenerationParams params;
    /// Tags the call; scripted backends record prompts per tag.
    std::string session_id;
};

enum class BackendErrorKind { transport, authentication, provider, script_exhausted };

class BackendError : public Error {
public:
    BackendError(BackendErrorKind kind, const std::string& message)
        : Error(ErrorCode::backend_failure, message), kind_(kind) {}

    [[nodiscard]] BackendErrorKind kind() const noexcept { return kind_; }
    [[nodiscard]] bool retryable() const noexcept { return kind_ == BackendErrorKind::transport; }

private:
    BackendErrorKind kind_;
};

/// A chat model. Implementations must be callable from several sessions at once.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;

    [[nodiscard]] virtual std::string complete(const CompletionRequest& request) = 0;
    [[nodiscard]] virtual std::string label() const = 0;
};

/// Replays a fixed list of responses, one per call.
class ScriptedBackend final : public ChatBackend {
public:
    explicit ScriptedBackend(std::vector<std::string> responses, std::string label = "scripted",
                             bool cycle = false);

    /// Script file: a JSON array of strings, or an object with a "responses" array
    /// (and optional "label", "cycle").
    [[nodiscard]] static std::shared_ptr<ScriptedBackend> from_file(
        const std::filesystem::path& path);

    std::string complete(const CompletionRequest& request) override;
    [[nodiscard]] std::string label() const override { return label_; }

    /// Responses are handed out in script order across all sessions.
    [[nodiscard]] std::size_t calls() const;
    [[nodiscard]] std::vector<std::string> prompts(const std::string& session_id) const;

private:
    std::vector<std::string> responses_;
    std::string label_;
    bool cycle_;
    mutable std::mutex mutex_;
    std::size_t calls_ = 0;
    std::map<std::string, std::vector<std::string>> seen_;
};

/// Adapts a callable; handy for tests and for deterministic synthetic backends.
class FunctionBackend final : public ChatBackend {
public:
    using Fn = std::function<std::string(const CompletionRequest&)>;

    FunctionBackend(Fn fn, std::string label) : fn_(std::move(fn)), label_(std::move(label)) {}

    std::string complete(const CompletionRequest& request) override { return fn_(request); }
    [[nodiscard]] std::string label() const override { return label_; }

private:
    Fn fn_;
    std::string label_;
};

struct OpenAiConfig {
    std::string base_url = "https://api.openai.com";
    std::string model = "gpt-4";
    std::string api_key_env = "OPENAI_API_KEY";
    std::chrono::seconds timeout{120};
};

/// OpenAI-compatible chat-completions client. The whole prompt travels as one user message.
class OpenAiBackend final : public ChatBackend {
public:
    explicit OpenAiBackend(OpenAiConfig config);

    std::string complete(const CompletionRequest& request) override;
    [[nodiscard]] std::string label() const override { return config_.model; }

    /// Request body as sent over the wire.
    [[nodiscard]] std::string request_body(const CompletionRequest& request) const;

    /// Extracts choices[0].message.content; throws BackendError(provider) otherwise.
    [[nodiscard]] static std::string parse_response_body(const std::string& body);

private:
    OpenAiConfig config_;
};

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    double multiplier = 2.0;
    /// Injected so tests do not sleep.
    std::function<void(std::chrono::milliseconds)> sleep;
};

struct CompletionOutcome {
    std::string text;
    int attempts = 0;
};

/// Retries transport errors with exponential backoff; authentication and provider
/// errors surface immediately. Throws the last error once attempts run out.
CompletionOutcome complete_with_retry(ChatBackend& backend, const CompletionRequest& request,
                                      const RetryPolicy& policy = {});

}  // namespace ttharness
