#include "ttharness/backend.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace ttharness {

using json = nlohmann::json;

void GenerationParams::check() const {
    if (temperature < 0.0) throw Error(ErrorCode::configuration, "temperature must be >= 0");
    if (max_tokens <= 0) throw Error(ErrorCode::configuration, "max_tokens must be positive");
}

ScriptedBackend::ScriptedBackend(std::vector<std::string> responses, std::string label, bool cycle)
    : responses_(std::move(responses)), label_(std::move(label)), cycle_(cycle) {}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::not_found, "cannot open script " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::parse, path.string() + ": " + e.what());
    }
    std::string label = "scripted";
    bool cycle = false;
    json list = doc;
    if (doc.is_object()) {
        label = doc.value("label", label);
        cycle = doc.value("cycle", false);
        list = doc.at("responses");
    }
    if (!list.is_array()) throw Error(ErrorCode::parse, path.string() + ": expected a list");
    std::vector<std::string> responses;
    for (const auto& item : list) responses.push_back(item.get<std::string>());
    return std::make_shared<ScriptedBackend>(std::move(responses), label, cycle);
}

std::string ScriptedBackend::complete(const CompletionRequest& request) {
    std::lock_guard lock(mutex_);
    std::size_t index = calls_;
    if (index >= responses_.size()) {
        if (!cycle_ || responses_.empty())
            throw BackendError(BackendErrorKind::script_exhausted,
                               label_ + ": script exhausted after " +
                                   std::to_string(responses_.size()) + " responses");
        index %= responses_.size();
    }
    seen_[request.session_id].push_back(request.prompt);
    ++calls_;
    return responses_[index];
}

std::size_t ScriptedBackend::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

std::vector<std::string> ScriptedBackend::prompts(const std::string& session_id) const {
    std::lock_guard lock(mutex_);
    auto it = seen_.find(session_id);
    return it == seen_.end() ? std::vector<std::string>{} : it->second;
}

OpenAiBackend::OpenAiBackend(OpenAiConfig config) : config_(std::move(config)) {}

std::string OpenAiBackend::request_body(const CompletionRequest& request) const {
    json body = {
        {"model", config_.model},
        {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
        {"temperature", request.params.temperature},
        {"max_tokens", request.params.max_tokens},
    };
    if (!request.params.stop.empty()) body["stop"] = request.params.stop;
    return body.dump();
}

std::string OpenAiBackend::parse_response_body(const std::string& body) {
    try {
        const json doc = json::parse(body);
        return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw BackendError(BackendErrorKind::provider,
                           std::string("unexpected completion payload: ") + e.what());
    }
}

std::string OpenAiBackend::complete(const CompletionRequest& request) {
    request.params.check();
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
        throw BackendError(BackendErrorKind::authentication,
                           "environment variable " + config_.api_key_env + " is not set");

    // Split "scheme://host:port/prefix" into the client origin and a path prefix.
    std::string origin = config_.base_url;
    std::string prefix;
    if (auto scheme = origin.find("://"); scheme != std::string::npos) {
        if (auto slash = origin.find('/', scheme + 3); slash != std::string::npos) {
            prefix = origin.substr(slash);
            origin.resize(slash);
        }
    }
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

    httplib::Client client(origin);
    client.set_connection_timeout(std::chrono::seconds{10});
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};
    auto res = client.Post(prefix + "/v1/chat/completions", headers, request_body(request),
                           "application/json");
    if (!res)
        throw BackendError(BackendErrorKind::transport,
                           "request to " + config_.base_url + " failed: " +
                               httplib::to_string(res.error()));
    if (res->status == 401 || res->status == 403)
        throw BackendError(BackendErrorKind::authentication,
                           "provider rejected credentials (HTTP " + std::to_string(res->status) +
                               ")");
    if (res->status == 429 || res->status >= 500)
        throw BackendError(BackendErrorKind::transport,
                           "provider unavailable (HTTP " + std::to_string(res->status) + ")");
    if (res->status != 200)
        throw BackendError(BackendErrorKind::provider,
                           "provider error (HTTP " + std::to_string(res->status) + "): " +
                               res->body);
    return parse_response_body(res->body);
}

CompletionOutcome complete_with_retry(ChatBackend& backend, const CompletionRequest& request,
                                      const RetryPolicy& policy) {
    if (policy.max_attempts < 1)
        throw Error(ErrorCode::configuration, "retry policy needs at least one attempt");
    auto backoff = policy.initial_backoff;
    for (int attempt = 1;; ++attempt) {
        try {
            return {backend.complete(request), attempt};
        } catch (const BackendError& e) {
            if (!e.retryable() || attempt >= policy.max_attempts) throw;
        }
        if (policy.sleep)
            policy.sleep(backoff);
        else
            std::this_thread::sleep_for(backoff);
        backoff = std::chrono::milliseconds{
            static_cast<std::int64_t>(static_cast<double>(backoff.count()) * policy.multiplier)};
    }
}

}  // namespace ttharness
