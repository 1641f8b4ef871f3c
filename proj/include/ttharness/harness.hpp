#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ttharness/chatbot.hpp"
#include "ttharness/config.hpp"
#include "ttharness/store.hpp"

namespace ttharness {

// Pipeline stages shared by the CLI and the HTTP service.

struct IngestRequest {
    std::string text;
    std::string format = "transcript";  // "transcript" or "csv"
    std::string self_sender;            // csv: the target individual's sender name
    DialogueMode mode = DialogueMode::burst;
    std::optional<std::size_t> history_turns;
    std::string name;
    std::string preamble;
    std::size_t min_chars = 2;
    std::chrono::minutes display_offset{0};
};

struct IngestResult {
    std::string persona_id;
    std::size_t burst_turns = 0;
    std::size_t ping_pong_turns = 0;
    std::size_t stored_turns = 0;
    std::vector<ReviewFlag> flags;
};

/// Parses chat records, converts them to the requested mode, keeps the most recent
/// `history_turns` turns and stores the persona.
IngestResult ingest_persona(RunStore& store, const IngestRequest& request);

struct SelfDirectRequest {
    std::string persona_id;
    std::string backend_label;
    int topic_count = 10;
    std::vector<std::string> topics;  // used instead of generating when non-empty
    int m = 10;
    std::optional<DialogueMode> mode;
    std::uint64_t seed = 0;
    int max_calls_per_topic = 5;
    GenerationParams params;
};

struct SelfDirectResult {
    std::string run_id;
    std::vector<std::string> topics;
    PseudoDialogueResult result;
};

/// Topic generation plus pseudo-dialogue generation, persisted as a pseudo run. A backend
/// failure still stores the partial run before the error propagates in `result`.
SelfDirectResult run_selfdirect(RunStore& store, ChatBackend& backend,
                                const SelfDirectRequest& request, const RetryPolicy& retry = {});

struct SessionRequest {
    std::string persona_id;
    std::string backend_id;
    std::optional<std::string> pseudo_run;
    std::optional<DialogueMode> mode;
    std::optional<std::chrono::milliseconds> t1;
    std::string topic;
    std::uint64_t seed = 0;
};

/// Validates references and writes the session manifest. The primed history is the
/// pseudo run's extended history when one is given, the persona history otherwise.
SessionManifest open_session(RunStore& store, const HarnessConfig& config,
                             const SessionRequest& request);

[[nodiscard]] Chatbot make_chatbot(const RunStore& store, const SessionManifest& manifest,
                                   std::shared_ptr<ChatBackend> backend,
                                   const HarnessConfig& config);

struct EndResult {
    std::string pair_id;
    std::size_t turns = 0;
    bool partial = false;
    Dialogue suffix;
};

/// Stores the last `m` complete turns of a finished session as the machine side of a pair.
EndResult end_session(RunStore& store, const SessionManifest& manifest, const SessionState& state,
                      std::size_t m, const std::string& model_label);

/// Assembles a questionnaire item for every complete pair that has none yet.
std::vector<QuestionnaireItem> export_questionnaires(
    RunStore& store, std::uint64_t seed, const std::optional<std::filesystem::path>& out_dir = {});

/// Runs each LLM judge over every item it has not judged yet and stores the records.
std::vector<JudgmentRecord> run_judges(RunStore& store,
                                       const std::vector<std::shared_ptr<ChatBackend>>& judges,
                                       const RetryPolicy& retry = {});

/// format: "csv", "json", "summary" or "demographics:<dimension>".
[[nodiscard]] std::string render_report(const RunStore& store,
                                        const std::vector<std::string>& group_by,
                                        const std::string& format);

}  // namespace ttharness
