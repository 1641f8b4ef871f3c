#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ttharness/engine.hpp"
#include "ttharness/evaluation.hpp"
#include "ttharness/pseudo_gen.hpp"

namespace ttharness {

using json = nlohmann::json;

// Wire representations. Timestamps are UTC "YYYY-MM-DD hh:mm:ss"; engine times are epoch ms.
[[nodiscard]] json to_json(const Message& msg);
[[nodiscard]] Message message_from_json(const json& j);
[[nodiscard]] json to_json(const Dialogue& dialogue);
[[nodiscard]] Dialogue dialogue_from_json(const json& j);
[[nodiscard]] json to_json(const EngineEvent& event);
[[nodiscard]] EngineEvent event_from_json(const json& j);
[[nodiscard]] json to_json(const ConversationPair& pair);
[[nodiscard]] ConversationPair pair_from_json(const json& j);
[[nodiscard]] json to_json(const JudgmentRecord& record);
[[nodiscard]] JudgmentRecord record_from_json(const json& j);

/// What a judge sees: two A/B transcripts and the option texts. No key, no origins.
[[nodiscard]] json public_questionnaire(const QuestionnaireItem& item);

/// A chat-platform export with columns timestamp, sender, text. Messages from
/// `self_sender` are the target individual's (System); everyone else is the User.
[[nodiscard]] Dialogue import_chat_export(std::string_view csv, std::string_view self_sender,
                                          std::chrono::minutes display_offset = {});

struct PersonaRecord {
    std::string id;
    std::string name;
    DialogueMode mode = DialogueMode::burst;
    Dialogue history;
    std::string preamble;
};

struct PseudoRunRecord {
    std::string id;
    std::string persona_id;
    std::string backend;
    DialogueMode mode = DialogueMode::burst;
    int m = 10;
    std::uint64_t seed = 0;
    std::vector<std::string> topics;
    PseudoDialogueResult result;
};

struct SessionManifest {
    std::string id;
    std::string persona_id;
    std::string backend;
    std::optional<std::string> pseudo_run;
    std::string topic;
    EngineConfig engine;
    std::size_t persona_turns = 0;
    std::size_t pseudo_turns = 0;
    Dialogue primed;
};

struct LoggedEvent {
    std::uint64_t seq;
    EngineEvent event;
};

/// Append-only, line-delimited event log of one session with gap-free sequence numbers.
class EventLog {
public:
    explicit EventLog(std::filesystem::path path);

    std::uint64_t append(const EngineEvent& event);
    [[nodiscard]] std::uint64_t last_seq() const;

private:
    mutable std::mutex mutex_;
    std::filesystem::path path_;
    std::ofstream out_;
    std::uint64_t seq_ = 0;
};

/// Throws ErrorCode::corruption on a sequence gap or an unreadable line.
[[nodiscard]] std::vector<LoggedEvent> read_event_log(const std::filesystem::path& path);

/// Rebuilds a session from its manifest and events; rejected events are skipped as they were
/// live.
[[nodiscard]] SessionState replay(const SessionManifest& manifest,
                                  std::span<const LoggedEvent> events);

[[nodiscard]] json to_json(const SessionManifest& manifest);
[[nodiscard]] SessionManifest manifest_from_json(const json& j);

/// Plain-file storage for personas, pseudo runs, sessions and evaluation data.
class RunStore {
public:
    explicit RunStore(std::filesystem::path root);

    [[nodiscard]] const std::filesystem::path& root() const noexcept { return root_; }

    std::string add_persona(PersonaRecord record);
    [[nodiscard]] PersonaRecord persona(const std::string& id) const;

    std::string add_pseudo_run(PseudoRunRecord record);
    [[nodiscard]] PseudoRunRecord pseudo_run(const std::string& id) const;
    [[nodiscard]] json pseudo_run_manifest(const std::string& id) const;

    std::string create_session(SessionManifest manifest);
    [[nodiscard]] SessionManifest session_manifest(const std::string& id) const;
    [[nodiscard]] std::unique_ptr<EventLog> open_event_log(const std::string& id) const;
    [[nodiscard]] std::vector<LoggedEvent> session_events(const std::string& id) const;
    [[nodiscard]] SessionState replay_session(const std::string& id) const;

    /// Stores a machine-side pair awaiting its human reference.
    std::string add_pair(ConversationPair pair, bool partial);
    void attach_reference(const std::string& pair_id, Dialogue human_side);
    [[nodiscard]] ConversationPair pair(const std::string& id) const;
    [[nodiscard]] bool pair_partial(const std::string& id) const;
    [[nodiscard]] std::vector<ConversationPair> pairs(bool complete_only) const;

    void put_item(const QuestionnaireItem& item);
    [[nodiscard]] std::map<std::string, QuestionnaireItem> items() const;
    [[nodiscard]] json public_item(const std::string& id) const;

    void append_judgments(std::span<const JudgmentRecord> records);
    [[nodiscard]] std::vector<JudgmentRecord> judgments() const;

    [[nodiscard]] EvaluationIndex index() const;

private:
    std::string next_id(const std::string& prefix, const std::filesystem::path& dir) const;
    std::filesystem::path dir(std::string_view kind) const;

    std::filesystem::path root_;
    mutable std::mutex mutex_;
};

void write_text(const std::filesystem::path& path, std::string_view text);
[[nodiscard]] std::string read_text(const std::filesystem::path& path);

}  // namespace ttharness
