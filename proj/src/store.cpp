#include "ttharness/store.hpp"

#include <algorithm>
#include <sstream>

#include "ttharness/error.hpp"

namespace ttharness {

namespace fs = std::filesystem;

void write_text(const fs::path& path, std::string_view text) {
    fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::configuration, "cannot write " + path.string());
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
    }
    fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::not_found, "cannot read " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

namespace {

json read_json(const fs::path& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::corruption, path.string() + ": " + e.what());
    }
}

std::string timestamp_string(Timestamp ts) { return format_timestamp(ts); }

Timestamp timestamp_from(const json& j) {
    const auto ts = parse_timestamp(j.get<std::string>());
    if (!ts) throw Error(ErrorCode::parse, "bad timestamp " + j.dump());
    return *ts;
}

}  // namespace

json to_json(const Message& msg) {
    return {{"role", to_string(msg.role())},
            {"sent_at", timestamp_string(msg.sent_at())},
            {"content", msg.content()},
            {"origin", to_string(msg.origin())}};
}

Message message_from_json(const json& j) {
    const std::string role = j.at("role").get<std::string>();
    if (role != "user" && role != "system") throw Error(ErrorCode::parse, "bad role " + role);
    return Message(role == "user" ? Role::User : Role::System, timestamp_from(j.at("sent_at")),
                   j.at("content").get<std::string>(),
                   origin_from_string(j.value("origin", "human")));
}

json to_json(const Dialogue& dialogue) {
    json msgs = json::array();
    for (const auto& m : dialogue.messages) msgs.push_back(to_json(m));
    json j = {{"mode", to_string(dialogue.mode)}, {"messages", msgs}};
    if (dialogue.topic) j["topic"] = *dialogue.topic;
    return j;
}

Dialogue dialogue_from_json(const json& j) {
    Dialogue d;
    d.mode = mode_from_string(j.at("mode").get<std::string>());
    for (const auto& m : j.at("messages")) d.messages.push_back(message_from_json(m));
    if (j.contains("topic")) d.topic = j["topic"].get<std::string>();
    return d;
}

json to_json(const EngineEvent& event) {
    return std::visit(
        [](const auto& e) -> json {
            using T = std::decay_t<decltype(e)>;
            json j = {{"at", to_millis(e.at)}};
            if constexpr (std::is_same_v<T, UserMessageEvent>) {
                j["type"] = "user_message";
                j["message"] = to_json(e.message);
            } else if constexpr (std::is_same_v<T, ModelResponseEvent>) {
                j["type"] = "model_response";
                json msgs = json::array();
                for (const auto& m : e.proposed) msgs.push_back(to_json(m));
                j["proposed"] = msgs;
            } else if constexpr (std::is_same_v<T, ModelFailureEvent>) {
                j["type"] = "model_failure";
                j["diagnostic"] = e.diagnostic;
            } else if constexpr (std::is_same_v<T, TickEvent>) {
                j["type"] = "tick";
            } else {
                j["type"] = "close";
            }
            return j;
        },
        event);
}

EngineEvent event_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    const TimePoint at = from_millis(j.at("at").get<std::int64_t>());
    if (type == "user_message") return UserMessageEvent{message_from_json(j.at("message")), at};
    if (type == "model_response") {
        std::vector<Message> proposed;
        for (const auto& m : j.at("proposed")) proposed.push_back(message_from_json(m));
        return ModelResponseEvent{std::move(proposed), at};
    }
    if (type == "model_failure")
        return ModelFailureEvent{j.at("diagnostic").get<std::string>(), at};
    if (type == "tick") return TickEvent{at};
    if (type == "close") return CloseEvent{at};
    throw Error(ErrorCode::corruption, "unknown event type " + type);
}

json to_json(const ConversationPair& pair) {
    return {{"id", pair.id},
            {"topic", pair.topic},
            {"turns", pair.turns},
            {"preceding_turns", pair.preceding_turns},
            {"history_turns", pair.history_turns},
            {"model", pair.model},
            {"mode", to_string(pair.mode)},
            {"machine_side", to_json(pair.machine_side)},
            {"human_side", to_json(pair.human_side)}};
}

ConversationPair pair_from_json(const json& j) {
    ConversationPair pair;
    pair.id = j.at("id").get<std::string>();
    pair.topic = j.value("topic", "");
    pair.turns = j.at("turns").get<std::size_t>();
    pair.preceding_turns = j.value("preceding_turns", std::size_t{0});
    pair.history_turns = j.value("history_turns", std::size_t{0});
    pair.model = j.value("model", "");
    pair.mode = mode_from_string(j.at("mode").get<std::string>());
    pair.machine_side = dialogue_from_json(j.at("machine_side"));
    pair.human_side = dialogue_from_json(j.at("human_side"));
    return pair;
}

json to_json(const JudgmentRecord& rec) {
    json j = {{"item_id", rec.item_id},
              {"judge_id", rec.judge_id},
              {"kind", to_string(rec.kind)},
              {"chosen_option", rec.chosen ? json(to_string(*rec.chosen)) : json(nullptr)},
              {"correct", rec.correct}};
    if (rec.demographics) {
        j["age_band"] = rec.demographics->age_band;
        j["education"] = rec.demographics->education;
        j["ai_familiarity"] = rec.demographics->ai_familiarity;
    }
    if (!rec.diagnostic.empty()) j["diagnostic"] = rec.diagnostic;
    return j;
}

JudgmentRecord record_from_json(const json& j) {
    JudgmentRecord rec;
    rec.item_id = j.at("item_id").get<std::string>();
    rec.judge_id = j.at("judge_id").get<std::string>();
    rec.kind = j.at("kind").get<std::string>() == "llm" ? JudgeKind::llm : JudgeKind::human;
    if (!j.at("chosen_option").is_null())
        rec.chosen = option_from_string(j["chosen_option"].get<std::string>());
    rec.correct = j.at("correct").get<bool>();
    if (j.contains("age_band"))
        rec.demographics = Demographics{j["age_band"].get<std::string>(),
                                        j.at("education").get<std::string>(),
                                        j.at("ai_familiarity").get<std::string>()};
    rec.diagnostic = j.value("diagnostic", "");
    return rec;
}

json public_questionnaire(const QuestionnaireItem& item) {
    auto lines = [](const Dialogue& d) {
        json out = json::array();
        for (const auto& m : d.messages)
            out.push_back({{"speaker", m.role() == Role::User ? "A" : "B"},
                           {"text", m.content()}});
        return out;
    };
    return {{"id", item.id},
            {"conversation_1", {{"transcript", item.rendered(1)}, {"lines", lines(item.conversation1)}}},
            {"conversation_2", {{"transcript", item.rendered(2)}, {"lines", lines(item.conversation2)}}},
            {"options", {{{"option", "A"}, {"text", std::string(kOptionA)}},
                         {{"option", "B"}, {"text", std::string(kOptionB)}}}}};
}

namespace {

std::vector<std::string> split_csv_row(std::string_view row) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < row.size(); ++i) {
        const char c = row[i];
        if (quoted) {
            if (c == '"' && i + 1 < row.size() && row[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

}  // namespace

Dialogue import_chat_export(std::string_view csv, std::string_view self_sender,
                            std::chrono::minutes display_offset) {
    Dialogue d;
    d.mode = DialogueMode::burst;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < csv.size()) {
        std::size_t end = csv.find('\n', pos);
        if (end == std::string_view::npos) end = csv.size();
        std::string_view row = csv.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
        if (row.find_first_not_of(" \t") == std::string_view::npos) continue;
        auto fields = split_csv_row(row);
        if (line_no == 1 && !fields.empty() && fields[0] == "timestamp") continue;
        if (fields.size() != 3) throw ParseError(line_no, "expected timestamp,sender,text");
        const auto ts = parse_timestamp(fields[0], display_offset);
        if (!ts) throw ParseError(line_no, "malformed timestamp '" + fields[0] + "'");
        std::string text = fields[2];
        std::replace(text.begin(), text.end(), '\n', ' ');
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        d.messages.emplace_back(fields[1] == self_sender ? Role::System : Role::User, *ts,
                                std::move(text), Origin::human);
    }
    check_ordering(d.messages);
    return d;
}

EventLog::EventLog(fs::path path) : path_(std::move(path)) {
    if (fs::exists(path_)) {
        const auto events = read_event_log(path_);
        seq_ = events.empty() ? 0 : events.back().seq;
    }
    out_.open(path_, std::ios::app | std::ios::binary);
    if (!out_) throw Error(ErrorCode::configuration, "cannot open event log " + path_.string());
}

std::uint64_t EventLog::append(const EngineEvent& event) {
    std::lock_guard lock(mutex_);
    json j = to_json(event);
    j["seq"] = ++seq_;
    out_ << j.dump() << '\n';
    out_.flush();
    return seq_;
}

std::uint64_t EventLog::last_seq() const {
    std::lock_guard lock(mutex_);
    return seq_;
}

std::vector<LoggedEvent> read_event_log(const fs::path& path) {
    std::vector<LoggedEvent> events;
    const std::string text = read_text(path);
    if (!text.empty() && text.back() != '\n')
        throw Error(ErrorCode::corruption, path.string() + ": truncated final record");
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
            const auto seq = j.at("seq").get<std::uint64_t>();
            const std::uint64_t expected = events.empty() ? 1 : events.back().seq + 1;
            if (seq != expected)
                throw Error(ErrorCode::corruption,
                            path.string() + ": sequence gap at line " + std::to_string(line_no) +
                                " (expected " + std::to_string(expected) + ", found " +
                                std::to_string(seq) + ")");
            events.push_back({seq, event_from_json(j)});
        } catch (const json::exception& e) {
            throw Error(ErrorCode::corruption,
                        path.string() + ": unreadable record at line " + std::to_string(line_no) +
                            ": " + e.what());
        }
    }
    return events;
}

SessionState replay(const SessionManifest& manifest, std::span<const LoggedEvent> events) {
    SessionState state = make_session(manifest.id, manifest.engine, manifest.primed);
    for (const auto& logged : events) (void)apply(state, logged.event);
    return state;
}

json to_json(const SessionManifest& m) {
    json engine = {{"mode", to_string(m.engine.mode)},
                   {"t1_ms", m.engine.t1.count()},
                   {"repoll", m.engine.repoll},
                   {"seed", m.engine.seed},
                   {"delay",
                    {{"mean_s_per_char", m.engine.delay.per_char_mean},
                     {"sd_s_per_char", m.engine.delay.per_char_sd},
                     {"floor_s", m.engine.delay.floor}}}};
    json j = {{"id", m.id},
              {"persona", m.persona_id},
              {"backend", m.backend},
              {"topic", m.topic},
              {"engine", engine},
              {"persona_turns", m.persona_turns},
              {"pseudo_turns", m.pseudo_turns},
              {"primed", to_json(m.primed)}};
    j["pseudo_run"] = m.pseudo_run ? json(*m.pseudo_run) : json(nullptr);
    return j;
}

SessionManifest manifest_from_json(const json& j) {
    SessionManifest m;
    m.id = j.at("id").get<std::string>();
    m.persona_id = j.at("persona").get<std::string>();
    m.backend = j.at("backend").get<std::string>();
    m.topic = j.value("topic", "");
    if (!j.at("pseudo_run").is_null()) m.pseudo_run = j["pseudo_run"].get<std::string>();
    const auto& engine = j.at("engine");
    m.engine.mode = mode_from_string(engine.at("mode").get<std::string>());
    m.engine.t1 = std::chrono::milliseconds{engine.at("t1_ms").get<std::int64_t>()};
    m.engine.repoll = engine.at("repoll").get<bool>();
    m.engine.seed = engine.at("seed").get<std::uint64_t>();
    m.engine.delay.per_char_mean = engine.at("delay").at("mean_s_per_char").get<double>();
    m.engine.delay.per_char_sd = engine.at("delay").at("sd_s_per_char").get<double>();
    m.engine.delay.floor = engine.at("delay").at("floor_s").get<double>();
    m.persona_turns = j.at("persona_turns").get<std::size_t>();
    m.pseudo_turns = j.at("pseudo_turns").get<std::size_t>();
    m.primed = dialogue_from_json(j.at("primed"));
    return m;
}

RunStore::RunStore(fs::path root) : root_(std::move(root)) {
    for (const char* kind : {"personas", "pseudo-runs", "sessions", "pairs", "questionnaires",
                             "keys"})
        fs::create_directories(root_ / kind);
}

fs::path RunStore::dir(std::string_view kind) const { return root_ / kind; }

std::string RunStore::next_id(const std::string& prefix, const fs::path& directory) const {
    std::size_t n = 0;
    for (const auto& entry : fs::directory_iterator(directory)) {
        const std::string name = entry.path().stem().string();
        if (name.starts_with(prefix + "-")) ++n;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s-%04zu", prefix.c_str(), n + 1);
    return buf;
}

std::string RunStore::add_persona(PersonaRecord record) {
    std::lock_guard lock(mutex_);
    record.id = next_id("persona", dir("personas"));
    json j = {{"id", record.id},
              {"name", record.name},
              {"mode", to_string(record.mode)},
              {"preamble", record.preamble},
              {"turns", count_turns(record.history)},
              {"history", to_json(record.history)}};
    write_text(dir("personas") / (record.id + ".json"), j.dump(2) + "\n");
    return record.id;
}

PersonaRecord RunStore::persona(const std::string& id) const {
    const auto path = dir("personas") / (id + ".json");
    if (!fs::exists(path)) throw Error(ErrorCode::not_found, "unknown persona '" + id + "'");
    const json j = read_json(path);
    PersonaRecord rec;
    rec.id = id;
    rec.name = j.value("name", "");
    rec.mode = mode_from_string(j.at("mode").get<std::string>());
    rec.preamble = j.value("preamble", "");
    rec.history = dialogue_from_json(j.at("history"));
    return rec;
}

std::string RunStore::add_pseudo_run(PseudoRunRecord record) {
    std::lock_guard lock(mutex_);
    record.id = next_id("pseudo", dir("pseudo-runs"));
    const fs::path run_dir = dir("pseudo-runs") / record.id;
    fs::create_directories(run_dir);

    json topics = json::array();
    for (std::size_t i = 0; i < record.result.topics.size(); ++i) {
        const auto& t = record.result.topics[i];
        char name[32];
        std::snprintf(name, sizeof name, "topic_%02zu.txt", i + 1);
        json entry = {{"topic", t.topic},
                      {"status", to_string(t.status)},
                      {"calls", t.calls},
                      {"turns", count_turns(t.dialogue)}};
        if (!t.error.empty()) entry["error"] = t.error;
        if (t.status == TopicStatus::ok) {
            write_text(run_dir / name, render_transcript(t.dialogue) + "\n");
            entry["transcript"] = name;
            entry["dialogue"] = to_json(t.dialogue);
        }
        topics.push_back(entry);
    }
    json calls = json::array();
    for (const auto& c : record.result.log) {
        json entry = {{"topic_index", c.topic_index},
                      {"call", c.call},
                      {"turns_parsed", c.turns_parsed},
                      {"accumulated", c.accumulated},
                      {"truncated", c.truncated}};
        if (!c.error.empty()) entry["error"] = c.error;
        calls.push_back(entry);
    }
    json manifest = {{"id", record.id},
                     {"persona", record.persona_id},
                     {"backend", record.backend},
                     {"mode", to_string(record.mode)},
                     {"m", record.m},
                     {"seed", record.seed},
                     {"topic_list", record.topics},
                     {"topics", topics},
                     {"calls", calls},
                     {"total_turns", record.result.total_turns()},
                     {"complete", record.result.complete()}};
    write_text(run_dir / "manifest.json", manifest.dump(2) + "\n");
    write_text(run_dir / "history.json", to_json(record.result.history).dump() + "\n");
    return record.id;
}

json RunStore::pseudo_run_manifest(const std::string& id) const {
    const auto path = dir("pseudo-runs") / id / "manifest.json";
    if (!fs::exists(path)) throw Error(ErrorCode::not_found, "unknown pseudo run '" + id + "'");
    return read_json(path);
}

PseudoRunRecord RunStore::pseudo_run(const std::string& id) const {
    const json manifest = pseudo_run_manifest(id);
    PseudoRunRecord rec;
    rec.id = id;
    rec.persona_id = manifest.at("persona").get<std::string>();
    rec.backend = manifest.at("backend").get<std::string>();
    rec.mode = mode_from_string(manifest.at("mode").get<std::string>());
    rec.m = manifest.at("m").get<int>();
    rec.seed = manifest.at("seed").get<std::uint64_t>();
    rec.topics = manifest.at("topic_list").get<std::vector<std::string>>();
    for (const auto& t : manifest.at("topics")) {
        TopicOutcome outcome;
        outcome.topic = t.at("topic").get<std::string>();
        const std::string status = t.at("status").get<std::string>();
        outcome.status = status == "ok"                  ? TopicStatus::ok
                         : status == "failed_call_limit" ? TopicStatus::failed_call_limit
                         : status == "backend_error"     ? TopicStatus::backend_error
                                                         : TopicStatus::skipped;
        outcome.calls = t.at("calls").get<int>();
        outcome.error = t.value("error", "");
        if (t.contains("dialogue")) outcome.dialogue = dialogue_from_json(t["dialogue"]);
        rec.result.topics.push_back(std::move(outcome));
    }
    rec.result.history = dialogue_from_json(read_json(dir("pseudo-runs") / id / "history.json"));
    return rec;
}

std::string RunStore::create_session(SessionManifest manifest) {
    std::lock_guard lock(mutex_);
    manifest.id = next_id("session", dir("sessions"));
    const fs::path session_dir = dir("sessions") / manifest.id;
    fs::create_directories(session_dir);
    write_text(session_dir / "manifest.json", to_json(manifest).dump(2) + "\n");
    std::ofstream(session_dir / "events.jsonl", std::ios::app);
    return manifest.id;
}

SessionManifest RunStore::session_manifest(const std::string& id) const {
    const auto path = dir("sessions") / id / "manifest.json";
    if (!fs::exists(path)) throw Error(ErrorCode::not_found, "unknown session '" + id + "'");
    return manifest_from_json(read_json(path));
}

std::unique_ptr<EventLog> RunStore::open_event_log(const std::string& id) const {
    if (!fs::exists(dir("sessions") / id))
        throw Error(ErrorCode::not_found, "unknown session '" + id + "'");
    return std::make_unique<EventLog>(dir("sessions") / id / "events.jsonl");
}

std::vector<LoggedEvent> RunStore::session_events(const std::string& id) const {
    if (!fs::exists(dir("sessions") / id))
        throw Error(ErrorCode::not_found, "unknown session '" + id + "'");
    return read_event_log(dir("sessions") / id / "events.jsonl");
}

SessionState RunStore::replay_session(const std::string& id) const {
    const auto manifest = session_manifest(id);
    const auto events = session_events(id);
    return replay(manifest, events);
}

std::string RunStore::add_pair(ConversationPair pair, bool partial) {
    std::lock_guard lock(mutex_);
    pair.id = next_id("pair", dir("pairs"));
    json j = to_json(pair);
    j["partial"] = partial;
    write_text(dir("pairs") / (pair.id + ".json"), j.dump(2) + "\n");
    return pair.id;
}

void RunStore::attach_reference(const std::string& pair_id, Dialogue human_side) {
    std::lock_guard lock(mutex_);
    const auto path = dir("pairs") / (pair_id + ".json");
    if (!fs::exists(path)) throw Error(ErrorCode::not_found, "unknown pair '" + pair_id + "'");
    json j = read_json(path);
    ConversationPair pair = pair_from_json(j);
    if (!pair.human_side.messages.empty())
        throw Error(ErrorCode::conflict, "pair " + pair_id + " already has a reference");
    human_side.mode = pair.mode;
    human_side.topic = pair.machine_side.topic;
    pair.human_side = std::move(human_side);
    pair.check();
    const bool partial = j.value("partial", false);
    j = to_json(pair);
    j["partial"] = partial;
    write_text(path, j.dump(2) + "\n");
}

ConversationPair RunStore::pair(const std::string& id) const {
    const auto path = dir("pairs") / (id + ".json");
    if (!fs::exists(path)) throw Error(ErrorCode::not_found, "unknown pair '" + id + "'");
    return pair_from_json(read_json(path));
}

bool RunStore::pair_partial(const std::string& id) const {
    const auto path = dir("pairs") / (id + ".json");
    if (!fs::exists(path)) throw Error(ErrorCode::not_found, "unknown pair '" + id + "'");
    return read_json(path).value("partial", false);
}

std::vector<ConversationPair> RunStore::pairs(bool complete_only) const {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir("pairs")))
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<ConversationPair> out;
    for (const auto& path : files) {
        const json j = read_json(path);
        auto pair = pair_from_json(j);
        if (complete_only && (pair.human_side.messages.empty() || j.value("partial", false)))
            continue;
        out.push_back(std::move(pair));
    }
    return out;
}

void RunStore::put_item(const QuestionnaireItem& item) {
    std::lock_guard lock(mutex_);
    write_text(dir("questionnaires") / (item.id + ".json"),
               public_questionnaire(item).dump(2) + "\n");
    json key = {{"id", item.id},
                {"pair_id", item.pair_id},
                {"order", to_string(item.order)},
                {"answer_key", to_string(item.answer_key)}};
    write_text(dir("keys") / (item.id + ".json"), key.dump(2) + "\n");
}

std::map<std::string, QuestionnaireItem> RunStore::items() const {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir("keys")))
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::map<std::string, QuestionnaireItem> out;
    for (const auto& path : files) {
        const json key = read_json(path);
        QuestionnaireItem item;
        item.id = key.at("id").get<std::string>();
        item.pair_id = key.at("pair_id").get<std::string>();
        item.order = key.at("order").get<std::string>() == "machine_first"
                         ? Presentation::machine_first
                         : Presentation::human_first;
        item.answer_key = option_from_string(key.at("answer_key").get<std::string>());
        const auto p = pair(item.pair_id);
        const bool machine_first = item.order == Presentation::machine_first;
        item.conversation1 = machine_first ? p.machine_side : p.human_side;
        item.conversation2 = machine_first ? p.human_side : p.machine_side;
        out.emplace(item.id, std::move(item));
    }
    return out;
}

json RunStore::public_item(const std::string& id) const {
    const auto path = dir("questionnaires") / (id + ".json");
    if (!fs::exists(path)) throw Error(ErrorCode::not_found, "unknown questionnaire '" + id + "'");
    return read_json(path);
}

void RunStore::append_judgments(std::span<const JudgmentRecord> records) {
    std::lock_guard lock(mutex_);
    std::ofstream out(root_ / "judgments.jsonl", std::ios::app | std::ios::binary);
    for (const auto& rec : records) out << to_json(rec).dump() << '\n';
}

std::vector<JudgmentRecord> RunStore::judgments() const {
    std::lock_guard lock(mutex_);
    std::vector<JudgmentRecord> out;
    const auto path = root_ / "judgments.jsonl";
    if (!fs::exists(path)) return out;
    std::istringstream in(read_text(path));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            out.push_back(record_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::corruption, "judgments.jsonl: " + std::string(e.what()));
        }
    }
    return out;
}

EvaluationIndex RunStore::index() const {
    EvaluationIndex index;
    index.items = items();
    for (auto& p : pairs(false)) index.pairs.emplace(p.id, std::move(p));
    return index;
}

}  // namespace ttharness
