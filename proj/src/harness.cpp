#include "ttharness/harness.hpp"

#include <limits>
#include <set>
#include <sstream>

#include "ttharness/error.hpp"

namespace ttharness {

IngestResult ingest_persona(RunStore& store, const IngestRequest& request) {
    Dialogue records;
    if (request.format == "csv") {
        if (request.self_sender.empty())
            throw Error(ErrorCode::bad_request, "csv ingest needs the target's sender name");
        records = import_chat_export(request.text, request.self_sender, request.display_offset);
    } else if (request.format == "transcript") {
        TranscriptOptions opts;
        opts.display_offset = request.display_offset;
        records = parse_transcript(request.text, DialogueMode::burst, opts);
    } else {
        throw Error(ErrorCode::bad_request, "unknown persona format '" + request.format + "'");
    }
    if (records.messages.empty()) throw Error(ErrorCode::bad_request, "chat records are empty");

    IngestResult result;
    result.burst_turns = count_turns(records);
    auto converted = to_ping_pong(records, request.min_chars);
    result.ping_pong_turns = count_turns(converted.dialogue);

    const Dialogue& chosen =
        request.mode == DialogueMode::burst ? records : converted.dialogue;
    if (request.mode == DialogueMode::ping_pong) result.flags = converted.flags;
    const Dialogue stored = last_turns(
        chosen, request.history_turns.value_or(std::numeric_limits<std::size_t>::max()));
    result.stored_turns = count_turns(stored);
    if (result.stored_turns == 0)
        throw Error(ErrorCode::bad_request, "chat records contain no complete turn");

    PersonaRecord persona;
    persona.name = request.name;
    persona.mode = request.mode;
    persona.history = stored;
    persona.preamble = request.preamble;
    result.persona_id = store.add_persona(std::move(persona));
    return result;
}

SelfDirectResult run_selfdirect(RunStore& store, ChatBackend& backend,
                                const SelfDirectRequest& request, const RetryPolicy& retry) {
    const PersonaRecord persona = store.persona(request.persona_id);
    SelfDirectResult out;
    out.topics = request.topics.empty() ? generate_topics(backend, request.topic_count, 3, retry)
                                        : request.topics;

    PseudoGenPlan plan;
    plan.m = request.m;
    plan.topics = out.topics;
    plan.mode = request.mode.value_or(persona.mode);
    plan.seed_history = persona.history;
    plan.persona_preamble = persona.preamble;
    plan.max_calls_per_topic = request.max_calls_per_topic;
    plan.params = request.params;
    out.result = generate_pseudo_dialogue(backend, plan, retry);

    PseudoRunRecord record;
    record.persona_id = persona.id;
    record.backend = request.backend_label.empty() ? backend.label() : request.backend_label;
    record.mode = plan.mode;
    record.m = plan.m;
    record.seed = request.seed;
    record.topics = out.topics;
    record.result = out.result;
    out.run_id = store.add_pseudo_run(std::move(record));
    return out;
}

SessionManifest open_session(RunStore& store, const HarnessConfig& config,
                             const SessionRequest& request) {
    const PersonaRecord persona = store.persona(request.persona_id);
    (void)make_backend(config, request.backend_id);

    SessionManifest manifest;
    manifest.persona_id = persona.id;
    manifest.backend = request.backend_id;
    manifest.topic = request.topic;
    manifest.engine.mode = request.mode.value_or(persona.mode);
    manifest.engine.t1 = request.t1.value_or(config.t1);
    manifest.engine.delay = config.delay;
    manifest.engine.repoll = config.repoll;
    manifest.engine.seed = request.seed;
    manifest.persona_turns = count_turns(persona.history);
    manifest.primed = persona.history;
    if (request.pseudo_run) {
        const PseudoRunRecord run = store.pseudo_run(*request.pseudo_run);
        if (run.persona_id != persona.id)
            throw Error(ErrorCode::bad_request,
                        "pseudo run " + run.id + " belongs to persona " + run.persona_id);
        if (run.mode != manifest.engine.mode)
            throw Error(ErrorCode::bad_request, "pseudo run " + run.id + " is " +
                                                    to_string(run.mode) + ", session is " +
                                                    to_string(manifest.engine.mode));
        manifest.pseudo_run = run.id;
        manifest.primed = run.result.history;
        manifest.pseudo_turns = run.result.total_turns();
    }
    manifest.primed.mode = manifest.engine.mode;
    manifest.engine.delay.check();
    manifest.id = store.create_session(manifest);
    return manifest;
}

Chatbot make_chatbot(const RunStore& store, const SessionManifest& manifest,
                     std::shared_ptr<ChatBackend> backend, const HarnessConfig& config) {
    const PersonaRecord persona = store.persona(manifest.persona_id);
    PersonaContext ctx;
    ctx.history = manifest.primed;
    ctx.mode = manifest.engine.mode;
    ctx.persona_preamble = persona.preamble;
    ctx.display_offset = config.display_offset;
    return Chatbot(std::move(backend), std::move(ctx), config.params);
}

EndResult end_session(RunStore& store, const SessionManifest& manifest, const SessionState& state,
                      std::size_t m, const std::string& model_label) {
    EndResult result;
    const Dialogue suffix = state.suffix();
    const std::size_t available = count_turns(suffix);
    result.suffix = last_turns(suffix, m);
    result.suffix.topic = manifest.topic;
    result.turns = count_turns(result.suffix);
    result.partial = available < m;

    ConversationPair pair;
    pair.topic = manifest.topic;
    pair.turns = result.turns;
    pair.preceding_turns = manifest.pseudo_turns;
    pair.history_turns = manifest.persona_turns;
    pair.model = model_label;
    pair.mode = manifest.engine.mode;
    pair.machine_side = result.suffix;
    pair.human_side = Dialogue{{}, pair.mode, manifest.topic};
    result.pair_id = store.add_pair(std::move(pair), result.partial);
    return result;
}

std::vector<QuestionnaireItem> export_questionnaires(
    RunStore& store, std::uint64_t seed, const std::optional<std::filesystem::path>& out_dir) {
    const auto existing = store.items();
    std::set<std::string> covered;
    for (const auto& [id, item] : existing) covered.insert(item.pair_id);

    Rng rng(seed);
    std::vector<QuestionnaireItem> created;
    for (const auto& pair : store.pairs(true)) {
        if (covered.count(pair.id)) continue;
        auto item = assemble_questionnaire(pair, rng, "q-" + pair.id);
        store.put_item(item);
        created.push_back(std::move(item));
    }

    if (out_dir) {
        std::filesystem::create_directories(*out_dir);
        json keys = json::object();
        for (const auto& [id, item] : store.items()) {
            write_text(*out_dir / (id + ".json"), public_questionnaire(item).dump(2) + "\n");
            keys[id] = {{"pair_id", item.pair_id},
                        {"order", to_string(item.order)},
                        {"answer_key", to_string(item.answer_key)}};
        }
        write_text(*out_dir / "answer_keys.json", keys.dump(2) + "\n");
    }
    return created;
}

std::vector<JudgmentRecord> run_judges(RunStore& store,
                                       const std::vector<std::shared_ptr<ChatBackend>>& judges,
                                       const RetryPolicy& retry) {
    std::set<std::pair<std::string, std::string>> done;
    for (const auto& rec : store.judgments()) done.insert({rec.judge_id, rec.item_id});

    std::vector<JudgmentRecord> records;
    const auto items = store.items();
    for (const auto& judge : judges) {
        for (const auto& [id, item] : items) {
            if (done.count({judge->label(), id})) continue;
            records.push_back(run_llm_judge(*judge, item, retry));
        }
    }
    store.append_judgments(records);
    return records;
}

std::string render_report(const RunStore& store, const std::vector<std::string>& group_by,
                          const std::string& format) {
    for (const auto& key : group_by)
        if (!is_group_key(key))
            throw Error(ErrorCode::bad_request, "unknown group key '" + key + "'");
    const auto records = store.judgments();
    const auto index = store.index();
    if (format == "csv") return render_reports_csv(aggregate(records, index, group_by), group_by);
    if (format == "json") return render_reports_json(aggregate(records, index, group_by));
    if (format == "summary") return render_summary_csv(summary_table(records, index));
    if (format.starts_with("demographics:")) {
        std::ostringstream out;
        out << "band,correct,total,accuracy\n";
        for (const auto& band : demographic_accuracy(records, format.substr(13)))
            out << band.band << ',' << band.correct << ',' << band.total << ','
                << format_percent(band.accuracy()) << '\n';
        return out.str();
    }
    throw Error(ErrorCode::bad_request, "unknown report format '" + format + "'");
}

}  // namespace ttharness
