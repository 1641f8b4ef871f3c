// ttharness: command-line entry points for every pipeline stage.

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <iostream>
#include <sstream>
#include <thread>

#include "ttharness/clock.hpp"
#include "ttharness/error.hpp"
#include "ttharness/harness.hpp"
#include "ttharness/live_session.hpp"
#include "ttharness/service.hpp"

using namespace ttharness;
namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string config_path;
    std::string store;
    std::uint64_t seed = 0;
};

HarnessConfig load(const Globals& g) {
    HarnessConfig config = g.config_path.empty() ? HarnessConfig{} : load_config(g.config_path);
    if (!g.store.empty()) config.store_root = g.store;
    return config;
}

std::optional<DialogueMode> mode_opt(const std::string& text) {
    if (text.empty()) return std::nullopt;
    try {
        return mode_from_string(text);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::string slurp(const std::string& path) {
    if (path == "-") {
        std::stringstream buffer;
        buffer << std::cin.rdbuf();
        return buffer.str();
    }
    if (!fs::exists(path)) throw Error(ErrorCode::not_found, "no such file: " + path);
    return read_text(path);
}

// ingest

struct IngestArgs {
    std::string input;
    std::string format = "transcript";
    std::string self_sender;
    std::string mode = "burst";
    std::size_t history_turns = 0;
    std::string name;
    std::string preamble_file;
};

int cmd_ingest(const Globals& g, const IngestArgs& a) {
    const HarnessConfig config = load(g);
    RunStore store(config.store_root);
    IngestRequest req;
    req.text = slurp(a.input);
    req.format = a.format;
    req.self_sender = a.self_sender;
    req.mode = *mode_opt(a.mode);
    if (a.history_turns > 0) req.history_turns = a.history_turns;
    req.name = a.name.empty() ? fs::path(a.input).stem().string() : a.name;
    if (!a.preamble_file.empty()) req.preamble = slurp(a.preamble_file);
    req.display_offset = config.display_offset;
    const auto out = ingest_persona(store, req);
    for (const auto& f : out.flags)
        std::cerr << "review: message " << f.message_index << ": " << f.reason << '\n';
    std::cerr << "burst turns: " << out.burst_turns << ", ping-pong turns: " << out.ping_pong_turns
              << ", stored: " << out.stored_turns << " (" << a.mode << ")\n";
    std::cout << out.persona_id << '\n';
    return 0;
}

// selfdirect

struct SelfDirectArgs {
    std::string persona;
    std::string backend;
    int topics = 10;
    std::vector<std::string> topic_list;
    int m = 10;
    std::string mode;
    int max_calls = 5;
};

int cmd_selfdirect(const Globals& g, const SelfDirectArgs& a) {
    if (a.topics < 1 && a.topic_list.empty()) throw UsageError("--topics must be at least 1");
    if (a.m < 1) throw UsageError("--m must be at least 1");
    const HarnessConfig config = load(g);
    RunStore store(config.store_root);
    const auto backend = make_backend(config, a.backend.empty() ? "openai" : a.backend);

    SelfDirectRequest req;
    req.persona_id = a.persona;
    req.backend_label = a.backend.empty() ? backend->label() : a.backend;
    req.topic_count = a.topics;
    req.topics = a.topic_list;
    req.m = a.m;
    req.mode = mode_opt(a.mode);
    req.seed = g.seed;
    req.max_calls_per_topic = a.max_calls;
    req.params = config.params;
    const auto out = run_selfdirect(store, *backend, req);

    for (const auto& t : out.result.topics)
        std::cerr << to_string(t.status) << '\t' << t.calls << " call(s)\t" << t.topic
                  << (t.error.empty() ? "" : "\t" + t.error) << '\n';
    std::cerr << "pseudo turns: " << out.result.total_turns() << '\n';
    std::cout << out.run_id << '\n';
    if (!out.result.complete()) {
        std::cerr << "partial run stored at "
                  << (store.root() / "pseudo-runs" / out.run_id / "manifest.json").string() << '\n';
        return 1;
    }
    return 0;
}

// chat

struct ChatArgs {
    std::string persona;
    std::string backend;
    std::string pseudo_run;
    std::string mode;
    std::string topic;
    std::size_t m = 10;
    std::string human_script;
    double t1_s = -1.0;
    std::string model_label;
};

fs::path write_transcript(const RunStore& store, const std::string& session_id,
                          const Dialogue& suffix, const HarnessConfig& config) {
    TranscriptOptions opts;
    opts.display_offset = config.display_offset;
    const fs::path path = store.root() / "sessions" / session_id / "transcript.txt";
    const std::string text = render_transcript(suffix, opts);
    write_text(path, text.empty() ? text : text + "\n");
    return path;
}

std::atomic<bool> interrupted{false};

int cmd_chat(const Globals& g, const ChatArgs& a) {
    if (a.m < 1) throw UsageError("--m must be at least 1");
    const HarnessConfig config = load(g);
    RunStore store(config.store_root);

    SessionRequest req;
    req.persona_id = a.persona;
    req.backend_id = a.backend.empty() ? "openai" : a.backend;
    if (!a.pseudo_run.empty()) req.pseudo_run = a.pseudo_run;
    req.mode = mode_opt(a.mode);
    if (a.t1_s >= 0)
        req.t1 = std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(a.t1_s * 1000)));
    req.topic = a.topic;
    req.seed = g.seed;
    const SessionManifest manifest = open_session(store, config, req);
    const auto chatbot = std::make_shared<const Chatbot>(
        make_chatbot(store, manifest, make_backend(config, manifest.backend), config));
    auto log = store.open_event_log(manifest.id);
    const EventSink sink = [&log](const EngineEvent& e) { log->append(e); };
    const std::string model = a.model_label.empty() ? manifest.backend : a.model_label;

    SessionState final_state;
    if (!a.human_script.empty()) {
        auto human = ScriptedHuman::from_file(a.human_script);
        SessionState state = make_session(manifest.id, manifest.engine, manifest.primed);
        const auto start = floor_seconds(system_now());
        const auto turns = run_final_turns(state, *chatbot, human, a.m, to_time_point(start), {},
                                           sink);
        (void)turns;
        final_state = std::move(state);
    } else {
        LiveSession live(make_session(manifest.id, manifest.engine, manifest.primed), chatbot,
                         sink);
        std::atomic<bool> done{false};
        std::thread printer([&] {
            std::uint64_t seen = 0;
            bool announced = false;
            while (!done) {
                for (const auto& f : live.wait_frames(seen, std::chrono::milliseconds(200))) {
                    seen = f.seq;
                    if (f.role == Role::System) std::cout << "Response: " << f.content << std::endl;
                }
                if (!announced && live.idle() && count_turns(live.snapshot().suffix()) >= a.m) {
                    std::cerr << "[" << a.m << " turns reached; press Ctrl-D to finish]\n";
                    announced = true;
                }
            }
        });
        std::cerr << "session " << manifest.id << ": type messages, Ctrl-D to end\n";
        std::string line;
        while (!interrupted && std::getline(std::cin, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            try {
                live.submit(line);
            } catch (const Error& e) {
                std::cerr << "not sent: " << e.what() << '\n';
            }
        }
        live.close();
        done = true;
        printer.join();
        final_state = live.snapshot();
    }

    const auto ended = end_session(store, manifest, final_state, a.m, model);
    const auto path = write_transcript(store, manifest.id, ended.suffix, config);
    std::cerr << "session " << manifest.id << ": " << ended.turns << " turn(s) stored as "
              << ended.pair_id << (ended.partial ? " (partial)" : "") << '\n';
    std::cout << path.string() << '\n';
    return 0;
}

// serve

int cmd_serve(const Globals& g, const std::string& host, int port) {
    Service service(load(g));
    const int bound = service.bind(host, port);
    if (bound < 0) throw Error(ErrorCode::configuration, "cannot bind " + host);
    std::cerr << "listening on " << host << ':' << bound << '\n';
    service.run();
    return 0;
}

// questionnaires, pairs, judge, report, replay

int cmd_export(const Globals& g, const std::string& out) {
    const HarnessConfig config = load(g);
    RunStore store(config.store_root);
    const fs::path dir = out.empty() ? store.root() / "export" : fs::path(out);
    const auto created = export_questionnaires(store, g.seed, dir);
    std::cerr << created.size() << " new item(s)\n";
    std::cout << dir.string() << '\n';
    return 0;
}

int cmd_attach(const Globals& g, const std::string& pair_id, const std::string& input) {
    const HarnessConfig config = load(g);
    RunStore store(config.store_root);
    const ConversationPair pair = store.pair(pair_id);
    TranscriptOptions opts;
    opts.display_offset = config.display_offset;
    Dialogue human = parse_transcript(slurp(input), pair.mode, opts);
    human.mode = pair.mode;
    store.attach_reference(pair_id, last_turns(human, pair.turns));
    std::cout << pair_id << '\n';
    return 0;
}

int cmd_judge(const Globals& g, const std::string& judges, const std::string& ingest,
              bool export_items, const std::string& out) {
    if (export_items) return cmd_export(g, out);
    const HarnessConfig config = load(g);
    RunStore store(config.store_root);
    if (!ingest.empty()) {
        const auto records = ingest_human_judgments(slurp(ingest), store.items(), store.judgments());
        store.append_judgments(records);
        std::cerr << records.size() << " human judgment(s) stored\n";
        return 0;
    }
    const auto ids = judges.empty() ? config.judge_backends : split_list(judges);
    if (ids.empty()) throw UsageError("no judges given (--judges or judge.backends)");
    std::vector<std::shared_ptr<ChatBackend>> backends;
    for (const auto& id : ids) backends.push_back(make_backend(config, id));
    const auto records = run_judges(store, backends);
    std::size_t invalid = 0;
    for (const auto& r : records) invalid += r.valid() ? 0 : 1;
    std::cerr << records.size() << " judgment(s), " << invalid << " unusable\n";
    std::cout << (store.root() / "judgments.jsonl").string() << '\n';
    return 0;
}

int cmd_report(const Globals& g, const std::string& group_by, const std::string& format) {
    const auto keys = split_list(group_by);
    for (const auto& k : keys)
        if (!is_group_key(k)) throw UsageError("unknown group key '" + k + "'");
    if (format != "csv" && format != "json" && format != "summary" &&
        !format.starts_with("demographics:"))
        throw UsageError("unknown format '" + format + "'");
    const HarnessConfig config = load(g);
    RunStore store(config.store_root);
    std::cout << render_report(store, keys, format);
    if (format == "json") std::cout << '\n';
    return 0;
}

int cmd_replay(const Globals& g, const std::string& session_id) {
    const HarnessConfig config = load(g);
    RunStore store(config.store_root);
    const SessionState state = store.replay_session(session_id);
    TranscriptOptions opts;
    opts.display_offset = config.display_offset;
    const std::string text = render_transcript(state.suffix(), opts);
    std::cout << text << (text.empty() ? "" : "\n");
    std::cerr << count_turns(state.suffix()) << " turn(s), " << state.queries_issued
              << " model quer" << (state.queries_issued == 1 ? "y" : "ies") << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-directed Turing test harness"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "JSON configuration file");
    app.add_option("--store", g.store, "Run store directory (overrides paths.store_root)");
    app.add_option("--seed", g.seed, "Seed for every random draw");

    std::function<int()> action;

    IngestArgs ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Store a persona from chat records");
    c_ingest->add_option("input", ingest.input, "Transcript or CSV export ('-' for stdin)")
        ->required();
    c_ingest->add_option("--format", ingest.format)->check(CLI::IsMember({"transcript", "csv"}));
    c_ingest->add_option("--self", ingest.self_sender, "CSV sender name of the target individual");
    c_ingest->add_option("--mode", ingest.mode)->check(CLI::IsMember({"burst", "ping_pong", "ping-pong"}));
    c_ingest->add_option("--history-turns", ingest.history_turns, "Keep the most recent N turns");
    c_ingest->add_option("--name", ingest.name);
    c_ingest->add_option("--preamble", ingest.preamble_file, "File replacing the persona block");
    c_ingest->callback([&] { action = [&] { return cmd_ingest(g, ingest); }; });

    SelfDirectArgs sd;
    auto* c_sd = app.add_subcommand("selfdirect", "Generate topics and the pseudo-dialogue");
    c_sd->add_option("--persona", sd.persona)->required();
    c_sd->add_option("--backend", sd.backend);
    c_sd->add_option("--topics", sd.topics, "Number of topics to generate");
    c_sd->add_option("--topic", sd.topic_list, "Use these topics instead of generating");
    c_sd->add_option("--m", sd.m, "Turns per topic");
    c_sd->add_option("--mode", sd.mode);
    c_sd->add_option("--max-calls", sd.max_calls, "Backend calls allowed per topic");
    c_sd->callback([&] { action = [&] { return cmd_selfdirect(g, sd); }; });

    ChatArgs chat;
    auto* c_chat = app.add_subcommand("chat", "Run the final live turns");
    c_chat->add_option("--persona", chat.persona)->required();
    c_chat->add_option("--backend", chat.backend);
    c_chat->add_option("--pseudo-run", chat.pseudo_run);
    c_chat->add_option("--mode", chat.mode);
    c_chat->add_option("--topic", chat.topic);
    c_chat->add_option("--m", chat.m, "Turns to judge");
    c_chat->add_option("--human-script", chat.human_script, "Scripted human bursts");
    c_chat->add_option("--t1", chat.t1_s, "Batching window in seconds");
    c_chat->add_option("--model-label", chat.model_label, "Model name recorded on the pair");
    c_chat->callback([&] { action = [&] { return cmd_chat(g, chat); }; });

    std::string host = "127.0.0.1";
    int port = 8080;
    auto* c_serve = app.add_subcommand("serve", "Start the HTTP service");
    c_serve->add_option("--host", host);
    c_serve->add_option("--port", port);
    c_serve->callback([&] { action = [&] { return cmd_serve(g, host, port); }; });

    std::string export_dir;
    auto* c_q = app.add_subcommand("questionnaires", "Questionnaire items");
    c_q->require_subcommand(1);
    auto* c_export = c_q->add_subcommand("export", "Assemble items for complete pairs");
    c_export->add_option("--out", export_dir);
    c_export->callback([&] { action = [&] { return cmd_export(g, export_dir); }; });

    std::string pair_id, reference;
    auto* c_pairs = app.add_subcommand("pairs", "Conversation pairs");
    c_pairs->require_subcommand(1);
    auto* c_attach = c_pairs->add_subcommand("attach", "Attach the human reference to a pair");
    c_attach->add_option("pair", pair_id)->required();
    c_attach->add_option("input", reference, "Human-human transcript")->required();
    c_attach->callback([&] { action = [&] { return cmd_attach(g, pair_id, reference); }; });

    std::string judges, human_file;
    bool export_items = false;
    auto* c_judge = app.add_subcommand("judge", "Run LLM judges or ingest human judgments");
    c_judge->add_option("--judges", judges, "Comma-separated backend ids");
    c_judge->add_option("--ingest", human_file, "Human judgments (JSON lines)");
    c_judge->add_flag("--export-questionnaires", export_items);
    c_judge->add_option("--out", export_dir);
    c_judge->callback([&] {
        action = [&] { return cmd_judge(g, judges, human_file, export_items, export_dir); };
    });

    std::string group_by, format = "csv";
    auto* c_report = app.add_subcommand("report", "Pass-rate report");
    c_report->add_option("--group-by", group_by, "Comma-separated keys");
    c_report->add_option("--format", format, "csv, json, summary or demographics:<dimension>");
    c_report->callback([&] { action = [&] { return cmd_report(g, group_by, format); }; });

    std::string session_id;
    auto* c_replay = app.add_subcommand("replay", "Rebuild a session from its event log");
    c_replay->add_option("session", session_id)->required();
    c_replay->callback([&] { action = [&] { return cmd_replay(g, session_id); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    std::signal(SIGINT, [](int) { interrupted = true; });
    try {
        return action();
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
