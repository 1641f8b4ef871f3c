#include "ttharness/service.hpp"

#include <httplib.h>

#include <atomic>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "ttharness/clock.hpp"
#include "ttharness/error.hpp"
#include "ttharness/harness.hpp"
#include "ttharness/live_session.hpp"

namespace ttharness {
namespace {

int status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::not_found: return 404;
        case ErrorCode::conflict: return 409;
        case ErrorCode::closed: return 410;
        case ErrorCode::backend_failure: return 502;
        case ErrorCode::configuration:
        case ErrorCode::corruption: return 500;
        default: return 400;
    }
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
    send_json(res, {{"error", {{"code", to_string(code)}, {"message", message}}}},
              status_for(code));
}

json body_of(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
        json j = json::parse(req.body);
        if (!j.is_object()) throw Error(ErrorCode::bad_request, "request body must be an object");
        return j;
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::bad_request, std::string("malformed JSON: ") + e.what());
    }
}

std::uint64_t query_u64(const httplib::Request& req, const std::string& key,
                        std::uint64_t fallback) {
    if (!req.has_param(key)) return fallback;
    const std::string text = req.get_param_value(key);
    try {
        std::size_t used = 0;
        const auto v = std::stoull(text, &used);
        if (used != text.size()) throw std::invalid_argument(key);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::bad_request, "query parameter " + key + " must be a number");
    }
}

json frame_json(const Frame& f, std::chrono::minutes offset) {
    return {{"seq", f.seq},
            {"role", to_string(f.role)},
            {"sent_at", format_timestamp(f.sent_at, offset)},
            {"content", f.content}};
}

std::vector<Frame> frames_of(const SessionState& state, std::uint64_t after) {
    std::vector<Frame> frames;
    const auto& msgs = state.history.messages;
    for (std::size_t i = state.primed_size + after; i < msgs.size(); ++i)
        frames.push_back({static_cast<std::uint64_t>(i - state.primed_size + 1), msgs[i].role(),
                          msgs[i].sent_at(), msgs[i].content()});
    return frames;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

}  // namespace

struct LiveEntry {
    SessionManifest manifest;
    std::unique_ptr<EventLog> log;
    std::unique_ptr<LiveSession> session;
    std::atomic<std::uint64_t> stream_generation{0};
    std::optional<EndResult> ended;
};

struct Service::Impl {
    explicit Impl(HarnessConfig cfg) : config(std::move(cfg)), store(config.store_root) {}

    HarnessConfig config;
    RunStore store;
    httplib::Server server;
    std::mutex mutex;
    std::map<std::string, std::shared_ptr<LiveEntry>> live;
    std::thread thread;

    std::shared_ptr<LiveEntry> find_live(const std::string& id) {
        std::lock_guard lock(mutex);
        const auto it = live.find(id);
        return it == live.end() ? nullptr : it->second;
    }

    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

    static Handler guarded(Handler h) {
        return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
            try {
                h(req, res);
            } catch (const ParseError& e) {
                send_error(res, ErrorCode::parse, e.what());
            } catch (const BackendError& e) {
                send_error(res, ErrorCode::backend_failure, e.what());
            } catch (const Error& e) {
                send_error(res, e.code(), e.what());
            } catch (const json::exception& e) {
                send_error(res, ErrorCode::bad_request, e.what());
            } catch (const std::exception& e) {
                send_error(res, ErrorCode::bad_request, e.what());
            }
        };
    }

    void routes();

    void create_persona(const httplib::Request& req, httplib::Response& res);
    void create_pseudo_run(const httplib::Request& req, httplib::Response& res);
    void create_session(const httplib::Request& req, httplib::Response& res);
    void post_messages(const httplib::Request& req, httplib::Response& res);
    void stream(const httplib::Request& req, httplib::Response& res);
    void end(const httplib::Request& req, httplib::Response& res);
    void attach_reference(const httplib::Request& req, httplib::Response& res);
    void assemble(const httplib::Request& req, httplib::Response& res);
    void judgment(const httplib::Request& req, httplib::Response& res);
    void report(const httplib::Request& req, httplib::Response& res);
};

void Service::Impl::routes() {
    auto bind = [this](void (Impl::*fn)(const httplib::Request&, httplib::Response&)) {
        return guarded([this, fn](const httplib::Request& q, httplib::Response& r) {
            (this->*fn)(q, r);
        });
    };
    server.Post("/personas", bind(&Impl::create_persona));
    server.Get("/personas/:id", guarded([this](const auto& req, auto& res) {
        const auto p = store.persona(req.path_params.at("id"));
        send_json(res, {{"id", p.id},
                        {"name", p.name},
                        {"mode", to_string(p.mode)},
                        {"turns", count_turns(p.history)},
                        {"history", to_json(p.history)}});
    }));
    server.Post("/pseudo-runs", bind(&Impl::create_pseudo_run));
    server.Get("/pseudo-runs/:id", guarded([this](const auto& req, auto& res) {
        send_json(res, store.pseudo_run_manifest(req.path_params.at("id")));
    }));
    server.Post("/sessions", bind(&Impl::create_session));
    server.Post("/sessions/:id/messages", bind(&Impl::post_messages));
    server.Get("/sessions/:id/stream", bind(&Impl::stream));
    server.Get("/sessions/:id", guarded([this](const auto& req, auto& res) {
        const std::string id = req.path_params.at("id");
        const auto entry = find_live(id);
        const SessionState state = entry ? entry->session->snapshot() : store.replay_session(id);
        json body = {{"id", id},
                     {"closed", state.closed},
                     {"idle", state.idle()},
                     {"frames", state.history.messages.size() - state.primed_size},
                     {"turns", count_turns(state.suffix())},
                     {"queries", state.queries_issued}};
        if (state.last_error) body["last_error"] = *state.last_error;
        send_json(res, body);
    }));
    server.Delete("/sessions/:id", bind(&Impl::end));
    server.Post("/pairs/:id/reference", bind(&Impl::attach_reference));
    server.Post("/questionnaires", bind(&Impl::assemble));
    server.Get("/questionnaires", guarded([this](const auto&, auto& res) {
        json list = json::array();
        for (const auto& [id, item] : store.items()) list.push_back(public_questionnaire(item));
        send_json(res, list);
    }));
    server.Get("/questionnaires/:id", guarded([this](const auto& req, auto& res) {
        send_json(res, store.public_item(req.path_params.at("id")));
    }));
    server.Post("/questionnaires/:id/judgments", bind(&Impl::judgment));
    server.Get("/reports", bind(&Impl::report));
}

void Service::Impl::create_persona(const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    IngestRequest in;
    in.text = body.at("text").get<std::string>();
    in.format = body.value("format", "transcript");
    in.self_sender = body.value("self_sender", "");
    in.mode = mode_from_string(body.value("mode", "burst"));
    if (body.contains("history_turns"))
        in.history_turns = body["history_turns"].get<std::size_t>();
    in.name = body.value("name", "");
    in.preamble = body.value("preamble", "");
    in.min_chars = body.value("min_chars", std::size_t{2});
    in.display_offset = config.display_offset;
    const auto out = ingest_persona(store, in);
    json flags = json::array();
    for (const auto& f : out.flags)
        flags.push_back({{"message_index", f.message_index}, {"reason", f.reason}});
    send_json(res,
              {{"persona_id", out.persona_id},
               {"burst_turns", out.burst_turns},
               {"ping_pong_turns", out.ping_pong_turns},
               {"stored_turns", out.stored_turns},
               {"flags", flags}},
              201);
}

void Service::Impl::create_pseudo_run(const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    SelfDirectRequest in;
    in.persona_id = body.at("persona_id").get<std::string>();
    in.backend_label = body.at("backend").get<std::string>();
    in.topic_count = body.value("topic_count", 10);
    in.topics = body.value("topics", std::vector<std::string>{});
    in.m = body.value("m", 10);
    if (body.contains("mode")) in.mode = mode_from_string(body["mode"].get<std::string>());
    in.seed = body.value("seed", std::uint64_t{0});
    in.params = config.params;
    const auto backend = make_backend(config, in.backend_label);
    const auto out = run_selfdirect(store, *backend, in);
    send_json(res, store.pseudo_run_manifest(out.run_id), 201);
}

void Service::Impl::create_session(const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    SessionRequest in;
    in.persona_id = body.at("persona_id").get<std::string>();
    in.backend_id = body.at("backend").get<std::string>();
    if (body.contains("pseudo_run")) in.pseudo_run = body["pseudo_run"].get<std::string>();
    if (body.contains("mode")) in.mode = mode_from_string(body["mode"].get<std::string>());
    if (body.contains("t1_s"))
        in.t1 = std::chrono::milliseconds(
            static_cast<std::int64_t>(std::llround(body["t1_s"].get<double>() * 1000.0)));
    in.topic = body.value("topic", "");
    in.seed = body.value("seed", std::uint64_t{0});

    const auto manifest = open_session(store, config, in);
    auto entry = std::make_shared<LiveEntry>();
    entry->manifest = manifest;
    entry->log = store.open_event_log(manifest.id);
    auto chatbot = std::make_shared<const Chatbot>(
        make_chatbot(store, manifest, make_backend(config, manifest.backend), config));
    EventLog* log = entry->log.get();
    entry->session = std::make_unique<LiveSession>(
        make_session(manifest.id, manifest.engine, manifest.primed), std::move(chatbot),
        [log](const EngineEvent& e) { log->append(e); });
    {
        std::lock_guard lock(mutex);
        live[manifest.id] = entry;
    }
    send_json(res,
              {{"session_id", manifest.id},
               {"mode", to_string(manifest.engine.mode)},
               {"primed_turns", count_turns(manifest.primed)}},
              201);
}

void Service::Impl::post_messages(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.path_params.at("id");
    const auto entry = find_live(id);
    if (!entry) {
        (void)store.session_manifest(id);
        throw Error(ErrorCode::closed, "session " + id + " is not active");
    }
    const json body = body_of(req);
    std::vector<std::string> lines;
    if (body.contains("messages")) {
        lines = body["messages"].get<std::vector<std::string>>();
    } else {
        lines.push_back(body.at("content").get<std::string>());
    }
    if (lines.empty()) throw Error(ErrorCode::bad_request, "no messages given");
    for (auto& line : lines) entry->session->submit(std::move(line));
    send_json(res, {{"accepted", lines.size()}}, 202);
}

void Service::Impl::stream(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.path_params.at("id");
    const std::uint64_t after = query_u64(req, "after", 0);
    const bool follow = query_u64(req, "follow", 0) != 0;
    const auto offset = config.display_offset;
    const auto entry = find_live(id);

    if (!entry || !follow) {
        const SessionState state = entry ? entry->session->snapshot() : store.replay_session(id);
        std::string out;
        for (const auto& f : frames_of(state, after)) out += frame_json(f, offset).dump() + "\n";
        res.set_content(out, "application/x-ndjson");
        return;
    }

    // A newer stream client supersedes this one.
    const std::uint64_t generation = ++entry->stream_generation;
    auto cursor = std::make_shared<std::uint64_t>(after);
    res.set_chunked_content_provider(
        "application/x-ndjson",
        [entry, cursor, offset, generation](std::size_t, httplib::DataSink& sink) {
            if (entry->stream_generation != generation) {
                sink.done();
                return true;
            }
            const auto frames = entry->session->wait_frames(*cursor, std::chrono::milliseconds(200));
            for (const auto& f : frames) {
                const std::string line = frame_json(f, offset).dump() + "\n";
                if (!sink.write(line.data(), line.size())) return false;
                *cursor = f.seq;
            }
            if (frames.empty() && entry->session->closed()) sink.done();
            return true;
        });
}

void Service::Impl::end(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.path_params.at("id");
    const std::size_t m = query_u64(req, "m", 10);
    if (m == 0) throw Error(ErrorCode::bad_request, "m must be at least 1");
    const auto entry = find_live(id);
    if (!entry) {
        (void)store.session_manifest(id);
        throw Error(ErrorCode::closed, "session " + id + " is not active");
    }
    std::lock_guard lock(mutex);
    if (!entry->ended) {
        entry->session->close();
        const std::string model =
            req.has_param("model") ? req.get_param_value("model") : entry->manifest.backend;
        entry->ended = end_session(store, entry->manifest, entry->session->snapshot(), m, model);
    }
    send_json(res, {{"session_id", id},
                    {"pair_id", entry->ended->pair_id},
                    {"turns", entry->ended->turns},
                    {"partial", entry->ended->partial}});
}

void Service::Impl::attach_reference(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.path_params.at("id");
    const json body = body_of(req);
    const ConversationPair pair = store.pair(id);
    TranscriptOptions opts;
    opts.display_offset = config.display_offset;
    Dialogue human = body.contains("messages")
                         ? dialogue_from_json(body["messages"])
                         : parse_transcript(body.at("transcript").get<std::string>(), pair.mode,
                                            opts);
    human.mode = pair.mode;
    store.attach_reference(id, last_turns(human, pair.turns));
    send_json(res, {{"pair_id", id}, {"turns", pair.turns}});
}

void Service::Impl::assemble(const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    const auto created = export_questionnaires(store, body.value("seed", std::uint64_t{0}));
    json ids = json::array();
    for (const auto& item : created) ids.push_back(item.id);
    send_json(res, {{"created", ids}}, 201);
}

void Service::Impl::judgment(const httplib::Request& req, httplib::Response& res) {
    json body = body_of(req);
    body["item_id"] = req.path_params.at("id");
    const auto items = store.items();
    if (!items.count(body["item_id"].get<std::string>()))
        throw Error(ErrorCode::not_found,
                    "unknown questionnaire item '" + body["item_id"].get<std::string>() + "'");
    const auto existing = store.judgments();
    const auto records = ingest_human_judgments(body.dump(), items, existing);
    store.append_judgments(records);
    send_json(res, {{"item_id", records.front().item_id}, {"judge_id", records.front().judge_id}},
              201);
}

void Service::Impl::report(const httplib::Request& req, httplib::Response& res) {
    const auto group_by =
        split_list(req.has_param("group_by") ? req.get_param_value("group_by") : "");
    const std::string format = req.has_param("format") ? req.get_param_value("format") : "json";
    const std::string text = render_report(store, group_by, format);
    res.set_content(text, format == "json" ? "application/json" : "text/csv");
}

Service::Service(HarnessConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {
    impl_->routes();
}

Service::~Service() {
    stop();
    std::lock_guard lock(impl_->mutex);
    for (auto& [id, entry] : impl_->live) entry->session->close();
}

int Service::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    if (!impl_->server.bind_to_port(host, port))
        throw Error(ErrorCode::configuration,
                    "cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void Service::run() { impl_->server.listen_after_bind(); }

int Service::start(const std::string& host, int port) {
    const int bound = bind(host, port);
    if (bound < 0) throw Error(ErrorCode::configuration, "cannot bind " + host);
    impl_->thread = std::thread([this] { run(); });
    impl_->server.wait_until_ready();
    return bound;
}

void Service::stop() {
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace ttharness
