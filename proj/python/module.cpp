#include <pybind11/functional.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ttharness/evaluation.hpp"
#include "ttharness/harness.hpp"
#include "ttharness/pseudo_gen.hpp"
#include "ttharness/store.hpp"
#include "ttharness/timing.hpp"

namespace py = pybind11;
using namespace ttharness;

namespace {

Timestamp timestamp_arg(const std::string& text) {
    const auto ts = parse_timestamp(text);
    if (!ts) throw Error(ErrorCode::bad_request, "expected 'YYYY-MM-DD hh:mm:ss', got '" + text + "'");
    return *ts;
}

}  // namespace

PYBIND11_MODULE(_ttharness, m) {
    m.doc() = "Self-directed Turing test harness: dialogue formats, pacing, pseudo-dialogue "
              "generation and pass-rate evaluation.";

    py::register_exception<Error>(m, "Error");

    py::enum_<Role>(m, "Role").value("User", Role::User).value("System", Role::System);
    py::enum_<Origin>(m, "Origin")
        .value("human", Origin::human)
        .value("model", Origin::model)
        .value("generated", Origin::generated);
    py::enum_<DialogueMode>(m, "DialogueMode")
        .value("ping_pong", DialogueMode::ping_pong)
        .value("burst", DialogueMode::burst);

    py::class_<Message>(m, "Message")
        .def(py::init([](Role role, const std::string& sent_at, std::string content, Origin origin) {
                 return Message(role, timestamp_arg(sent_at), std::move(content), origin);
             }),
             py::arg("role"), py::arg("sent_at"), py::arg("content"),
             py::arg("origin") = Origin::human)
        .def_property_readonly("role", &Message::role)
        .def_property_readonly("sent_at", [](const Message& msg) { return format_timestamp(msg.sent_at()); })
        .def_property_readonly("content", &Message::content)
        .def_property_readonly("origin", &Message::origin)
        .def(py::self == py::self)
        .def("__repr__", [](const Message& msg) {
            return std::string("<Message ") + to_string(msg.role()) + " [" +
                   format_timestamp(msg.sent_at()) + "] " + msg.content() + ">";
        });

    py::class_<Dialogue>(m, "Dialogue")
        .def(py::init([](std::vector<Message> messages, DialogueMode mode, std::string topic) {
                 return Dialogue{std::move(messages), mode, std::move(topic)};
             }),
             py::arg("messages") = std::vector<Message>{}, py::arg("mode") = DialogueMode::burst,
             py::arg("topic") = "")
        .def_readwrite("messages", &Dialogue::messages)
        .def_readwrite("mode", &Dialogue::mode)
        .def_readwrite("topic", &Dialogue::topic)
        .def_property_readonly("turns", [](const Dialogue& d) { return count_turns(d); })
        .def("__len__", [](const Dialogue& d) { return d.messages.size(); })
        .def(py::self == py::self);

    m.def("parse_transcript",
          [](const std::string& text, DialogueMode mode) { return parse_transcript(text, mode); },
          py::arg("text"), py::arg("mode") = DialogueMode::burst,
          "Reads 'User: [timestamp] text' / 'Response: [timestamp] text' lines.");
    m.def("render_transcript", [](const Dialogue& d) { return render_transcript(d); });
    m.def("to_ping_pong",
          [](const Dialogue& d, std::size_t min_chars) { return to_ping_pong(d, min_chars).dialogue; },
          py::arg("dialogue"), py::arg("min_chars") = 2,
          "Keeps the first message of every same-role run.");
    m.def("count_turns", &count_turns);
    m.def("last_turns", &last_turns, py::arg("dialogue"), py::arg("m"));

    m.def("sample_send_delays",
          [](std::size_t n_chars, std::size_t count, std::uint64_t seed, double mean, double sd,
             double floor) {
              DelayModel model{mean, sd, floor};
              model.check();
              Rng rng(seed);
              std::vector<double> out;
              out.reserve(count);
              for (std::size_t i = 0; i < count; ++i)
                  out.push_back(sample_send_delay(n_chars, model, rng).count());
              return out;
          },
          py::arg("n_chars"), py::arg("count"), py::arg("seed") = 0, py::arg("mean") = 0.3,
          py::arg("sd") = 0.03, py::arg("floor") = 0.0, "Send delays in seconds.");

    m.def("pass_rate",
          [](const std::vector<int>& correct, int judges) { return pass_rate(correct, judges); },
          py::arg("correct"), py::arg("judges"),
          "1 - mean(C_i / K) over pairs, where C_i counts judges who found the machine.");
    m.def("format_percent", &format_percent);
    m.def("parse_verdict", [](const std::string& reply) -> std::optional<std::string> {
        const auto option = parse_verdict(reply);
        if (!option) return std::nullopt;
        return std::string(to_string(*option));
    });
    m.def("machine_first_orders",
          [](std::size_t count, std::uint64_t first_seed) {
              Dialogue side{{Message(Role::User, {}, "u"), Message(Role::System, {}, "s")},
                            DialogueMode::ping_pong, "t"};
              ConversationPair pair{"p", "t", 1, 0, 0, "m", DialogueMode::ping_pong, side, side};
              std::vector<bool> out;
              for (std::size_t i = 0; i < count; ++i) {
                  Rng rng(first_seed + i);
                  out.push_back(assemble_questionnaire(pair, rng).order == Presentation::machine_first);
              }
              return out;
          },
          py::arg("count"), py::arg("first_seed") = 0,
          "Presentation order drawn for one seeded assembly per seed.");

    m.def("parse_topic_list", [](const std::string& text) { return parse_topic_list(text); });
    m.def("generate_pseudo_dialogue",
          [](const std::function<std::string(const std::string&)>& complete,
             const std::vector<std::string>& topics, int turns, const Dialogue& seed_history,
             DialogueMode mode, int max_calls) {
              FunctionBackend backend(
                  [&complete](const CompletionRequest& request) { return complete(request.prompt); },
                  "python");
              PseudoGenPlan plan;
              plan.m = turns;
              plan.topics = topics;
              plan.mode = mode;
              plan.seed_history = seed_history;
              plan.max_calls_per_topic = max_calls;
              RetryPolicy retry;
              retry.max_attempts = 1;
              const auto result = generate_pseudo_dialogue(backend, plan, retry);
              py::list outcomes;
              for (const auto& t : result.topics) {
                  py::dict d;
                  d["topic"] = t.topic;
                  d["status"] = to_string(t.status);
                  d["calls"] = t.calls;
                  d["dialogue"] = t.dialogue;
                  d["error"] = t.error;
                  outcomes.append(d);
              }
              return py::make_tuple(result.history, outcomes);
          },
          py::arg("complete"), py::arg("topics"), py::arg("m") = 10,
          py::arg("seed_history") = Dialogue{}, py::arg("mode") = DialogueMode::burst,
          py::arg("max_calls") = 5,
          "Runs the per-topic generation loop with `complete(prompt) -> str` as the model. "
          "Returns (extended history, per-topic outcomes).");

    m.def("render_report",
          [](const std::string& store_root, const std::vector<std::string>& group_by,
             const std::string& format) {
              const RunStore store(store_root);
              return render_report(store, group_by, format);
          },
          py::arg("store_root"), py::arg("group_by") = std::vector<std::string>{},
          py::arg("format") = "csv");
}
