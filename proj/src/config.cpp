#include "ttharness/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ttharness {

using json = nlohmann::json;

namespace {

OpenAiConfig read_openai(const json& node, OpenAiConfig base) {
    base.base_url = node.value("base_url", base.base_url);
    base.model = node.value("model", base.model);
    base.api_key_env = node.value("api_key_env", base.api_key_env);
    if (node.contains("timeout_s")) base.timeout = std::chrono::seconds{node["timeout_s"].get<int>()};
    return base;
}

}  // namespace

HarnessConfig parse_config(std::string_view json_text) {
    HarnessConfig config;
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::configuration, std::string("config: ") + e.what());
    }
    try {
        if (doc.contains("backend")) config.backend = read_openai(doc["backend"], config.backend);
        if (doc.contains("engine")) {
            const auto& engine = doc["engine"];
            if (engine.contains("t1_s"))
                config.t1 = std::chrono::milliseconds{
                    std::llround(engine["t1_s"].get<double>() * 1000.0)};
            config.repoll = engine.value("repoll", config.repoll);
        }
        if (doc.contains("delay")) {
            const auto& delay = doc["delay"];
            config.delay.per_char_mean = delay.value("mean_s_per_char", config.delay.per_char_mean);
            config.delay.per_char_sd = delay.value("sd_s_per_char", config.delay.per_char_sd);
            config.delay.floor = delay.value("floor_s", config.delay.floor);
        }
        if (doc.contains("generation")) {
            const auto& gen = doc["generation"];
            config.params.temperature = gen.value("temperature", config.params.temperature);
            config.params.max_tokens = gen.value("max_tokens", config.params.max_tokens);
            config.params.stop = gen.value("stop", config.params.stop);
        }
        if (doc.contains("judge"))
            config.judge_backends = doc["judge"].value("backends", config.judge_backends);
        if (doc.contains("paths"))
            config.store_root = doc["paths"].value("store_root", config.store_root.string());
        if (doc.contains("display"))
            config.display_offset =
                std::chrono::minutes{doc["display"].value("utc_offset_minutes", 0)};
        if (doc.contains("backends")) {
            for (const auto& [name, node] : doc["backends"].items()) {
                BackendSpec spec;
                spec.type = node.value("type", "openai");
                if (spec.type == "scripted")
                    spec.script = node.at("script").get<std::string>();
                else if (spec.type == "openai")
                    spec.openai = read_openai(node, config.backend);
                else
                    throw Error(ErrorCode::configuration,
                                "backends." + name + ": unknown type '" + spec.type + "'");
                config.backends[name] = spec;
            }
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::configuration, std::string("config: ") + e.what());
    }
    config.delay.check();
    config.params.check();
    if (config.t1.count() < 0) throw Error(ErrorCode::configuration, "engine.t1_s is negative");
    return config;
}

HarnessConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::configuration, "cannot open config " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::shared_ptr<ChatBackend> make_backend(const HarnessConfig& config, std::string_view id) {
    if (auto it = config.backends.find(std::string(id)); it != config.backends.end()) {
        if (it->second.type == "scripted") return ScriptedBackend::from_file(it->second.script);
        return std::make_shared<OpenAiBackend>(it->second.openai);
    }
    if (id == "openai" || id == config.backend.model)
        return std::make_shared<OpenAiBackend>(config.backend);
    if (id.starts_with("scripted:")) return ScriptedBackend::from_file(std::string(id.substr(9)));
    throw Error(ErrorCode::not_found, "unknown backend '" + std::string(id) + "'");
}

}  // namespace ttharness
