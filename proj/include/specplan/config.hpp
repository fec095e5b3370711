#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "specplan/model_client_http.hpp"
#include "specplan/sim.hpp"

namespace specplan {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Resolved run configuration. The JSON document has four sections: model
// (backend + decoding), policy (strategy knobs), sim (synthetic scenario),
// tasks (external task source). Every field has a default; the resolved
// document with defaults applied is kept for fingerprinting.
struct FileConfig {
    ScenarioConfig scenario;
    std::string model_kind = "sim";  // "sim" or "http"
    HttpClientConfig http;
    std::optional<std::string> tasks_source;
    nlohmann::json resolved;

    std::string fingerprint() const;
};

nlohmann::json default_config_json();
FileConfig config_from_json(const nlohmann::json& doc);
FileConfig load_config(const std::string& path);

LatencyModel latency_model_from_json(const nlohmann::json& j);
nlohmann::json latency_model_to_json(const LatencyModel& m);

// One task per line: {"id": ..., "prompt": ..., "gold_answer": ...}.
std::vector<Task> load_tasks_jsonl(const std::string& path);

}  // namespace specplan
