#include "specplan/config.hpp"

#include <fstream>

#include "specplan/trace.hpp"

namespace specplan {

using nlohmann::json;

nlohmann::json default_config_json() {
    return json{
        {"model",
         {{"kind", "sim"},
          {"name", "default"},
          {"timeout_ms", 120000},
          {"temperature", 0.6},
          {"top_p", 1.0},
          {"max_output_tokens", 2048},
          {"timings",
           {{"main_ms", 2000}, {"draft_ms", 2000}, {"forecast_ms", 100}, {"sleeptime_ms", 2000}}}}},
        {"policy",
         {{"kind", "vanilla"},
          {"k_cap", 5},
          {"prior_alpha", 1},
          {"prior_beta", 1},
          {"max_steps", 20},
          {"main_retries", 1},
          {"cross_task_posterior", false},
          {"drafting", {{"retries_per_iteration", 1}, {"max_failures_per_window", 4}}}}},
        {"sim",
         {{"family", "keychase"},
          {"n_tasks", 10},
          {"chain_length", 3},
          {"branches", 4},
          {"seed", 0},
          {"tool_profile", {{"kind", "constant"}, {"ms", 8000}}},
          {"final_answer_profile", nullptr}}},
        {"tasks", {{"source", nullptr}}},
    };
}

LatencyModel latency_model_from_json(const json& j) {
    std::string kind = j.value("kind", "constant");
    if (kind == "constant") return LatencyModel::constant(j.value("ms", int64_t{0}));
    if (kind == "lognormal")
        return LatencyModel::lognormal(j.value("log_mean", 8.0), j.value("log_sd", 1.0));
    if (kind == "empirical") {
        std::vector<int64_t> samples = j.value("samples_ms", std::vector<int64_t>{});
        return LatencyModel::empirical(std::move(samples));
    }
    if (kind == "calibrated") {
        return calibrate_latency_profile(j.value("target_ultra_short", 0.26),
                                         j.value("reasoning_step_ms", int64_t{2000}),
                                         j.value("log_sd", 1.5));
    }
    throw ConfigError("unknown latency profile kind: " + kind);
}

nlohmann::json latency_model_to_json(const LatencyModel& m) {
    switch (m.kind()) {
        case LatencyModel::Kind::Constant:
            return json{{"kind", "constant"}, {"ms", m.constant_ms()}};
        case LatencyModel::Kind::LogNormal:
            return json{{"kind", "lognormal"}, {"log_mean", m.log_mean()}, {"log_sd", m.log_sd()}};
        case LatencyModel::Kind::Empirical:
            return json{{"kind", "empirical"}, {"samples_ms", m.samples()}};
    }
    return json{{"kind", "constant"}, {"ms", 0}};
}

namespace {

// Recursively overlays user values onto the defaults.
json merge(json base, const json& overlay) {
    if (!overlay.is_object() || !base.is_object()) return overlay;
    for (auto it = overlay.begin(); it != overlay.end(); ++it) {
        if (base.contains(it.key())) {
            base[it.key()] = merge(base[it.key()], it.value());
        } else {
            base[it.key()] = it.value();
        }
    }
    return base;
}

}  // namespace

FileConfig config_from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
    json resolved = merge(default_config_json(), doc);

    FileConfig cfg;
    cfg.resolved = resolved;

    const json& model = resolved["model"];
    cfg.model_kind = model.value("kind", "sim");
    if (cfg.model_kind != "sim" && cfg.model_kind != "http")
        throw ConfigError("model.kind must be \"sim\" or \"http\"");
    cfg.http.model_name = model.value("name", "default");
    cfg.http.timeout_ms = model.value("timeout_ms", int64_t{120000});

    const json& timings = model["timings"];
    cfg.scenario.timings.main_ms = timings.value("main_ms", int64_t{2000});
    cfg.scenario.timings.draft_ms = timings.value("draft_ms", int64_t{2000});
    cfg.scenario.timings.forecast_ms = timings.value("forecast_ms", int64_t{100});
    cfg.scenario.timings.sleeptime_ms = timings.value("sleeptime_ms", int64_t{2000});

    const json& policy = resolved["policy"];
    std::string policy_kind = policy.value("kind", "vanilla");
    auto parsed_policy = policy_from_string(policy_kind);
    if (!parsed_policy) {
        std::string valid;
        for (const auto& name : policy_names()) valid += (valid.empty() ? "" : ", ") + name;
        throw ConfigError("unknown policy \"" + policy_kind + "\"; valid policies: " + valid);
    }
    RunConfig& run = cfg.scenario.run;
    run.policy = *parsed_policy;
    run.k_cap = policy.value("k_cap", 5);
    run.prior_alpha = policy.value("prior_alpha", 1);
    run.prior_beta = policy.value("prior_beta", 1);
    run.max_steps = policy.value("max_steps", 20);
    run.main_retries = policy.value("main_retries", 1);
    run.cross_task_posterior = policy.value("cross_task_posterior", false);
    run.temperature = model.value("temperature", 0.6);
    run.top_p = model.value("top_p", 1.0);
    run.max_output_tokens = model.value("max_output_tokens", 2048);
    const json& drafting = policy["drafting"];
    run.drafting.retries_per_iteration = drafting.value("retries_per_iteration", 1);
    run.drafting.max_failures_per_window = drafting.value("max_failures_per_window", 4);

    if (run.k_cap < 1) throw ConfigError("policy.k_cap must be >= 1");
    if (run.max_steps < 1) throw ConfigError("policy.max_steps must be >= 1");
    if (run.prior_alpha < 1 || run.prior_beta < 1)
        throw ConfigError("policy prior counts must be >= 1");

    const json& sim = resolved["sim"];
    std::string family = sim.value("family", "keychase");
    auto parsed_family = family_from_string(family);
    if (!parsed_family) throw ConfigError("unknown sim.family \"" + family + "\"");
    cfg.scenario.family = *parsed_family;
    cfg.scenario.n_tasks = sim.value("n_tasks", 10);
    cfg.scenario.chain_length = sim.value("chain_length", 3);
    cfg.scenario.branches = sim.value("branches", 4);
    cfg.scenario.base_seed = sim.value("seed", uint64_t{0});
    cfg.scenario.tool_latency = latency_model_from_json(sim["tool_profile"]);
    if (!sim["final_answer_profile"].is_null())
        cfg.scenario.final_answer_latency = latency_model_from_json(sim["final_answer_profile"]);
    if (cfg.scenario.n_tasks < 1) throw ConfigError("sim.n_tasks must be >= 1");

    const json& tasks = resolved["tasks"];
    if (!tasks["source"].is_null()) cfg.tasks_source = tasks["source"].get<std::string>();

    return cfg;
}

FileConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    json doc = json::parse(is, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("config file is not valid JSON: " + path);
    return config_from_json(doc);
}

std::string FileConfig::fingerprint() const { return content_hash_hex(resolved.dump()); }

std::vector<Task> load_tasks_jsonl(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open task file: " + path);
    std::vector<Task> tasks;
    std::string line;
    size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw ConfigError("task file line " + std::to_string(line_no) + " is not valid JSON");
        Task t;
        t.id = j.value("id", "task-" + std::to_string(line_no));
        t.prompt = j.value("prompt", "");
        if (j.contains("gold_answer") && !j["gold_answer"].is_null())
            t.gold_answer = j["gold_answer"].get<std::string>();
        if (t.prompt.empty())
            throw ConfigError("task file line " + std::to_string(line_no) + " has an empty prompt");
        tasks.push_back(std::move(t));
    }
    return tasks;
}

}  // namespace specplan
