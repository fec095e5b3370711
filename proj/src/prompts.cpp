#include "specplan/prompts.hpp"

#include <cctype>
#include <stdexcept>

#include "specplan/prompt_texts.hpp"

namespace specplan {

namespace {

std::vector<PromptTemplate> make_templates() {
    return {
        {TemplateName::Progressive, "progressive", detail::kProgressiveTemplate,
         {"plan_history", "trajectory"}},
        {TemplateName::Recovery, "recovery", detail::kRecoveryTemplate,
         {"plan_history", "trajectory"}},
        {TemplateName::Forecast, "forecast", detail::kForecastTemplate,
         {"task", "trajectory", "observation"}},
        {TemplateName::Aggregation, "aggregation", detail::kAggregationTemplate, {"candidates"}},
        {TemplateName::SeqRev, "seqrev", detail::kSeqRevTemplate,
         {"task", "trajectory", "observation"}},
        {TemplateName::SleepTime, "sleeptime", detail::kSleepTimeTemplate,
         {"task", "trajectory"}},
    };
}

}  // namespace

const std::vector<PromptTemplate>& all_prompt_templates() {
    static const std::vector<PromptTemplate> templates = make_templates();
    return templates;
}

const PromptTemplate& prompt_template(TemplateName name) {
    for (const auto& t : all_prompt_templates()) {
        if (t.name == name) return t;
    }
    throw std::logic_error("unknown prompt template");
}

std::optional<TemplateName> template_from_key(std::string_view key) {
    for (const auto& t : all_prompt_templates()) {
        if (t.key == key) return t.name;
    }
    return std::nullopt;
}

std::string render_template(std::string_view body,
                            const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(body.size());
    size_t i = 0;
    while (i < body.size()) {
        if (body[i] == '{') {
            size_t close = body.find('}', i + 1);
            if (close != std::string_view::npos) {
                std::string key(body.substr(i + 1, close - i - 1));
                auto it = values.find(key);
                if (it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += body[i];
        ++i;
    }
    return out;
}

std::string render_template(const PromptTemplate& tpl,
                            const std::map<std::string, std::string>& values) {
    return render_template(tpl.body, values);
}

std::vector<std::string> extract_placeholders(std::string_view body) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < body.size()) {
        if (body[i] == '{') {
            size_t close = body.find('}', i + 1);
            if (close != std::string_view::npos) {
                std::string key(body.substr(i + 1, close - i - 1));
                bool word = !key.empty();
                for (char c : key) {
                    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) word = false;
                }
                if (word) {
                    bool seen = false;
                    for (const auto& k : out) seen = seen || k == key;
                    if (!seen) out.push_back(key);
                    i = close + 1;
                    continue;
                }
            }
        }
        ++i;
    }
    return out;
}

}  // namespace specplan
