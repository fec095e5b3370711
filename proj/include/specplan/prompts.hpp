#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace specplan {

enum class TemplateName { Progressive, Recovery, Forecast, Aggregation, SeqRev, SleepTime };

// Template bodies ship as text assets under assets/prompts/, one file per
// template, and are embedded verbatim at build time. Placeholders use
// {curly_brace} syntax; each template carries its allowed placeholder set.
struct PromptTemplate {
    TemplateName name;
    std::string_view key;  // file stem: "progressive", "recovery", ...
    std::string_view body;
    std::vector<std::string_view> placeholders;
};

const PromptTemplate& prompt_template(TemplateName name);
const std::vector<PromptTemplate>& all_prompt_templates();
std::optional<TemplateName> template_from_key(std::string_view key);

// Single-pass substitution of {name} markers. Unknown markers are left
// intact; substituted values are inserted verbatim and never re-scanned.
std::string render_template(std::string_view body,
                            const std::map<std::string, std::string>& values);
std::string render_template(const PromptTemplate& tpl,
                            const std::map<std::string, std::string>& values);

// All {word} markers appearing in a body, in order of first appearance.
std::vector<std::string> extract_placeholders(std::string_view body);

}  // namespace specplan
