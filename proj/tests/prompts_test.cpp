#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "specplan/prompts.hpp"

using namespace specplan;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE_MESSAGE(static_cast<bool>(is), "missing file: " << path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

}  // namespace

TEST_SUITE("prompts") {

TEST_CASE("embedded templates are byte-identical to the shipped assets") {
    for (const auto& tpl : all_prompt_templates()) {
        std::string asset = read_file(std::string(SPECPLAN_SOURCE_DIR) + "/assets/prompts/" +
                                      std::string(tpl.key) + ".txt");
        CHECK_MESSAGE(std::string(tpl.body) == asset, "asset drift: " << tpl.key);
    }
}

TEST_CASE("embedded templates match the golden fixtures byte for byte") {
    for (const auto& tpl : all_prompt_templates()) {
        std::string golden = read_file(std::string(SPECPLAN_SOURCE_DIR) +
                                       "/tests/fixtures/prompts/" + std::string(tpl.key) + ".txt");
        CHECK_MESSAGE(std::string(tpl.body) == golden, "fixture drift: " << tpl.key);
    }
}

TEST_CASE("each template contains its anchor phrase") {
    auto body = [](TemplateName name) { return std::string(prompt_template(name).body); };
    CHECK(body(TemplateName::Progressive).find("NEXT ACTION STEP") != std::string::npos);
    CHECK(body(TemplateName::Recovery).find("EXACTLY one distinct recovery plan") !=
          std::string::npos);
    CHECK(body(TemplateName::Forecast).find("output a single decision") != std::string::npos);
    CHECK(body(TemplateName::Aggregation).find("starting points") != std::string::npos);
    CHECK(body(TemplateName::SeqRev).find("reflecting on the latest action's Observation") !=
          std::string::npos);
    CHECK(body(TemplateName::SleepTime).find("Make as many inferences as possible") !=
          std::string::npos);
}

TEST_CASE("placeholder sets match the declared template contracts") {
    for (const auto& tpl : all_prompt_templates()) {
        std::vector<std::string> found = extract_placeholders(tpl.body);
        std::vector<std::string> declared;
        for (auto p : tpl.placeholders) declared.emplace_back(p);
        std::sort(found.begin(), found.end());
        std::sort(declared.begin(), declared.end());
        CHECK_MESSAGE(found == declared, "placeholder mismatch in " << tpl.key);
    }
}

TEST_CASE("render substitutes known markers and leaves unknown ones intact") {
    std::string out = render_template("a {x} b {missing} c {x}", {{"x", "X"}});
    CHECK(out == "a X b {missing} c X");
}

TEST_CASE("substituted values are never re-scanned") {
    std::string out =
        render_template("history: {plan_history}", {{"plan_history", "use {task} directly"},
                                                    {"task", "SHOULD NOT APPEAR"}});
    CHECK(out == "history: use {task} directly");
}

TEST_CASE("template lookup by key") {
    CHECK(template_from_key("progressive") == TemplateName::Progressive);
    CHECK(template_from_key("sleeptime") == TemplateName::SleepTime);
    CHECK(!template_from_key("nope").has_value());
}

}  // TEST_SUITE
