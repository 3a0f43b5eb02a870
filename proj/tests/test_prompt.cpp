#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "apex/error.hpp"
#include "apex/prompt.hpp"

using namespace apex;

namespace {

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

bool ends_with(const std::string& text, const std::string& suffix) {
    return text.size() >= suffix.size() &&
           text.compare(text.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

TEST_CASE("template ids and system messages") {
    CHECK(std::string(to_string(TemplateId::physqa)) == "physqa");
    CHECK(std::string(to_string(TemplateId::tetris)) == "tetris");
    CHECK(std::string(to_string(TemplateId::avoid)) == "avoid");

    CHECK(system_prompt(TemplateId::physqa) == "You are a physics expert.");
    CHECK(system_prompt(TemplateId::tetris) == "You are a Tetris AI agent.");
    CHECK(system_prompt(TemplateId::avoid) == "You are an AI robot that avoids dynamic obstacles.");
}

TEST_CASE("qa prompt assembles byte-for-byte") {
    const PromptBundle bundle = assemble_prompt(
        TemplateId::physqa, {{"question", "Q?"}, {"answer_json", "{'x': 'float'}"}}, "", "PRED");
    const std::string expected =
        "Solve the following problem and return the answer in JSON format.\n"
        "\n"
        "Problem: Q?\n"
        "\n"
        "The external physical engine predictions: PRED\n"
        "\n"
        "Expected JSON response:\n"
        "{\n"
        "    \"reasoning\": \"Explanation of how you arrived at the answer\"\n"
        "    \"answer\": \"Your final numerical answer(without unit and equation)\" as "
        "{'x': 'float'},\n"
        "}\n"
        "\n"
        "Respond the JSON string only without any markdown symbol.";
    CHECK(bundle.user == expected);
    CHECK(bundle.system == "You are a physics expert.");
}

TEST_CASE("tetris template quirks are preserved verbatim") {
    const std::string& tmpl = prompt_template(TemplateId::tetris);
    // double comma in the legend
    CHECK(contains(tmpl, "board state(0-blank,,1-current piece, 2-landed piece):"));
    // no space before the results token
    CHECK(contains(tmpl, "Here are physical engine analysis:{APEX_results}"));
    // trailing space before the newline
    CHECK(contains(tmpl, "as a list of actions. \nEach action"));
    CHECK(contains(tmpl, "position.(max times = 1)"));
    CHECK(ends_with(tmpl, "Only return the JSON array without any explanation or markdown. No Markdown"));
}

TEST_CASE("avoid template quirks are preserved verbatim") {
    const std::string& tmpl = prompt_template(TemplateId::avoid);
    CHECK(contains(tmpl, "square walls located at x = ±5 meters and y = ±5 meters"));
    CHECK(contains(tmpl, "avoid collisions with cats"));
    // two stray spaces on their own line between the example object and the
    // closing instruction
    CHECK(contains(tmpl, "\"duration\": 1.0,\n}\n  \nOnly return the JSON object"));
    CHECK(ends_with(tmpl, "Only return the JSON object with no explanation or markdown."));
}

TEST_CASE("tetris prompt substitutes state and outcomes") {
    const PromptBundle bundle =
        assemble_prompt(TemplateId::tetris, {{"state", "BOARD"}}, "", "OUTCOMES");
    CHECK(contains(bundle.user, "landed piece):\nBOARD\n"));
    CHECK(contains(bundle.user, "Here are physical engine analysis:OUTCOMES\n"));
    CHECK_FALSE(contains(bundle.user, "{state}"));
    CHECK_FALSE(contains(bundle.user, "{APEX_results}"));
}

TEST_CASE("avoid prompt substitutes all four slots") {
    const PromptBundle bundle = assemble_prompt(
        TemplateId::avoid, {{"state", "STATE"}, {"available_move", "MOVES"}}, "SUMMARY", "ANALYSIS");
    CHECK(contains(bundle.user, "meters):\nSTATE\n"));
    CHECK(contains(bundle.user, "Obstacles:\nSUMMARY\n"));
    CHECK(contains(bundle.user, "Available Moves:\nMOVES\n"));
    CHECK(contains(bundle.user, "Physical Engine Analysis:\nANALYSIS\n"));
}

TEST_CASE("the literal JSON braces in templates survive assembly") {
    const PromptBundle bundle =
        assemble_prompt(TemplateId::avoid, {{"state", "s"}, {"available_move", "m"}}, "x", "y");
    CHECK(contains(bundle.user, "{\n\"move\": \"stay\",\n\"duration\": 1.0,\n}"));

    const PromptBundle tetris_bundle =
        assemble_prompt(TemplateId::tetris, {{"state", "s"}}, "", "y");
    CHECK(contains(tetris_bundle.user, "{\"move\": \"left\", \"times\": 2},"));
}

TEST_CASE("missing context values are named in the error") {
    CHECK_THROWS_WITH_AS(
        assemble_prompt(TemplateId::physqa, {{"question", "Q?"}}, "", ""),
        doctest::Contains("answer_json"), InvalidInputError);
    CHECK_THROWS_WITH_AS(assemble_prompt(TemplateId::avoid, {{"state", "s"}}, "", ""),
                         doctest::Contains("available_move"), InvalidInputError);
}

TEST_CASE("a placeholder smuggled in through a value is rejected") {
    CHECK_THROWS_WITH_AS(
        assemble_prompt(TemplateId::tetris, {{"state", "{oops}"}}, "", ""),
        doctest::Contains("{oops}"), InvalidInputError);
}
