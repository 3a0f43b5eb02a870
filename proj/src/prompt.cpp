#include "apex/prompt.hpp"

#include <regex>
#include <stdexcept>

#include "apex/error.hpp"

namespace apex {

namespace {

// Template texts are frozen; tests assert on exact substrings, so any edit
// here (including whitespace) is behavior-visible.
const std::string kPhysqaSystem = "You are a physics expert.";

const std::string kPhysqaUser =
    R"PROMPT(Solve the following problem and return the answer in JSON format.

Problem: {q["question"]}

The external physical engine predictions: {ref}

Expected JSON response:
{
    "reasoning": "Explanation of how you arrived at the answer"
    "answer": "Your final numerical answer(without unit and equation)" as {str(q['answer_json'])},
}

Respond the JSON string only without any markdown symbol.)PROMPT";

const std::string kTetrisSystem = "You are a Tetris AI agent.";

const std::string kTetrisUser =
    R"PROMPT(You are playing Tetris. Your goal is to maximize the score by:
- Clearing as many lines as possible.
- Keeping the board as flat as possible.
- Avoiding unnecessary stacking.

Here is the current board state(0-blank,,1-current piece, 2-landed piece):
{state}

Here are physical engine analysis:{APEX_results}

Available moves:
- "left": Move the piece left by one column.
- "right": Move the piece right by one column.
- "rotate": Rotate the piece 90 degrees clockwise.
- "down": Instantly drop the piece to the lowest possible position.(max times = 1)

Decide the best move sequence in JSON format as a list of actions. 
Each action should include the move and how many times to perform it.

Example:
[
  {"move": "left", "times": 2},
  {"move": "rotate", "times": 1},
  {"move": "down", "times": 1}
]

Allowed moves are: "left", "right", "rotate", and "down".
Only return the JSON array without any explanation or markdown. No Markdown)PROMPT";

const std::string kAvoidSystem = "You are an AI robot that avoids dynamic obstacles.";

const std::string kAvoidUser =
    R"PROMPT(You are controlling a robot in a 3D physical environment with moving obstacles.
Your goal is to avoid collisions with cats while progressing toward the target location.

Current state (The map has square walls located at x = ±5 meters and y = ±5 meters):
{state}

Obstacles:
{summary}

Available Moves:
{available_move}

Physical Engine Analysis:
{apex_results}

Output the decision in this format:
{
"move": "stay",
"duration": 1.0,
}
  
Only return the JSON object with no explanation or markdown.)PROMPT";

void substitute(std::string& text, const std::string& token, const std::string& value) {
    const auto pos = text.find(token);
    if (pos == std::string::npos) {
        throw InvalidInputError("prompt template has no slot for token " + token);
    }
    std::string::size_type at = pos;
    while (at != std::string::npos) {
        text.replace(at, token.size(), value);
        at = text.find(token, at + value.size());
    }
}

const std::string& context_value(const std::map<std::string, std::string>& context,
                                 const std::string& key, TemplateId id) {
    const auto it = context.find(key);
    if (it == context.end()) {
        throw InvalidInputError(std::string("missing prompt context value \"") + key +
                                "\" for template " + to_string(id));
    }
    return it->second;
}

}  // namespace

const char* to_string(TemplateId id) {
    switch (id) {
        case TemplateId::physqa: return "physqa";
        case TemplateId::tetris: return "tetris";
        case TemplateId::avoid: return "avoid";
    }
    throw std::logic_error("unknown TemplateId");
}

const std::string& prompt_template(TemplateId id) {
    switch (id) {
        case TemplateId::physqa: return kPhysqaUser;
        case TemplateId::tetris: return kTetrisUser;
        case TemplateId::avoid: return kAvoidUser;
    }
    throw std::logic_error("unknown TemplateId");
}

const std::string& system_prompt(TemplateId id) {
    switch (id) {
        case TemplateId::physqa: return kPhysqaSystem;
        case TemplateId::tetris: return kTetrisSystem;
        case TemplateId::avoid: return kAvoidSystem;
    }
    throw std::logic_error("unknown TemplateId");
}

PromptBundle assemble_prompt(TemplateId id, const std::map<std::string, std::string>& base_context,
                             const std::string& summary_text, const std::string& outcomes_text) {
    PromptBundle bundle;
    bundle.template_id = id;
    bundle.system = system_prompt(id);
    bundle.user = prompt_template(id);

    switch (id) {
        case TemplateId::physqa:
            substitute(bundle.user, "{q[\"question\"]}", context_value(base_context, "question", id));
            substitute(bundle.user, "{str(q['answer_json'])}",
                       context_value(base_context, "answer_json", id));
            substitute(bundle.user, "{ref}", outcomes_text);
            break;
        case TemplateId::tetris:
            substitute(bundle.user, "{state}", context_value(base_context, "state", id));
            substitute(bundle.user, "{APEX_results}", outcomes_text);
            break;
        case TemplateId::avoid:
            substitute(bundle.user, "{state}", context_value(base_context, "state", id));
            substitute(bundle.user, "{summary}", summary_text);
            substitute(bundle.user, "{available_move}",
                       context_value(base_context, "available_move", id));
            substitute(bundle.user, "{apex_results}", outcomes_text);
            break;
    }

    // A surviving placeholder is whitespace-free between braces; the literal
    // JSON examples in the templates all contain spaces, so they never match.
    static const std::regex unresolved(R"(\{[^{}\s]+\})");
    std::smatch hit;
    if (std::regex_search(bundle.user, hit, unresolved)) {
        throw InvalidInputError("unresolved prompt placeholder " + hit.str(0));
    }
    return bundle;
}

}  // namespace apex
