#pragma once

#include <map>
#include <string>

namespace apex {

enum class TemplateId { physqa, tetris, avoid };

const char* to_string(TemplateId id);

struct PromptBundle {
    TemplateId template_id = TemplateId::physqa;
    std::string system;  // system message
    std::string user;    // fully substituted user message
};

/// Raw user-message template with its {placeholder} tokens intact.
const std::string& prompt_template(TemplateId id);

/// System message for a template.
const std::string& system_prompt(TemplateId id);

/**
 * Fills a template. base_context supplies the per-environment placeholders
 * ("question" and "answer_json" for physqa; "state" for tetris; "state" and
 * "available_move" for avoid); summary_text fills {summary}; outcomes_text
 * fills the engine-prediction slot ({ref} / {APEX_results} / {apex_results}).
 *
 * Throws InvalidInputError naming the token when a required value is missing
 * or when any placeholder would survive substitution.
 */
PromptBundle assemble_prompt(TemplateId id, const std::map<std::string, std::string>& base_context,
                             const std::string& summary_text, const std::string& outcomes_text);

}  // namespace apex
