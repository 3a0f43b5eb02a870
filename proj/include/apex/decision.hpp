#pragma once

#include <memory>
#include <string>
#include <vector>

#include "apex/prompt.hpp"
#include "apex/rollout.hpp"

namespace apex {

struct PlanStep {
    std::string move;       // tetris: left/right/rotate/down; avoid: direction label
    int times = 1;          // tetris repeat count, >= 1
    double duration = 1.0;  // avoid move duration in seconds, > 0
};

struct ActionPlan {
    ActionEnv env = ActionEnv::avoid;
    std::vector<PlanStep> steps;
};

/**
 * Trims a reply and removes one surrounding ``` code fence if present.
 * Returns the inner body, itself trimmed.
 */
std::string strip_markdown_fences(const std::string& text);

/**
 * Strict parser for a model reply. Tolerates a fenced code block around the
 * JSON but nothing else. Tetris expects an array of {"move", "times"} with
 * vocabulary {left,right,rotate,down}, integer times >= 1, and at most one
 * down step, itself with times == 1. Avoid expects {"move", "duration"} (or
 * an array of them) with a direction-vocabulary move and positive duration;
 * a missing duration defaults to 1.0. Anything else throws InvalidInputError.
 */
ActionPlan parse_action_plan(const std::string& text, ActionEnv env);

/// Canonical JSON text for a plan; parse_action_plan round-trips it.
std::string serialize_plan(const ActionPlan& plan);

/// Safe fallback when a reply cannot be used: stay 1 s / single hard drop.
ActionPlan fallback_plan(ActionEnv env);

/**
 * Deterministic rule-based choice over simulated outcomes.
 * Avoid: among safe outcomes the largest min obstacle distance, ties broken
 * by smaller target distance then enumeration order; no safe outcome falls
 * back to the largest min distance overall. Tetris: maximize
 * 0.76*lines - 0.36*holes - 0.18*bumpiness - 0.51*max_height, ties by order.
 */
ActionPlan scripted_decide(const std::vector<RolloutOutcome>& outcomes, ActionEnv env);

/// First outcome flagged safe, in enumeration order; none safe -> first.
ActionPlan first_safe_decide(const std::vector<RolloutOutcome>& outcomes, ActionEnv env);

enum class BackendKind { scripted, first_safe, always_down, remote };

const char* to_string(BackendKind kind);
BackendKind backend_kind_from_string(const std::string& name);

struct BackendConfig {
    BackendKind kind = BackendKind::scripted;
    // remote transport settings
    std::string base_url;  // e.g. https://api.openai.com/v1
    std::string model;
    double timeout_s = 30.0;
    int retries = 2;        // extra attempts after the first
    double backoff_s = 0.5; // exponential backoff base
    std::string api_key_env = "MODEL_API_KEY";
};

struct DecideResult {
    ActionPlan plan;
    std::string raw_text;    // verbatim reply (serialized plan for local backends)
    double latency_s = 0.0;
    bool parse_ok = true;    // false: reply unusable, plan is fallback_plan(env)
};

class DecisionBackend {
  public:
    virtual ~DecisionBackend() = default;
    /// May throw BackendError (remote transport exhausted its retries).
    virtual DecideResult decide(const PromptBundle& prompt,
                                const std::vector<RolloutOutcome>& outcomes, ActionEnv env) = 0;
    virtual BackendKind kind() const = 0;
};

/// Remote backends resolve their API key here (ConfigError when absent),
/// before any network traffic.
std::unique_ptr<DecisionBackend> make_backend(const BackendConfig& config);

struct ChatReply {
    std::string content;
    double latency_s = 0.0;
};

/// One chat-completion round trip against an OpenAI-compatible endpoint,
/// with retries and exponential backoff. Throws ConfigError for unusable
/// settings and BackendError once attempts are exhausted.
ChatReply chat_completion(const PromptBundle& prompt, const BackendConfig& config,
                          const std::string& api_key);

}  // namespace apex
