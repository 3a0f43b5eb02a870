#include "apex/decision.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

#include "apex/error.hpp"
#include "apex/vec.hpp"

namespace apex {

std::string strip_markdown_fences(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    auto last = text.find_last_not_of(" \t\r\n");
    std::string body = text.substr(first, last - first + 1);
    if (body.rfind("```", 0) == 0) {
        const auto eol = body.find('\n');
        if (eol == std::string::npos) return "";
        body.erase(0, eol + 1);
        const auto closing = body.rfind("```");
        if (closing != std::string::npos) body.erase(closing);
    }
    const auto f = body.find_first_not_of(" \t\r\n");
    if (f == std::string::npos) return "";
    const auto l = body.find_last_not_of(" \t\r\n");
    return body.substr(f, l - f + 1);
}

namespace {

constexpr double kTetrisLinesWeight = 0.76;
constexpr double kTetrisHolesWeight = 0.36;
constexpr double kTetrisBumpinessWeight = 0.18;
constexpr double kTetrisHeightWeight = 0.51;

int integer_field(const Json& value, const char* name) {
    if (value.is_number_integer() || value.is_number_unsigned()) return value.get<int>();
    if (value.is_number_float()) {
        const double d = value.get<double>();
        if (std::floor(d) == d) return static_cast<int>(d);
    }
    throw InvalidInputError(std::string("plan field \"") + name + "\" is not an integer");
}

PlanStep parse_tetris_step(const Json& node) {
    if (!node.is_object()) throw InvalidInputError("tetris plan entries must be objects");
    if (!node.contains("move") || !node["move"].is_string()) {
        throw InvalidInputError("tetris plan entry lacks a string \"move\"");
    }
    PlanStep step;
    step.move = node["move"].get<std::string>();
    if (step.move != "left" && step.move != "right" && step.move != "rotate" &&
        step.move != "down") {
        throw InvalidInputError("unknown tetris move \"" + step.move + "\"");
    }
    step.times = node.contains("times") ? integer_field(node["times"], "times") : 1;
    if (step.times < 1) throw InvalidInputError("tetris move times must be >= 1");
    return step;
}

PlanStep parse_avoid_step(const Json& node) {
    if (!node.is_object()) throw InvalidInputError("avoid plan must be a JSON object");
    if (!node.contains("move") || !node["move"].is_string()) {
        throw InvalidInputError("avoid plan lacks a string \"move\"");
    }
    PlanStep step;
    step.move = node["move"].get<std::string>();
    if (!direction_from_string(step.move)) {
        throw InvalidInputError("unknown avoid move \"" + step.move + "\"");
    }
    if (node.contains("duration")) {
        if (!node["duration"].is_number()) {
            throw InvalidInputError("avoid plan \"duration\" is not a number");
        }
        step.duration = node["duration"].get<double>();
        if (!(step.duration > 0.0) || !std::isfinite(step.duration)) {
            throw InvalidInputError("avoid plan duration must be positive and finite");
        }
    }
    return step;
}

const RolloutOutcome& pick_best_avoid(const std::vector<RolloutOutcome>& outcomes) {
    // (safe-pool preferred) max clearance, ties -> smaller target distance,
    // then enumeration order.
    const RolloutOutcome* best = nullptr;
    auto better = [](const RolloutOutcome& a, const RolloutOutcome& b) {
        if (a.min_obstacle_distance != b.min_obstacle_distance) {
            return a.min_obstacle_distance > b.min_obstacle_distance;
        }
        const double ta = a.target_distance.value_or(std::numeric_limits<double>::infinity());
        const double tb = b.target_distance.value_or(std::numeric_limits<double>::infinity());
        return ta < tb;
    };
    for (const auto& o : outcomes) {
        if (!o.safe) continue;
        if (best == nullptr || better(o, *best)) best = &o;
    }
    if (best == nullptr) {
        for (const auto& o : outcomes) {
            if (best == nullptr || better(o, *best)) best = &o;
        }
    }
    return *best;
}

ActionPlan plan_for_avoid_outcome(const RolloutOutcome& outcome) {
    ActionPlan plan;
    plan.env = ActionEnv::avoid;
    plan.steps.push_back({to_string(outcome.action.direction), 1, outcome.action.duration});
    return plan;
}

ActionPlan plan_for_tetris_outcome(const RolloutOutcome& outcome) {
    if (!outcome.tetris) throw InvalidInputError("tetris outcome lacks board results");
    ActionPlan plan;
    plan.env = ActionEnv::tetris;
    for (const auto& [move, times] : outcome.tetris->moves) {
        plan.steps.push_back({move, times, 1.0});
    }
    return plan;
}

class LocalBackend : public DecisionBackend {
  public:
    explicit LocalBackend(BackendKind kind) : kind_(kind) {}

    DecideResult decide(const PromptBundle&, const std::vector<RolloutOutcome>& outcomes,
                        ActionEnv env) override {
        const auto start = std::chrono::steady_clock::now();
        DecideResult result;
        switch (kind_) {
            case BackendKind::scripted: result.plan = scripted_decide(outcomes, env); break;
            case BackendKind::first_safe: result.plan = first_safe_decide(outcomes, env); break;
            case BackendKind::always_down: result.plan = fallback_plan(env); break;
            case BackendKind::remote: throw std::logic_error("remote handled elsewhere");
        }
        result.raw_text = serialize_plan(result.plan);
        result.latency_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                               .count();
        return result;
    }

    BackendKind kind() const override { return kind_; }

  private:
    BackendKind kind_;
};

class RemoteBackend : public DecisionBackend {
  public:
    explicit RemoteBackend(const BackendConfig& config) : config_(config) {
        if (config_.base_url.empty()) throw ConfigError("remote backend requires base_url");
        if (config_.model.empty()) throw ConfigError("remote backend requires model");
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (key == nullptr || *key == '\0') {
            throw ConfigError("environment variable " + config_.api_key_env +
                              " is not set (required for the remote backend)");
        }
        api_key_ = key;
    }

    DecideResult decide(const PromptBundle& prompt, const std::vector<RolloutOutcome>&,
                        ActionEnv env) override {
        const ChatReply reply = chat_completion(prompt, config_, api_key_);
        DecideResult result;
        result.raw_text = reply.content;
        result.latency_s = reply.latency_s;
        try {
            result.plan = parse_action_plan(reply.content, env);
        } catch (const InvalidInputError&) {
            result.plan = fallback_plan(env);
            result.parse_ok = false;
        }
        return result;
    }

    BackendKind kind() const override { return BackendKind::remote; }

  private:
    BackendConfig config_;
    std::string api_key_;
};

}  // namespace

ActionPlan parse_action_plan(const std::string& text, ActionEnv env) {
    const std::string body = strip_markdown_fences(text);
    if (body.empty()) throw InvalidInputError("empty action reply");
    Json doc;
    try {
        doc = Json::parse(body);
    } catch (const Json::parse_error& e) {
        throw InvalidInputError(std::string("unparseable action reply: ") + e.what());
    }

    ActionPlan plan;
    plan.env = env;
    if (env == ActionEnv::tetris) {
        if (!doc.is_array()) throw InvalidInputError("tetris plan must be a JSON array");
        int down_steps = 0;
        for (const auto& node : doc) {
            PlanStep step = parse_tetris_step(node);
            if (step.move == "down") {
                ++down_steps;
                if (step.times != 1) {
                    throw InvalidInputError("tetris down move allows times == 1 only");
                }
            }
            plan.steps.push_back(std::move(step));
        }
        if (down_steps > 1) throw InvalidInputError("tetris plan repeats the down move");
    } else {
        if (doc.is_array()) {
            for (const auto& node : doc) plan.steps.push_back(parse_avoid_step(node));
            if (plan.steps.empty()) throw InvalidInputError("avoid plan array is empty");
        } else {
            plan.steps.push_back(parse_avoid_step(doc));
        }
    }
    return plan;
}

std::string serialize_plan(const ActionPlan& plan) {
    if (plan.env == ActionEnv::tetris) {
        Json arr = Json::array();
        for (const auto& step : plan.steps) {
            arr.push_back(Json{{"move", step.move}, {"times", step.times}});
        }
        return arr.dump();
    }
    auto step_json = [](const PlanStep& step) {
        return Json{{"move", step.move}, {"duration", step.duration}};
    };
    if (plan.steps.size() == 1) return step_json(plan.steps.front()).dump();
    Json arr = Json::array();
    for (const auto& step : plan.steps) arr.push_back(step_json(step));
    return arr.dump();
}

ActionPlan fallback_plan(ActionEnv env) {
    ActionPlan plan;
    plan.env = env;
    if (env == ActionEnv::tetris) {
        plan.steps.push_back({"down", 1, 1.0});
    } else {
        plan.steps.push_back({"stay", 1, 1.0});
    }
    return plan;
}

ActionPlan scripted_decide(const std::vector<RolloutOutcome>& outcomes, ActionEnv env) {
    if (outcomes.empty()) throw InvalidInputError("no outcomes to decide over");
    if (env == ActionEnv::avoid) {
        return plan_for_avoid_outcome(pick_best_avoid(outcomes));
    }
    const RolloutOutcome* best = nullptr;
    double best_score = 0.0;
    for (const auto& o : outcomes) {
        if (!o.tetris) throw InvalidInputError("tetris outcome lacks board results");
        const auto& t = *o.tetris;
        const double score = kTetrisLinesWeight * t.lines_cleared - kTetrisHolesWeight * t.holes -
                             kTetrisBumpinessWeight * t.bumpiness -
                             kTetrisHeightWeight * t.max_height;
        if (best == nullptr || score > best_score) {
            best = &o;
            best_score = score;
        }
    }
    return plan_for_tetris_outcome(*best);
}

ActionPlan first_safe_decide(const std::vector<RolloutOutcome>& outcomes, ActionEnv env) {
    if (outcomes.empty()) throw InvalidInputError("no outcomes to decide over");
    const RolloutOutcome* chosen = &outcomes.front();
    for (const auto& o : outcomes) {
        if (o.safe) {
            chosen = &o;
            break;
        }
    }
    return env == ActionEnv::avoid ? plan_for_avoid_outcome(*chosen)
                                   : plan_for_tetris_outcome(*chosen);
}

const char* to_string(BackendKind kind) {
    switch (kind) {
        case BackendKind::scripted: return "scripted";
        case BackendKind::first_safe: return "first_safe";
        case BackendKind::always_down: return "always_down";
        case BackendKind::remote: return "remote";
    }
    throw std::logic_error("unknown BackendKind");
}

BackendKind backend_kind_from_string(const std::string& name) {
    if (name == "scripted") return BackendKind::scripted;
    if (name == "first_safe") return BackendKind::first_safe;
    if (name == "always_down") return BackendKind::always_down;
    if (name == "remote") return BackendKind::remote;
    throw ConfigError("unknown backend \"" + name +
                      "\" (expected scripted, first_safe, always_down, or remote)");
}

std::unique_ptr<DecisionBackend> make_backend(const BackendConfig& config) {
    if (config.kind == BackendKind::remote) {
        return std::make_unique<RemoteBackend>(config);
    }
    return std::make_unique<LocalBackend>(config.kind);
}

}  // namespace apex
