#include "apex/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "apex/error.hpp"

namespace apex {

namespace {

constexpr Direction kAllDirections[] = {Direction::N,  Direction::NE, Direction::E,
                                        Direction::SE, Direction::S,  Direction::SW,
                                        Direction::W,  Direction::NW, Direction::stay};

std::string format2(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", x);
    return buf;
}

}  // namespace

const char* to_string(Direction d) {
    switch (d) {
        case Direction::N: return "N";
        case Direction::NE: return "NE";
        case Direction::E: return "E";
        case Direction::SE: return "SE";
        case Direction::S: return "S";
        case Direction::SW: return "SW";
        case Direction::W: return "W";
        case Direction::NW: return "NW";
        case Direction::stay: return "stay";
    }
    return "stay";
}

std::optional<Direction> direction_from_string(const std::string& s) {
    for (Direction d : kAllDirections) {
        if (s == to_string(d)) return d;
    }
    return std::nullopt;
}

Vec3 direction_vector(Direction d) {
    const double diag = std::sqrt(0.5);
    switch (d) {
        case Direction::N: return {0.0, 1.0, 0.0};
        case Direction::NE: return {diag, diag, 0.0};
        case Direction::E: return {1.0, 0.0, 0.0};
        case Direction::SE: return {diag, -diag, 0.0};
        case Direction::S: return {0.0, -1.0, 0.0};
        case Direction::SW: return {-diag, -diag, 0.0};
        case Direction::W: return {-1.0, 0.0, 0.0};
        case Direction::NW: return {-diag, diag, 0.0};
        case Direction::stay: return Vec3::Zero();
    }
    return Vec3::Zero();
}

std::string CandidateAction::label() const {
    if (env == ActionEnv::avoid) return to_string(direction);
    return "rotation " + std::to_string(rotation) + " column " + std::to_string(column);
}

std::vector<CandidateAction> enumerate_actions(double duration) {
    if (!(duration > 0.0)) throw InvalidInputError("enumerate_actions: duration must be > 0");
    std::vector<CandidateAction> actions;
    for (Direction d : kAllDirections) {
        CandidateAction a;
        a.env = ActionEnv::avoid;
        a.direction = d;
        a.duration = duration;
        actions.push_back(a);
    }
    return actions;
}

RolloutOutcome rollout_action(const WorldState& world, const CandidateAction& action,
                              const SimConfig& cfg, double safe_threshold,
                              const std::string& agent_id, const std::optional<Vec3>& target) {
    if (action.env != ActionEnv::avoid) {
        throw InvalidInputError("rollout_action: only avoidance actions roll out on a world state");
    }
    WorldState state = world;
    ObjectState* agent = state.find(agent_id);
    if (agent == nullptr) throw InvalidInputError("rollout_action: no object with id " + agent_id);
    agent->velocity = direction_vector(action.direction) * kAgentSpeed;
    agent->acceleration = Vec3::Zero();

    RolloutOutcome outcome;
    outcome.action = action;
    outcome.duration = action.duration;

    auto min_clearance = [&](const WorldState& w) {
        const ObjectState* ag = w.find(agent_id);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& obj : w.objects) {
            if (obj.id == agent_id) continue;
            best = std::min(best, clearance(*ag, obj));
        }
        return best;
    };

    double min_seen = min_clearance(state);
    const double raw = action.duration / cfg.dt;
    long long steps = static_cast<long long>(std::llround(raw));
    if (std::abs(raw - static_cast<double>(steps)) > 1e-9 || steps == 0) {
        steps = static_cast<long long>(std::ceil(raw - 1e-12));
    }
    if (steps > cfg.max_steps) {
        throw BudgetError("rollout_action: step budget exceeded");
    }
    for (long long i = 1; i <= steps && min_seen > 0.0; ++i) {
        state = euler_step(state, cfg.dt);
        min_seen = std::min(min_seen, min_clearance(state));
    }

    outcome.collision = min_seen <= 0.0;
    outcome.min_obstacle_distance = std::max(0.0, min_seen);
    if (std::isinf(outcome.min_obstacle_distance)) outcome.min_obstacle_distance = 0.0;
    outcome.final_agent_position = state.find(agent_id)->position;
    if (target) outcome.target_distance = (outcome.final_agent_position - *target).norm();
    outcome.safe = !outcome.collision && outcome.min_obstacle_distance > safe_threshold;
    if (world.objects.size() <= 1) outcome.safe = !outcome.collision;  // nothing to collide with
    return outcome;
}

std::string describe_outcomes(const std::vector<RolloutOutcome>& outcomes) {
    if (outcomes.empty()) return "No feasible actions.";
    std::string text;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        if (i > 0) text += "\n";
        text += o.action.label();
        text += o.safe ? ": Safe" : ": Unsafe";
        if (o.tetris) {
            text += ", lines " + std::to_string(o.tetris->lines_cleared);
            text += ", holes " + std::to_string(o.tetris->holes);
            text += ", bumpiness " + std::to_string(o.tetris->bumpiness);
            text += ", max height " + std::to_string(o.tetris->max_height);
        } else {
            text += ", min obstacle distance " + format2(o.min_obstacle_distance) + " m";
            text += ", predicted collision: ";
            text += o.collision ? "yes" : "no";
            if (o.target_distance) {
                text += ", target distance " + format2(*o.target_distance) + " m";
            }
        }
    }
    return text;
}

}  // namespace apex
