#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "apex/physics.hpp"

namespace apex {

/// Compass moves in the z = 0 plane plus stay. Enumeration order is the
/// canonical candidate order everywhere (prompts, first_safe, tie-breaks).
enum class Direction { N, NE, E, SE, S, SW, W, NW, stay };

constexpr double kAgentSpeed = 1.5;         // m/s, fixed for every move
constexpr double kSafeThreshold = 0.5;      // meters of clearance

const char* to_string(Direction d);
std::optional<Direction> direction_from_string(const std::string& s);

/// Unit vector for a direction; stay maps to zero.
Vec3 direction_vector(Direction d);

enum class ActionEnv { avoid, tetris };

struct CandidateAction {
    ActionEnv env = ActionEnv::avoid;
    // avoid payload
    Direction direction = Direction::stay;
    double duration = 1.0;  // seconds
    // tetris payload
    int rotation = 0;
    int column = 0;

    std::string label() const;
};

struct TetrisOutcome {
    int lines_cleared = 0;
    int holes = 0;
    int bumpiness = 0;
    int max_height = 0;
    /// Move sequence realizing this placement, as (move, times) pairs ending
    /// in a hard drop.
    std::vector<std::pair<std::string, int>> moves;
};

struct RolloutOutcome {
    CandidateAction action;
    bool collision = false;
    double min_obstacle_distance = 0.0;  // surface-to-surface clearance, >= 0
    std::optional<double> target_distance;
    std::optional<TetrisOutcome> tetris;
    double duration = 0.0;
    Vec3 final_agent_position = Vec3::Zero();
    bool safe = false;  // no collision and clearance above threshold
};

/// The nine avoidance candidates (eight compass directions plus stay), each
/// at kAgentSpeed for `duration` seconds, in canonical order.
std::vector<CandidateAction> enumerate_actions(double duration = 1.0);

/**
 * Simulates one candidate on a copy of the world: the agent moves with the
 * action's constant velocity, everything else follows its own state, and the
 * agent-to-object clearance is tracked every step (initial state included).
 * collision means clearance hit zero; safe means no collision and
 * min clearance > safe_threshold (boundary exactly at threshold is unsafe).
 */
RolloutOutcome rollout_action(const WorldState& world, const CandidateAction& action,
                              const SimConfig& cfg, double safe_threshold = kSafeThreshold,
                              const std::string& agent_id = "agent",
                              const std::optional<Vec3>& target = std::nullopt);

/// One deterministic line per outcome, e.g.
/// "E: Safe, min obstacle distance 2.00 m, predicted collision: no".
/// Empty input renders "No feasible actions."
std::string describe_outcomes(const std::vector<RolloutOutcome>& outcomes);

}  // namespace apex
