#pragma once

#include <optional>
#include <string>
#include <vector>

#include "apex/decision.hpp"
#include "apex/rollout.hpp"
#include "apex/salience.hpp"

namespace apex {

constexpr double kWallHalfExtent = 5.0;   // square walls at x = +-5, y = +-5
constexpr double kAgentClamp = 4.7;       // wall minus agent radius
constexpr double kAvoidRadius = 0.3;      // agent and obstacle radius
constexpr double kContactDistance = 0.6;  // center distance ending the episode
constexpr double kSpawnHalfExtent = 3.5;
constexpr double kSpawnAgentGap = 1.5;

enum class DifficultyLevel { simple, medium, hard };

const char* to_string(DifficultyLevel level);
DifficultyLevel difficulty_from_string(const std::string& name);

struct Difficulty {
    DifficultyLevel level = DifficultyLevel::simple;
    int obstacle_count = 2;
    double obstacle_speed = 1.0;  // m/s
};

/// simple: 2 @ 1.0 m/s, medium: 4 @ 2.0 m/s, hard: 6 @ 3.0 m/s.
Difficulty difficulty_table(DifficultyLevel level);

struct AvoidWorld {
    WorldState world;  // objects[0] is the agent
    std::optional<Vec3> target;
    bool collided = false;
    // off by default: obstacles steer toward the agent each step instead of
    // moving ballistically; rollouts still extrapolate linearly
    bool homing = false;
};

/**
 * Agent at the origin; obstacles placed uniformly in [-3.5, 3.5]^2 at least
 * 1.5 m from the agent and 0.6 m from each other, each moving at the
 * difficulty speed in a uniformly random direction. Reproducible per seed;
 * 1000 placement rejections throw InvalidInputError.
 */
AvoidWorld init_avoid_world(const Difficulty& difficulty, std::uint64_t seed);

/**
 * Advances everything by dt: obstacles move ballistically and reflect off the
 * walls (position mirrored about the wall line, normal velocity negated, so
 * speed is preserved exactly); the agent moves with its commanded velocity,
 * clamped to +-4.7 in x and y. Agent-obstacle center distance <= 0.6 sets
 * `collided`.
 */
void world_step(AvoidWorld& world, double dt);

/// Candidate rollout under the environment's own dynamics (wall reflection,
/// agent clamping), so predicted clearances match execution exactly.
RolloutOutcome avoid_rollout(const AvoidWorld& world, const CandidateAction& action,
                             const SimConfig& sim, double safe_threshold = kSafeThreshold);

/// All nine candidates, canonical order.
std::vector<RolloutOutcome> avoid_rollouts(const AvoidWorld& world, const SimConfig& sim,
                                           double safe_threshold = kSafeThreshold,
                                           double duration = 1.0);

/// World-state JSON (indented, stable key order) for the {state} prompt slot.
std::string avoid_state_text(const AvoidWorld& world);

/// One line per candidate move for the {available_move} prompt slot.
std::string available_moves_text(double duration = 1.0);

struct AvoidDecisionLog {
    double time = 0.0;
    std::string chosen_move;
    bool chosen_predicted_collision = false;
    bool safe_alternative_existed = false;
    bool invalid = false;
    double latency_s = 0.0;
};

struct EpisodeRecord {
    std::string difficulty;
    int seed = 0;
    bool survived = false;
    double survival_time = 0.0;  // capped at the horizon
    int decisions = 0;
    int invalid_actions = 0;
    int backend_errors = 0;
    int parse_failures = 0;
    std::vector<double> latencies_s;
    std::vector<AvoidDecisionLog> decision_log;
    // sampled every 0.1 s: [t, agent xyz, obstacle xyz...]
    std::vector<std::vector<double>> trajectory;
};

Json to_json(const EpisodeRecord& record);

struct AvoidEpisodeConfig {
    double decision_interval = 1.0;  // seconds between decisions
    double horizon = 10.0;           // episode cap, seconds
    double safe_threshold = kSafeThreshold;
    int top_k = 2;
    SimConfig sim;
    bool record_trajectory = false;
};

/**
 * Full decision loop: per interval, difference graph from the two most recent
 * boundary snapshots (at t=0 the second snapshot is a one-engine-step
 * forecast), top-k salience summary, nine candidate rollouts, prompt assembly,
 * backend decision, plan execution. Invalid actions: parse/vocabulary
 * failures, backend transport failures (fallback stay), and choosing a
 * rollout-predicted collision while a safe candidate existed.
 */
EpisodeRecord run_avoid_episode(DecisionBackend& backend, const Difficulty& difficulty, int seed,
                                const AvoidEpisodeConfig& cfg = {});

/// Same loop on a prebuilt world (fixtures, tests).
EpisodeRecord run_avoid_episode_on(DecisionBackend& backend, AvoidWorld world,
                                   const std::string& difficulty_name, int seed,
                                   const AvoidEpisodeConfig& cfg = {});

struct AvoidAggregate {
    double cfr_pct = 0.0;       // episodes survived, percent
    double iar_pct = 0.0;       // invalid actions per decision, percent
    double ast_s = 0.0;         // mean survival time
    double mean_latency_s = 0.0;
    int episodes = 0;
    int decisions = 0;
};

AvoidAggregate aggregate_avoid(const std::vector<EpisodeRecord>& records);

/**
 * Hand-built static scene: six blockers 2 m out on the N/NE/E/SE/S/SW rays
 * and one shaping obstacle at (-1.2, 1.14) leaving a barely-safe westward
 * corridor (min clearance 0.54 m). A first-safe policy walks that corridor;
 * a clearance-maximizing policy holds position instead (1.055 m).
 */
AvoidWorld narrow_corridor_fixture();

}  // namespace apex
