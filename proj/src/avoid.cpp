#include "apex/avoid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "apex/error.hpp"
#include "apex/rng.hpp"
#include "apex/scene_graph.hpp"

namespace apex {

namespace {

constexpr double kPi = 3.14159265358979323846;
// reported clearance when the world has no obstacles at all
constexpr double kNoObstacleDistance = 9999.0;

const ObjectState& agent_of(const AvoidWorld& world) {
    const ObjectState* agent = world.world.find("agent");
    if (agent == nullptr) throw InvalidInputError("avoid world has no \"agent\" object");
    return *agent;
}

double min_agent_clearance(const AvoidWorld& world) {
    const ObjectState& agent = agent_of(world);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& obj : world.world.objects) {
        if (obj.id == "agent") continue;
        best = std::min(best, center_distance(agent, obj) - kContactDistance);
    }
    return best;
}

void reflect_axis(double& p, double& v, double wall) {
    if (p > wall) {
        p = 2.0 * wall - p;
        v = -v;
    } else if (p < -wall) {
        p = -2.0 * wall - p;
        v = -v;
    }
}

long long steps_for(double duration, double dt) {
    const double raw = duration / dt;
    long long steps = std::llround(raw);
    if (std::abs(raw - static_cast<double>(steps)) > 1e-9) {
        steps = static_cast<long long>(std::ceil(raw));
    }
    return std::max<long long>(steps, 0);
}

}  // namespace

const char* to_string(DifficultyLevel level) {
    switch (level) {
        case DifficultyLevel::simple: return "simple";
        case DifficultyLevel::medium: return "medium";
        case DifficultyLevel::hard: return "hard";
    }
    throw std::logic_error("unknown DifficultyLevel");
}

DifficultyLevel difficulty_from_string(const std::string& name) {
    if (name == "simple") return DifficultyLevel::simple;
    if (name == "medium") return DifficultyLevel::medium;
    if (name == "hard") return DifficultyLevel::hard;
    throw ConfigError("unknown difficulty \"" + name + "\" (expected simple, medium, or hard)");
}

Difficulty difficulty_table(DifficultyLevel level) {
    switch (level) {
        case DifficultyLevel::simple: return {level, 2, 1.0};
        case DifficultyLevel::medium: return {level, 4, 2.0};
        case DifficultyLevel::hard: return {level, 6, 3.0};
    }
    throw std::logic_error("unknown DifficultyLevel");
}

AvoidWorld init_avoid_world(const Difficulty& difficulty, std::uint64_t seed) {
    if (difficulty.obstacle_count < 0) throw InvalidInputError("negative obstacle count");
    if (difficulty.obstacle_speed < 0.0) throw InvalidInputError("negative obstacle speed");

    AvoidWorld world;
    world.world.timestamp = 0.0;

    ObjectState agent;
    agent.id = "agent";
    agent.kind = ObjectKind::agent;
    agent.radius = kAvoidRadius;
    world.world.objects.push_back(agent);

    Rng rng(derive_seed(seed, "avoid"));
    for (int i = 1; i <= difficulty.obstacle_count; ++i) {
        ObjectState cat;
        cat.id = "cat" + std::to_string(i);
        cat.kind = ObjectKind::obstacle;
        cat.radius = kAvoidRadius;

        bool placed = false;
        for (int attempt = 0; attempt < 1000; ++attempt) {
            const Vec3 pos(rng.uniform(-kSpawnHalfExtent, kSpawnHalfExtent),
                           rng.uniform(-kSpawnHalfExtent, kSpawnHalfExtent), 0.0);
            if (pos.norm() < kSpawnAgentGap) continue;
            bool overlap = false;
            for (const auto& other : world.world.objects) {
                if (other.id == "agent") continue;
                if ((pos - other.position).norm() < kContactDistance) {
                    overlap = true;
                    break;
                }
            }
            if (overlap) continue;
            cat.position = pos;
            placed = true;
            break;
        }
        if (!placed) {
            throw InvalidInputError("obstacle placement failed after 1000 attempts (seed " +
                                    std::to_string(seed) + ")");
        }
        const double angle = rng.uniform(0.0, 2.0 * kPi);
        cat.velocity = Vec3(difficulty.obstacle_speed * std::cos(angle),
                            difficulty.obstacle_speed * std::sin(angle), 0.0);
        world.world.objects.push_back(cat);
    }
    validate(world.world);
    return world;
}

void world_step(AvoidWorld& world, double dt) {
    if (!(dt > 0.0)) throw InvalidInputError("world_step needs dt > 0");
    if (world.homing) {
        const ObjectState* agent = world.world.find("agent");
        if (agent != nullptr) {
            for (auto& obj : world.world.objects) {
                if (obj.id == "agent") continue;
                const Vec3 gap = agent->position - obj.position;
                const double range = gap.norm();
                if (range > 1e-12) obj.velocity = gap * (obj.velocity.norm() / range);
            }
        }
    }
    for (auto& obj : world.world.objects) {
        obj.position += obj.velocity * dt;
        if (obj.id == "agent") {
            obj.position.x() = std::clamp(obj.position.x(), -kAgentClamp, kAgentClamp);
            obj.position.y() = std::clamp(obj.position.y(), -kAgentClamp, kAgentClamp);
        } else {
            reflect_axis(obj.position.x(), obj.velocity.x(), kWallHalfExtent);
            reflect_axis(obj.position.y(), obj.velocity.y(), kWallHalfExtent);
        }
    }
    world.world.timestamp += dt;
    if (!world.collided && min_agent_clearance(world) <= 0.0) world.collided = true;
}

RolloutOutcome avoid_rollout(const AvoidWorld& world, const CandidateAction& action,
                             const SimConfig& sim, double safe_threshold) {
    if (action.env != ActionEnv::avoid) throw InvalidInputError("avoid_rollout needs an avoid action");
    validate(sim);

    AvoidWorld probe = world;
    probe.collided = false;
    ObjectState* agent = probe.world.find("agent");
    if (agent == nullptr) throw InvalidInputError("avoid world has no \"agent\" object");
    agent->velocity = direction_vector(action.direction) * kAgentSpeed;

    const bool has_obstacles = probe.world.objects.size() > 1;
    double min_clearance = has_obstacles ? min_agent_clearance(probe) : kNoObstacleDistance;
    bool collision = min_clearance <= 0.0;

    const long long steps = steps_for(action.duration, sim.dt);
    for (long long i = 0; i < steps && !collision; ++i) {
        world_step(probe, sim.dt);
        if (has_obstacles) {
            min_clearance = std::min(min_clearance, min_agent_clearance(probe));
        }
        collision = probe.collided;
    }

    RolloutOutcome outcome;
    outcome.action = action;
    outcome.collision = collision;
    outcome.min_obstacle_distance = std::max(0.0, min_clearance);
    outcome.duration = action.duration;
    outcome.final_agent_position = probe.world.find("agent")->position;
    outcome.safe = !collision && min_clearance > safe_threshold;
    if (world.target) {
        outcome.target_distance = (outcome.final_agent_position - *world.target).norm();
    }
    return outcome;
}

std::vector<RolloutOutcome> avoid_rollouts(const AvoidWorld& world, const SimConfig& sim,
                                           double safe_threshold, double duration) {
    std::vector<RolloutOutcome> outcomes;
    for (const auto& action : enumerate_actions(duration)) {
        outcomes.push_back(avoid_rollout(world, action, sim, safe_threshold));
    }
    return outcomes;
}

std::string avoid_state_text(const AvoidWorld& world) {
    const ObjectState& agent = agent_of(world);
    Json doc;
    doc["time"] = world.world.timestamp;
    doc["walls"] = {{"x", Json::array({-kWallHalfExtent, kWallHalfExtent})},
                    {"y", Json::array({-kWallHalfExtent, kWallHalfExtent})}};
    doc["agent"] = {{"position", vec3_to_json(agent.position)},
                    {"velocity", vec3_to_json(agent.velocity)},
                    {"radius", agent.radius}};
    Json obstacles = Json::array();
    for (const auto& obj : world.world.objects) {
        if (obj.id == "agent") continue;
        obstacles.push_back({{"id", obj.id},
                             {"position", vec3_to_json(obj.position)},
                             {"velocity", vec3_to_json(obj.velocity)},
                             {"radius", obj.radius}});
    }
    doc["obstacles"] = obstacles;
    if (world.target) doc["target"] = vec3_to_json(*world.target);
    return doc.dump(2);
}

std::string available_moves_text(double duration) {
    char buffer[160];
    std::string out;
    for (const auto& action : enumerate_actions(duration)) {
        if (!out.empty()) out += '\n';
        if (action.direction == Direction::stay) {
            std::snprintf(buffer, sizeof(buffer), "- \"stay\": hold position for %.1f s",
                          action.duration);
        } else {
            const Vec3 dir = direction_vector(action.direction);
            std::snprintf(buffer, sizeof(buffer),
                          "- \"%s\": move along (%.2f, %.2f) at %.1f m/s for %.1f s",
                          to_string(action.direction), dir.x(), dir.y(), kAgentSpeed,
                          action.duration);
        }
        out += buffer;
    }
    return out;
}

Json to_json(const EpisodeRecord& record) {
    Json doc;
    doc["difficulty"] = record.difficulty;
    doc["seed"] = record.seed;
    doc["survived"] = record.survived;
    doc["survival_time"] = record.survival_time;
    doc["decisions"] = record.decisions;
    doc["invalid_actions"] = record.invalid_actions;
    doc["backend_errors"] = record.backend_errors;
    doc["parse_failures"] = record.parse_failures;
    doc["latency_s"] = record.latencies_s;
    Json log = Json::array();
    for (const auto& entry : record.decision_log) {
        log.push_back({{"time", entry.time},
                       {"move", entry.chosen_move},
                       {"predicted_collision", entry.chosen_predicted_collision},
                       {"safe_alternative", entry.safe_alternative_existed},
                       {"invalid", entry.invalid},
                       {"latency_s", entry.latency_s}});
    }
    doc["decision_log"] = log;
    return doc;
}

EpisodeRecord run_avoid_episode(DecisionBackend& backend, const Difficulty& difficulty, int seed,
                                const AvoidEpisodeConfig& cfg) {
    return run_avoid_episode_on(backend, init_avoid_world(difficulty, static_cast<std::uint64_t>(seed)),
                                to_string(difficulty.level), seed, cfg);
}

EpisodeRecord run_avoid_episode_on(DecisionBackend& backend, AvoidWorld world,
                                   const std::string& difficulty_name, int seed,
                                   const AvoidEpisodeConfig& cfg) {
    validate(cfg.sim);
    if (!(cfg.decision_interval > 0.0)) throw InvalidInputError("decision interval must be > 0");
    if (!(cfg.horizon > 0.0)) throw InvalidInputError("horizon must be > 0");
    if (cfg.top_k < 1) throw InvalidInputError("top_k must be >= 1");

    EpisodeRecord record;
    record.difficulty = difficulty_name;
    record.seed = seed;

    const long long steps_per_interval = steps_for(cfg.decision_interval, cfg.sim.dt);
    const int total_decisions =
        static_cast<int>(std::llround(cfg.horizon / cfg.decision_interval));
    const long long trajectory_stride =
        std::max<long long>(1, std::llround(0.1 / cfg.sim.dt));
    long long global_step = 0;

    auto record_trajectory_row = [&] {
        if (!cfg.record_trajectory) return;
        std::vector<double> row;
        row.push_back(world.world.timestamp);
        for (const auto& obj : world.world.objects) {
            row.push_back(obj.position.x());
            row.push_back(obj.position.y());
            row.push_back(obj.position.z());
        }
        record.trajectory.push_back(std::move(row));
    };
    record_trajectory_row();

    WorldState prev_snapshot;
    bool have_prev = false;

    for (int decision = 0; decision < total_decisions && !world.collided; ++decision) {
        // difference graph across the boundary gap (one-step forecast at t=0)
        const SceneGraph graph_now = build_scene_graph(world.world);
        DiffGraph diff;
        if (have_prev) {
            diff = diff_graph(build_scene_graph(prev_snapshot), graph_now);
        } else {
            AvoidWorld forecast = world;
            world_step(forecast, cfg.sim.dt);
            diff = diff_graph(graph_now, build_scene_graph(forecast.world));
        }
        prev_snapshot = world.world;
        have_prev = true;

        SalienceConfig salience_cfg;
        salience_cfg.k = cfg.top_k;
        const auto selected =
            select_top_k(score_edges(diff, world.world, salience_cfg), salience_cfg.k);
        const SceneSummary summary = summarize(selected, world.world, std::string("agent"));

        const auto outcomes =
            avoid_rollouts(world, cfg.sim, cfg.safe_threshold, cfg.decision_interval);
        const PromptBundle prompt = assemble_prompt(
            TemplateId::avoid,
            {{"state", avoid_state_text(world)},
             {"available_move", available_moves_text(cfg.decision_interval)}},
            summary.text, describe_outcomes(outcomes));

        ActionPlan plan;
        AvoidDecisionLog log;
        log.time = world.world.timestamp;
        try {
            const DecideResult dr = backend.decide(prompt, outcomes, ActionEnv::avoid);
            record.latencies_s.push_back(dr.latency_s);
            log.latency_s = dr.latency_s;
            plan = dr.plan;
            if (!dr.parse_ok) {
                ++record.parse_failures;
                ++record.invalid_actions;
                log.invalid = true;
            }
        } catch (const BackendError&) {
            ++record.backend_errors;
            ++record.invalid_actions;
            log.invalid = true;
            plan = fallback_plan(ActionEnv::avoid);
        }
        ++record.decisions;
        if (plan.steps.empty()) plan = fallback_plan(ActionEnv::avoid);

        bool any_safe = false;
        for (const auto& o : outcomes) any_safe = any_safe || o.safe;
        const std::string& first_move = plan.steps.front().move;
        log.chosen_move = first_move;
        log.safe_alternative_existed = any_safe;
        for (const auto& o : outcomes) {
            if (to_string(o.action.direction) == first_move) {
                log.chosen_predicted_collision = o.collision;
                break;
            }
        }
        if (log.chosen_predicted_collision && any_safe && !log.invalid) {
            ++record.invalid_actions;
            log.invalid = true;
        }
        record.decision_log.push_back(log);

        // execute the plan across this interval, stay for any remainder
        long long steps_left = steps_per_interval;
        ObjectState* agent = world.world.find("agent");
        for (const auto& step : plan.steps) {
            if (steps_left <= 0 || world.collided) break;
            const auto dir = direction_from_string(step.move);
            if (!dir) break;  // unreachable for parsed plans
            agent->velocity = direction_vector(*dir) * kAgentSpeed;
            long long want = std::min(steps_left, steps_for(step.duration, cfg.sim.dt));
            while (want-- > 0 && !world.collided) {
                world_step(world, cfg.sim.dt);
                --steps_left;
                if (++global_step % trajectory_stride == 0) record_trajectory_row();
            }
        }
        agent->velocity = Vec3::Zero();
        while (steps_left-- > 0 && !world.collided) {
            world_step(world, cfg.sim.dt);
            if (++global_step % trajectory_stride == 0) record_trajectory_row();
        }
    }

    record.survived = !world.collided;
    record.survival_time =
        record.survived ? cfg.horizon : std::min(world.world.timestamp, cfg.horizon);
    if (cfg.record_trajectory &&
        (record.trajectory.empty() ||
         record.trajectory.back().front() != world.world.timestamp)) {
        record_trajectory_row();
    }
    return record;
}

AvoidAggregate aggregate_avoid(const std::vector<EpisodeRecord>& records) {
    if (records.empty()) throw InvalidInputError("no avoid episodes to aggregate");
    AvoidAggregate agg;
    agg.episodes = static_cast<int>(records.size());
    int survived = 0;
    int invalid = 0;
    double latency_sum = 0.0;
    long long latency_count = 0;
    for (const auto& r : records) {
        survived += r.survived ? 1 : 0;
        invalid += r.invalid_actions;
        agg.decisions += r.decisions;
        agg.ast_s += r.survival_time;
        for (const double l : r.latencies_s) {
            latency_sum += l;
            ++latency_count;
        }
    }
    agg.cfr_pct = 100.0 * static_cast<double>(survived) / static_cast<double>(agg.episodes);
    agg.iar_pct = agg.decisions > 0
                      ? 100.0 * static_cast<double>(invalid) / static_cast<double>(agg.decisions)
                      : 0.0;
    agg.ast_s /= static_cast<double>(agg.episodes);
    agg.mean_latency_s = latency_count > 0 ? latency_sum / static_cast<double>(latency_count) : 0.0;
    return agg;
}

AvoidWorld narrow_corridor_fixture() {
    AvoidWorld world;
    ObjectState agent;
    agent.id = "agent";
    agent.kind = ObjectKind::agent;
    agent.radius = kAvoidRadius;
    world.world.objects.push_back(agent);

    const double diag = 2.0 / std::sqrt(2.0);
    const Vec3 blockers[] = {
        {0.0, 2.0, 0.0},    // blocks N
        {diag, diag, 0.0},  // blocks NE
        {2.0, 0.0, 0.0},    // blocks E
        {diag, -diag, 0.0}, // blocks SE
        {0.0, -2.0, 0.0},   // blocks S
        {-diag, -diag, 0.0},// blocks SW
        {-1.2, 1.14, 0.0},  // shapes the W corridor (perpendicular distance 1.14)
    };
    int i = 1;
    for (const auto& pos : blockers) {
        ObjectState cat;
        cat.id = "cat" + std::to_string(i++);
        cat.kind = ObjectKind::obstacle;
        cat.radius = kAvoidRadius;
        cat.position = pos;
        world.world.objects.push_back(cat);
    }
    validate(world.world);
    return world;
}

}  // namespace apex
