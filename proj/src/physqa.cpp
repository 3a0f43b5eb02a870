#include "apex/physqa.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

#include "apex/decision.hpp"
#include "apex/error.hpp"
#include "apex/rng.hpp"

namespace apex {

namespace {

double round_to(double x, int decimals) {
    double scale = 1.0;
    for (int i = 0; i < decimals; ++i) scale *= 10.0;
    return static_cast<double>(std::llround(x * scale)) / scale;
}

std::string fmt(double x, int decimals) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.*f", decimals, x);
    return buffer;
}

std::string fmt_vec(const Vec3& v, int decimals) {
    return "[" + fmt(v.x(), decimals) + ", " + fmt(v.y(), decimals) + ", " +
           fmt(v.z(), decimals) + "]";
}

Vec3 round_vec(const Vec3& v, int decimals) {
    return Vec3(round_to(v.x(), decimals), round_to(v.y(), decimals), round_to(v.z(), decimals));
}

Vec3 param_vec(const Json& p, const char* key) { return vec3_from_json(p.at(key)); }

Vec3 sample_vec(Rng& rng, double lo, double hi, int decimals) {
    return round_vec(Vec3(rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)),
                     decimals);
}

// --- question renderers -------------------------------------------------

std::string linear_question(const Vec3& v0, const Vec3& a, double t) {
    return "An object starts at (0,0,0) with an initial velocity of " + fmt_vec(v0, 2) +
           " m/s and an acceleration of " + fmt_vec(a, 2) +
           " m/s^2. What are its velocity (vx, vy, vz) and displacement (dx, dy, dz) after " +
           fmt(t, 2) + " seconds?";
}

std::string circular_question(double radius, double omega, double speed, double t) {
    return "Motion Type: Circular Motion\nRadius: " + fmt(radius, 2) + " meters\nSpeed: " +
           fmt(speed, 2) + " m/s\nAngular velocity: " + fmt(omega, 2) + " rad/s\nTime: " +
           fmt(t, 2) +
           " s\nPlane: xy-plane\nTask: Compute its position (x_B, y_B, z_B), assuming it starts "
           "at (r, 0, 0).";
}

std::string projectile_question(const Vec3& v0) {
    return "A projectile is launched from (0,0,0) with an initial velocity of " + fmt_vec(v0, 2) +
           " m/s from x-y plane. Calculate its flight time, maximum height (h), and range "
           "(dx, dy, dz).";
}

std::string collision_question(double m1, const Vec3& p1, const Vec3& v1, double m2,
                               const Vec3& p2, const Vec3& v2, double radius) {
    return "Two objects with masses " + fmt(m1, 2) + " kg and " + fmt(m2, 2) +
           " kg are located at positions:\nObject 1 Position: " + fmt_vec(p1, 4) +
           "\nObject 2 Position: " + fmt_vec(p2, 4) + "\nThe radius of both spheres is " +
           fmt(radius, 1) +
           ".\nThey are moving with velocities:\nObject 1 Velocity: " + fmt_vec(v1, 3) +
           " m/s\nObject 2 Velocity: " + fmt_vec(v2, 3) +
           " m/s\nAssuming an elastic collision, determine:\n- Will they collide?\n- If they "
           "collide, what are their final velocities?";
}

std::string multi_question(const Json& params) {
    const Json& a = params.at("A");
    const Json& b = params.at("B");
    const Json& c = params.at("C");
    return "We have three objects moving in different types of motion in 3D space:\n"
           "1. Object A - Linear Motion\nInitial Velocity: " +
           fmt_vec(param_vec(a, "v0"), 2) + " m/s\nAcceleration: " + fmt_vec(param_vec(a, "a"), 2) +
           " m/s^2\nTime: " + fmt(a.at("t").get<double>(), 2) +
           " s\nCompute the final position (x_A, y_A, z_A), assuming it starts at (0, 0, 0).\n"
           "2. Object B - Circular Motion\nRadius: " +
           fmt(b.at("radius").get<double>(), 2) + " m\nAngular Velocity: " +
           fmt(b.at("omega").get<double>(), 2) + " rad/s\nTime: " +
           fmt(b.at("t").get<double>(), 2) +
           " s\nRotating in the xy-plane.\nCompute the position (x_B, y_B, z_B), assuming it "
           "starts at (r_B, 0, 0).\n"
           "3. Object C - Projectile Motion\nInitial Speed: " +
           fmt_vec(param_vec(c, "v0"), 2) + " m/s\nTime: " + fmt(c.at("t").get<double>(), 2) +
           " s\nCompute the position (x_C, y_C, z_C), assuming it starts from (0, 0, 0) in the "
           "xy-plane.";
}

// --- schema layout ------------------------------------------------------

std::vector<std::string> schema_fields_for(TaskType type) {
    switch (type) {
        case TaskType::linear:
            return {"velocity_x", "velocity_y", "velocity_z",
                    "displacement_x", "displacement_y", "displacement_z"};
        case TaskType::circular: return {"x_B", "y_B", "z_B"};
        case TaskType::projectile:
            return {"flight_time", "maximum_height", "range_x", "range_y", "range_z"};
        case TaskType::collision:
            return {"will_collide", "vel_1_x", "vel_1_y", "vel_1_z",
                    "vel_2_x", "vel_2_y", "vel_2_z"};
        case TaskType::multi:
            return {"x_A", "y_A", "z_A", "x_B", "y_B", "z_B", "x_C", "y_C", "z_C"};
    }
    throw std::logic_error("unknown TaskType");
}

std::string flat_schema(const std::vector<std::string>& names, std::size_t from, std::size_t to) {
    std::string out = "{";
    for (std::size_t i = from; i < to; ++i) {
        if (i > from) out += ", ";
        out += "'" + names[i] + "': 'float'";
    }
    return out + "}";
}

ObjectState collision_body(const std::string& id, double mass, const Vec3& pos, const Vec3& vel,
                           double radius) {
    ObjectState obj;
    obj.id = id;
    obj.position = pos;
    obj.velocity = vel;
    obj.mass = mass;
    obj.radius = radius;
    return obj;
}

// closest line-to-line approach distance for the relative state; infinity
// when the pair recedes from the start
double closest_approach_distance(const Vec3& dp, const Vec3& dv) {
    const double dv2 = dv.squaredNorm();
    if (dv2 == 0.0) return dp.norm();
    const double t = -dp.dot(dv) / dv2;
    if (t <= 0.0) return dp.norm();
    return (dp + t * dv).norm();
}

// --- engine helpers -----------------------------------------------------

KinematicAnswer engine_linear(const Vec3& v0, const Vec3& a, double t, const SimConfig& cfg) {
    WorldState world;
    ObjectState obj;
    obj.id = "object";
    obj.velocity = v0;
    obj.acceleration = a;
    world.objects.push_back(obj);
    const WorldState final_state = simulate_interval(world, t, cfg).first;
    const ObjectState& body = final_state.objects.front();
    KinematicAnswer answer;
    answer.set("velocity_x", AnswerValue::num(body.velocity.x()));
    answer.set("velocity_y", AnswerValue::num(body.velocity.y()));
    answer.set("velocity_z", AnswerValue::num(body.velocity.z()));
    answer.set("displacement_x", AnswerValue::num(body.position.x()));
    answer.set("displacement_y", AnswerValue::num(body.position.y()));
    answer.set("displacement_z", AnswerValue::num(body.position.z()));
    return answer;
}

// cartesian Euler with recomputed centripetal acceleration inflates the
// radius exponentially, so the engine integrates the phase instead
Vec3 engine_circular_position(double radius, double omega, double t, const SimConfig& cfg) {
    const long long steps = std::llround(t / cfg.dt);
    double theta = 0.0;
    for (long long i = 0; i < steps; ++i) theta += omega * cfg.dt;
    return Vec3(radius * std::cos(theta), radius * std::sin(theta), 0.0);
}

struct ProjectileTrace {
    double flight_time = 0.0;
    double max_height = 0.0;
    Vec3 landing = Vec3::Zero();
};

ProjectileTrace engine_projectile(const Vec3& v0, const SimConfig& cfg) {
    WorldState world;
    ObjectState obj;
    obj.id = "projectile";
    obj.kind = ObjectKind::projectile;
    obj.velocity = v0;
    obj.acceleration = Vec3(0.0, 0.0, -cfg.gravity);
    world.objects.push_back(obj);

    ProjectileTrace trace;
    long long steps = 0;
    while (true) {
        world = euler_step(world, cfg.dt);
        const ObjectState& body = world.objects.front();
        trace.max_height = std::max(trace.max_height, body.position.z());
        if (body.position.z() < 0.0) {
            trace.flight_time = world.timestamp;
            trace.landing = body.position;
            return trace;
        }
        if (++steps > cfg.max_steps) {
            throw BudgetError("projectile never landed within the step budget");
        }
    }
}

KinematicAnswer collision_answer(bool will_collide, double m1, const Vec3& v1, double m2,
                                 const Vec3& v2) {
    KinematicAnswer answer;
    answer.set("will_collide", AnswerValue::yes_no(will_collide));
    if (will_collide) {
        const auto [w1, w2] = resolve_elastic_componentwise(m1, v1, m2, v2);
        answer.set("vel_1_x", AnswerValue::num(w1.x()));
        answer.set("vel_1_y", AnswerValue::num(w1.y()));
        answer.set("vel_1_z", AnswerValue::num(w1.z()));
        answer.set("vel_2_x", AnswerValue::num(w2.x()));
        answer.set("vel_2_y", AnswerValue::num(w2.y()));
        answer.set("vel_2_z", AnswerValue::num(w2.z()));
    } else {
        for (const char* name : {"vel_1_x", "vel_1_y", "vel_1_z", "vel_2_x", "vel_2_y", "vel_2_z"}) {
            answer.set(name, AnswerValue::any());
        }
    }
    return answer;
}

// --- response parsing ---------------------------------------------------

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

bool parse_number(const std::string& raw, double& out) {
    const std::string s = trim(raw);
    if (s.empty()) return false;
    char* end = nullptr;
    errno = 0;
    out = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || errno == ERANGE || !std::isfinite(out)) return false;
    while (*end != '\0') {
        if (!std::isspace(static_cast<unsigned char>(*end))) return false;
        ++end;
    }
    return true;
}

bool parse_boolean(const std::string& raw, double& out) {
    std::string s = trim(raw);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "true" || s == "yes") {
        out = 1.0;
        return true;
    }
    if (s == "false" || s == "no") {
        out = 0.0;
        return true;
    }
    double num = 0.0;
    if (parse_number(s, num) && (num == 0.0 || num == 1.0)) {
        out = num;
        return true;
    }
    return false;
}

void flatten_into(const Json& node, std::map<std::string, std::string>& out) {
    for (const auto& [key, value] : node.items()) {
        if (value.is_object()) {
            flatten_into(value, out);
        } else if (value.is_string()) {
            out[key] = value.get<std::string>();
        } else if (!value.is_array()) {
            out[key] = value.dump();
        }
    }
}

}  // namespace

const char* to_string(TaskType type) {
    switch (type) {
        case TaskType::linear: return "linear";
        case TaskType::circular: return "circular";
        case TaskType::projectile: return "projectile";
        case TaskType::collision: return "collision";
        case TaskType::multi: return "multi";
    }
    throw std::logic_error("unknown TaskType");
}

TaskType task_type_from_string(const std::string& name) {
    for (const TaskType type : all_task_types()) {
        if (name == to_string(type)) return type;
    }
    throw ConfigError("unknown task type \"" + name +
                      "\" (expected linear, circular, projectile, collision, or multi)");
}

const std::vector<TaskType>& all_task_types() {
    static const std::vector<TaskType> types = {TaskType::linear, TaskType::circular,
                                                TaskType::projectile, TaskType::collision,
                                                TaskType::multi};
    return types;
}

std::vector<Problem> generate_problems(TaskType type, int n, std::uint64_t seed) {
    if (n < 1) throw InvalidInputError("need at least one problem");
    Rng rng(derive_seed(seed, to_string(type)));

    auto sample_time = [&rng] { return round_to(rng.uniform(1.0, 10.0), 2); };
    auto sample_radius = [&rng] { return round_to(rng.uniform(1.0, 5.0), 2); };
    auto sample_omega = [&rng] { return round_to(rng.uniform(0.5, 5.0), 2); };
    auto sample_projectile_v0 = [&rng] {
        return Vec3(round_to(rng.uniform(-25.0, 25.0), 2), round_to(rng.uniform(-25.0, 25.0), 2),
                    round_to(rng.uniform(5.01, 25.0), 2));
    };

    std::vector<Problem> problems;
    problems.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Problem p;
        p.task_type = type;
        p.index = i;
        p.schema_fields = schema_fields_for(type);
        switch (type) {
            case TaskType::linear: {
                const Vec3 v0 = sample_vec(rng, -25.0, 25.0, 2);
                const Vec3 a = sample_vec(rng, -3.0, 3.0, 2);
                const double t = sample_time();
                p.parameters = {{"v0", vec3_to_json(v0)}, {"a", vec3_to_json(a)}, {"t", t}};
                p.question_text = linear_question(v0, a, t);
                break;
            }
            case TaskType::circular: {
                const double radius = sample_radius();
                const double omega = sample_omega();
                const double t = sample_time();
                const double speed = round_to(radius * omega, 2);
                p.parameters = {{"radius", radius}, {"omega", omega}, {"t", t}, {"speed", speed}};
                p.question_text = circular_question(radius, omega, speed, t);
                break;
            }
            case TaskType::projectile: {
                const Vec3 v0 = sample_projectile_v0();
                p.parameters = {{"v0", vec3_to_json(v0)}};
                p.question_text = projectile_question(v0);
                break;
            }
            case TaskType::collision: {
                const bool want_collide = i % 2 == 0;
                constexpr double kSphereRadius = 0.5;
                bool found = false;
                for (int attempt = 0; attempt < 100000 && !found; ++attempt) {
                    const double m1 = round_to(rng.uniform(1.0, 10.0), 2);
                    const double m2 = round_to(rng.uniform(1.0, 10.0), 2);
                    const Vec3 p1 = sample_vec(rng, -3.0, 3.0, 4);
                    const Vec3 p2 = sample_vec(rng, -3.0, 3.0, 4);
                    const Vec3 v1 = sample_vec(rng, -2.5, 2.5, 3);
                    const Vec3 v2 = sample_vec(rng, -2.5, 2.5, 3);
                    if ((p2 - p1).norm() <= 2.4 * kSphereRadius) continue;  // no near-overlap starts
                    const ObjectState a = collision_body("object1", m1, p1, v1, kSphereRadius);
                    const ObjectState b = collision_body("object2", m2, p2, v2, kSphereRadius);
                    const CollisionReport report = predict_sphere_collision(a, b);
                    if (want_collide) {
                        if (!report.will_collide) continue;
                        // hit must land inside the engine horizon, and deep
                        // enough that stepped detection cannot miss it
                        if (!report.time_of_impact || *report.time_of_impact > 8.0) continue;
                        if (closest_approach_distance(p2 - p1, v2 - v1) >
                            0.8 * (2.0 * kSphereRadius)) {
                            continue;
                        }
                    } else if (report.will_collide) {
                        continue;
                    }
                    p.parameters = {{"m1", m1}, {"p1", vec3_to_json(p1)}, {"v1", vec3_to_json(v1)},
                                    {"m2", m2}, {"p2", vec3_to_json(p2)}, {"v2", vec3_to_json(v2)},
                                    {"radius", kSphereRadius}};
                    p.question_text = collision_question(m1, p1, v1, m2, p2, v2, kSphereRadius);
                    found = true;
                }
                if (!found) {
                    throw InvalidInputError("collision sampling failed for seed " +
                                            std::to_string(seed));
                }
                break;
            }
            case TaskType::multi: {
                Json a = {{"v0", vec3_to_json(sample_vec(rng, -25.0, 25.0, 2))},
                          {"a", vec3_to_json(sample_vec(rng, -3.0, 3.0, 2))},
                          {"t", sample_time()}};
                Json b = {{"radius", sample_radius()}, {"omega", sample_omega()},
                          {"t", sample_time()}};
                Json c = {{"v0", vec3_to_json(sample_projectile_v0())}, {"t", sample_time()}};
                p.parameters = {{"A", a}, {"B", b}, {"C", c}};
                p.question_text = multi_question(p.parameters);
                break;
            }
        }
        problems.push_back(std::move(p));
    }
    return problems;
}

KinematicAnswer oracle_answer(const Problem& problem) {
    const Json& params = problem.parameters;
    switch (problem.task_type) {
        case TaskType::linear:
            return linear_closed_form(param_vec(params, "v0"), param_vec(params, "a"),
                                      params.at("t").get<double>());
        case TaskType::circular:
            return circular_closed_form(params.at("radius").get<double>(),
                                        params.at("omega").get<double>(),
                                        params.at("t").get<double>());
        case TaskType::projectile: return projectile_closed_form(param_vec(params, "v0"));
        case TaskType::collision: {
            const double radius = params.at("radius").get<double>();
            const ObjectState a = collision_body("object1", params.at("m1").get<double>(),
                                                 param_vec(params, "p1"), param_vec(params, "v1"),
                                                 radius);
            const ObjectState b = collision_body("object2", params.at("m2").get<double>(),
                                                 param_vec(params, "p2"), param_vec(params, "v2"),
                                                 radius);
            const CollisionReport report = predict_sphere_collision(a, b);
            return collision_answer(report.will_collide, a.mass, a.velocity, b.mass, b.velocity);
        }
        case TaskType::multi: {
            const Json& a = params.at("A");
            const Json& b = params.at("B");
            const Json& c = params.at("C");
            const KinematicAnswer lin = linear_closed_form(param_vec(a, "v0"), param_vec(a, "a"),
                                                           a.at("t").get<double>());
            const KinematicAnswer circ = circular_closed_form(b.at("radius").get<double>(),
                                                              b.at("omega").get<double>(),
                                                              b.at("t").get<double>());
            const Vec3 v0c = param_vec(c, "v0");
            const double tc = c.at("t").get<double>();
            KinematicAnswer answer;
            answer.set("x_A", *lin.find("displacement_x"));
            answer.set("y_A", *lin.find("displacement_y"));
            answer.set("z_A", *lin.find("displacement_z"));
            answer.set("x_B", *circ.find("x_B"));
            answer.set("y_B", *circ.find("y_B"));
            answer.set("z_B", *circ.find("z_B"));
            answer.set("x_C", AnswerValue::num(v0c.x() * tc));
            answer.set("y_C", AnswerValue::num(v0c.y() * tc));
            answer.set("z_C", AnswerValue::any());
            return answer;
        }
    }
    throw std::logic_error("unknown TaskType");
}

KinematicAnswer engine_answer(const Problem& problem, const SimConfig& cfg) {
    validate(cfg);
    const Json& params = problem.parameters;
    switch (problem.task_type) {
        case TaskType::linear:
            return engine_linear(param_vec(params, "v0"), param_vec(params, "a"),
                                 params.at("t").get<double>(), cfg);
        case TaskType::circular: {
            const Vec3 pos = engine_circular_position(params.at("radius").get<double>(),
                                                      params.at("omega").get<double>(),
                                                      params.at("t").get<double>(), cfg);
            KinematicAnswer answer;
            answer.set("x_B", AnswerValue::num(pos.x()));
            answer.set("y_B", AnswerValue::num(pos.y()));
            answer.set("z_B", AnswerValue::num(pos.z()));
            return answer;
        }
        case TaskType::projectile: {
            const ProjectileTrace trace = engine_projectile(param_vec(params, "v0"), cfg);
            KinematicAnswer answer;
            answer.set("flight_time", AnswerValue::num(trace.flight_time));
            answer.set("maximum_height", AnswerValue::num(trace.max_height));
            answer.set("range_x", AnswerValue::num(trace.landing.x()));
            answer.set("range_y", AnswerValue::num(trace.landing.y()));
            answer.set("range_z", AnswerValue::any());
            return answer;
        }
        case TaskType::collision: {
            const double radius = params.at("radius").get<double>();
            WorldState world;
            world.objects.push_back(collision_body("object1", params.at("m1").get<double>(),
                                                   param_vec(params, "p1"),
                                                   param_vec(params, "v1"), radius));
            world.objects.push_back(collision_body("object2", params.at("m2").get<double>(),
                                                   param_vec(params, "p2"),
                                                   param_vec(params, "v2"), radius));
            const auto [_, event] =
                simulate_interval(world, 10.0, cfg, StopCondition::first_contact);
            const bool hit = event.kind == SimEvent::Kind::contact;
            return collision_answer(hit, params.at("m1").get<double>(), param_vec(params, "v1"),
                                    params.at("m2").get<double>(), param_vec(params, "v2"));
        }
        case TaskType::multi: {
            const Json& a = params.at("A");
            const Json& b = params.at("B");
            const Json& c = params.at("C");
            const KinematicAnswer lin = engine_linear(param_vec(a, "v0"), param_vec(a, "a"),
                                                      a.at("t").get<double>(), cfg);
            const Vec3 circ = engine_circular_position(b.at("radius").get<double>(),
                                                       b.at("omega").get<double>(),
                                                       b.at("t").get<double>(), cfg);
            WorldState cw;
            ObjectState cobj;
            cobj.id = "objectC";
            cobj.velocity = param_vec(c, "v0");
            cobj.acceleration = Vec3(0.0, 0.0, -cfg.gravity);
            cw.objects.push_back(cobj);
            const WorldState cfinal = simulate_interval(cw, c.at("t").get<double>(), cfg).first;
            KinematicAnswer answer;
            answer.set("x_A", *lin.find("displacement_x"));
            answer.set("y_A", *lin.find("displacement_y"));
            answer.set("z_A", *lin.find("displacement_z"));
            answer.set("x_B", AnswerValue::num(circ.x()));
            answer.set("y_B", AnswerValue::num(circ.y()));
            answer.set("z_B", AnswerValue::num(circ.z()));
            answer.set("x_C", AnswerValue::num(cfinal.objects.front().position.x()));
            answer.set("y_C", AnswerValue::num(cfinal.objects.front().position.y()));
            answer.set("z_C", AnswerValue::any());
            return answer;
        }
    }
    throw std::logic_error("unknown TaskType");
}

std::string schema_text(const Problem& problem) {
    const auto& names = problem.schema_fields;
    switch (problem.task_type) {
        case TaskType::linear:
        case TaskType::circular:
        case TaskType::projectile: return flat_schema(names, 0, names.size());
        case TaskType::collision:
            return "{'will_collide': 'bool', 'velocity_1': " + flat_schema(names, 1, 4) +
                   ", 'velocity_2': " + flat_schema(names, 4, 7) + "}";
        case TaskType::multi:
            return "{'pos_A': " + flat_schema(names, 0, 3) + ", 'pos_B': " +
                   flat_schema(names, 3, 6) + ", 'pos_C': " + flat_schema(names, 6, 9) + "}";
    }
    throw std::logic_error("unknown TaskType");
}

Json answer_to_json(const Problem& problem, const KinematicAnswer& answer) {
    auto value_json = [](const AnswerValue& v) -> Json {
        switch (v.kind) {
            case AnswerValue::Kind::number: return v.number;
            case AnswerValue::Kind::boolean: return v.flag;
            case AnswerValue::Kind::any: return "any";
        }
        throw std::logic_error("unknown AnswerValue kind");
    };
    auto field = [&](const char* name) -> Json {
        const AnswerValue* v = answer.find(name);
        if (v == nullptr) throw InvalidInputError(std::string("answer lacks field ") + name);
        return value_json(*v);
    };

    switch (problem.task_type) {
        case TaskType::linear:
        case TaskType::circular:
        case TaskType::projectile: {
            Json out;
            for (const auto& name : problem.schema_fields) out[name] = field(name.c_str());
            return out;
        }
        case TaskType::collision: {
            Json out;
            out["will_collide"] = field("will_collide");
            out["velocity_1"] = {{"vel_1_x", field("vel_1_x")},
                                 {"vel_1_y", field("vel_1_y")},
                                 {"vel_1_z", field("vel_1_z")}};
            out["velocity_2"] = {{"vel_2_x", field("vel_2_x")},
                                 {"vel_2_y", field("vel_2_y")},
                                 {"vel_2_z", field("vel_2_z")}};
            return out;
        }
        case TaskType::multi: {
            Json out;
            out["pos_A"] = {{"x_A", field("x_A")}, {"y_A", field("y_A")}, {"z_A", field("z_A")}};
            out["pos_B"] = {{"x_B", field("x_B")}, {"y_B", field("y_B")}, {"z_B", field("z_B")}};
            out["pos_C"] = {{"x_C", field("x_C")}, {"y_C", field("y_C")}, {"z_C", field("z_C")}};
            return out;
        }
    }
    throw std::logic_error("unknown TaskType");
}

std::string response_text(const Problem& problem, const KinematicAnswer& answer) {
    Json doc;
    doc["reasoning"] = "deterministic engine computation";
    doc["answer"] = answer_to_json(problem, answer);
    return doc.dump(2);
}

std::map<std::string, std::string> parse_answer_json(const std::string& text) {
    std::map<std::string, std::string> out;
    Json doc;
    try {
        doc = Json::parse(strip_markdown_fences(text));
    } catch (const Json::parse_error&) {
        return out;
    }
    if (!doc.is_object()) return out;
    if (doc.contains("answer")) {
        const Json& answer = doc["answer"];
        if (answer.is_object()) {
            flatten_into(answer, out);
            return out;
        }
        if (answer.is_string()) {
            try {
                const Json inner = Json::parse(answer.get<std::string>());
                if (inner.is_object()) flatten_into(inner, out);
            } catch (const Json::parse_error&) {
            }
            return out;
        }
        return out;
    }
    flatten_into(doc, out);
    out.erase("reasoning");
    return out;
}

GradeRecord grade_response(const std::map<std::string, std::string>& fields,
                           const KinematicAnswer& key, double tolerance) {
    if (!(tolerance > 0.0)) throw InvalidInputError("tolerance must be positive");
    GradeRecord record;

    // unit tag: trailing _A/_B/_C groups multi-object fields per object
    auto unit_tag = [](const std::string& name) -> std::string {
        if (name.size() >= 2 && name[name.size() - 2] == '_') {
            const char c = name.back();
            if (c == 'A' || c == 'B' || c == 'C') return std::string(1, c);
        }
        return "";
    };

    std::vector<std::string> unit_order;
    std::map<std::string, bool> unit_passed;
    for (const auto& [name, truth] : key.fields) {
        FieldGrade grade;
        grade.name = name;
        const std::string tag = unit_tag(name);
        if (unit_passed.find(tag) == unit_passed.end()) {
            unit_order.push_back(tag);
            unit_passed[tag] = true;
        }
        if (truth.kind == AnswerValue::Kind::any) {
            grade.any = true;
            grade.passed = true;
            record.fields.push_back(grade);
            continue;
        }
        grade.truth = truth.number;
        const auto it = fields.find(name);
        if (it != fields.end()) {
            double value = 0.0;
            const bool ok = truth.kind == AnswerValue::Kind::boolean
                                ? parse_boolean(it->second, value)
                                : parse_number(it->second, value);
            if (ok) {
                grade.parseable = true;
                grade.value = value;
                grade.squared_error = (value - grade.truth) * (value - grade.truth);
                grade.passed = truth.kind == AnswerValue::Kind::boolean
                                   ? value == grade.truth
                                   : std::abs(value - grade.truth) <=
                                         std::max(tolerance * std::abs(grade.truth), tolerance);
            }
        }
        if (!grade.passed) unit_passed[unit_tag(name)] = false;
        record.fields.push_back(grade);
    }

    record.units_total = static_cast<int>(unit_order.size());
    record.units_correct = 0;
    for (const auto& tag : unit_order) {
        if (unit_passed[tag]) ++record.units_correct;
    }
    record.fully_correct = record.units_correct == record.units_total;
    return record;
}

SuiteMetrics aggregate_suite(const std::vector<GradeRecord>& records) {
    if (records.empty()) throw InvalidInputError("no grade records to aggregate");
    SuiteMetrics metrics;
    metrics.problems = static_cast<int>(records.size());
    long long units_total = 0;
    long long units_correct = 0;
    double squared_sum = 0.0;
    long long squared_count = 0;
    double validity_sum = 0.0;
    for (const auto& r : records) {
        units_total += r.units_total;
        units_correct += r.units_correct;
        metrics.mean_duration_s += r.duration_s;
        long long graded = 0;
        long long parseable = 0;
        for (const auto& f : r.fields) {
            if (f.any) continue;
            ++graded;
            if (f.parseable) {
                ++parseable;
                squared_sum += f.squared_error;
                ++squared_count;
            }
        }
        validity_sum += graded > 0
                            ? static_cast<double>(parseable) / static_cast<double>(graded)
                            : 1.0;
    }
    metrics.units = static_cast<int>(units_total);
    metrics.accuracy_pct =
        units_total > 0 ? 100.0 * static_cast<double>(units_correct) / static_cast<double>(units_total)
                        : 0.0;
    metrics.mse = squared_count > 0 ? squared_sum / static_cast<double>(squared_count) : 0.0;
    metrics.validity_pct = 100.0 * validity_sum / static_cast<double>(metrics.problems);
    metrics.mean_duration_s /= static_cast<double>(metrics.problems);
    return metrics;
}

Json to_json(const Problem& problem) {
    return Json{{"index", problem.index},
                {"task_type", to_string(problem.task_type)},
                {"parameters", problem.parameters},
                {"question", problem.question_text},
                {"schema_fields", problem.schema_fields}};
}

Problem problem_from_json(const Json& j) {
    Problem p;
    p.index = j.at("index").get<int>();
    p.task_type = task_type_from_string(j.at("task_type").get<std::string>());
    p.parameters = j.at("parameters");
    p.question_text = j.at("question").get<std::string>();
    p.schema_fields = j.at("schema_fields").get<std::vector<std::string>>();
    return p;
}

Json to_json(const GradeRecord& record) {
    Json fields = Json::array();
    for (const auto& f : record.fields) {
        fields.push_back({{"name", f.name},
                          {"any", f.any},
                          {"parseable", f.parseable},
                          {"passed", f.passed},
                          {"value", f.value},
                          {"truth", f.truth},
                          {"squared_error", f.squared_error}});
    }
    return Json{{"fields", fields},
                {"units_total", record.units_total},
                {"units_correct", record.units_correct},
                {"fully_correct", record.fully_correct},
                {"duration_wallclock", record.duration_s}};
}

}  // namespace apex
