#include "apex/physics.hpp"

#include <cmath>

#include "apex/error.hpp"

namespace apex {

namespace {

constexpr double kContactTolerance = 1e-9;  // meters
constexpr double kDegenerateDistance = 1e-12;

std::optional<SimEvent> check_stop(const WorldState& world, StopCondition stop) {
    if (stop == StopCondition::ground_hit) {
        for (const auto& obj : world.objects) {
            if (obj.position.z() < 0.0) {
                SimEvent ev;
                ev.kind = SimEvent::Kind::ground_hit;
                ev.time = world.timestamp;
                ev.object_a = obj.id;
                return ev;
            }
        }
    } else if (stop == StopCondition::first_contact) {
        const auto& objs = world.objects;
        for (std::size_t i = 0; i < objs.size(); ++i) {
            for (std::size_t j = i + 1; j < objs.size(); ++j) {
                if (center_distance(objs[i], objs[j]) <= objs[i].radius + objs[j].radius) {
                    SimEvent ev;
                    ev.kind = SimEvent::Kind::contact;
                    ev.time = world.timestamp;
                    ev.object_a = objs[i].id;
                    ev.object_b = objs[j].id;
                    return ev;
                }
            }
        }
    }
    return std::nullopt;
}

void resolve_contacts(WorldState& world) {
    auto& objs = world.objects;
    for (std::size_t i = 0; i < objs.size(); ++i) {
        for (std::size_t j = i + 1; j < objs.size(); ++j) {
            const Vec3 dp = objs[j].position - objs[i].position;
            const double dist = dp.norm();
            if (dist > objs[i].radius + objs[j].radius || dist <= kDegenerateDistance) continue;
            // only closing pairs bounce; separating overlaps are left to drift apart
            const Vec3 n = dp / dist;
            if ((objs[j].velocity - objs[i].velocity).dot(n) >= 0.0) continue;
            auto [v1, v2] = resolve_elastic_normal(objs[i], objs[j]);
            objs[i].velocity = v1;
            objs[j].velocity = v2;
        }
    }
}

}  // namespace

void validate(const SimConfig& cfg) {
    if (!(cfg.dt > 0.0) || !(cfg.dt <= 0.1) || !std::isfinite(cfg.dt)) {
        throw ConfigError("dt out of range (0, 0.1]: " + std::to_string(cfg.dt));
    }
    if (!(cfg.gravity >= 0.0) || !std::isfinite(cfg.gravity)) {
        throw ConfigError("gravity must be finite and >= 0");
    }
    if (cfg.max_steps <= 0) {
        throw ConfigError("max_steps must be positive");
    }
}

WorldState euler_step(const WorldState& world, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidInputError("euler_step: dt must be positive and finite");
    }
    WorldState next = world;
    next.timestamp += dt;
    for (auto& obj : next.objects) {
        obj.position += obj.velocity * dt;
        obj.velocity += obj.acceleration * dt;
    }
    return next;
}

std::pair<WorldState, SimEvent> simulate_interval(const WorldState& world, double duration,
                                                  const SimConfig& cfg, StopCondition stop) {
    if (!(duration >= 0.0) || !std::isfinite(duration)) {
        throw InvalidInputError("simulate_interval: duration must be finite and >= 0");
    }
    WorldState state = world;
    if (duration == 0.0) return {state, SimEvent{}};

    const double raw = duration / cfg.dt;
    long long steps = static_cast<long long>(std::llround(raw));
    bool partial = false;
    if (std::abs(raw - static_cast<double>(steps)) > 1e-9 || steps == 0) {
        steps = static_cast<long long>(std::ceil(raw - 1e-12));
        partial = true;
    }
    if (steps > cfg.max_steps) {
        throw BudgetError("simulate_interval: " + std::to_string(steps) + " steps exceed budget " +
                          std::to_string(cfg.max_steps));
    }

    if (auto ev = check_stop(state, stop)) return {state, *ev};
    for (long long i = 1; i <= steps; ++i) {
        double h = cfg.dt;
        if (partial && i == steps) {
            h = duration - static_cast<double>(steps - 1) * cfg.dt;
            if (h <= 0.0) break;
        }
        state = euler_step(state, h);
        if (stop == StopCondition::none) {
            resolve_contacts(state);
        } else if (auto ev = check_stop(state, stop)) {
            return {state, *ev};
        }
    }
    return {state, SimEvent{}};
}

const AnswerValue* KinematicAnswer::find(const std::string& name) const {
    for (const auto& [key, value] : fields) {
        if (key == name) return &value;
    }
    return nullptr;
}

KinematicAnswer linear_closed_form(const Vec3& v0, const Vec3& a, double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw InvalidInputError("linear_closed_form: t must be finite and >= 0");
    }
    const Vec3 v = v0 + a * t;
    const Vec3 d = v0 * t + 0.5 * a * t * t;
    KinematicAnswer ans;
    ans.set("velocity_x", AnswerValue::num(v.x()));
    ans.set("velocity_y", AnswerValue::num(v.y()));
    ans.set("velocity_z", AnswerValue::num(v.z()));
    ans.set("displacement_x", AnswerValue::num(d.x()));
    ans.set("displacement_y", AnswerValue::num(d.y()));
    ans.set("displacement_z", AnswerValue::num(d.z()));
    return ans;
}

KinematicAnswer circular_closed_form(double radius, double omega, double t) {
    if (!(radius > 0.0)) throw InvalidInputError("circular_closed_form: radius must be > 0");
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw InvalidInputError("circular_closed_form: t must be finite and >= 0");
    }
    const double theta = omega * t;
    KinematicAnswer ans;
    ans.set("x_B", AnswerValue::num(radius * std::cos(theta)));
    ans.set("y_B", AnswerValue::num(radius * std::sin(theta)));
    ans.set("z_B", AnswerValue::num(0.0));
    return ans;
}

KinematicAnswer projectile_closed_form(const Vec3& v0, double gravity) {
    if (!(v0.z() > 0.0)) {
        throw InvalidInputError("projectile_closed_form: v0.z must be > 0");
    }
    if (!(gravity > 0.0)) {
        throw InvalidInputError("projectile_closed_form: gravity must be > 0");
    }
    const double flight = 2.0 * v0.z() / gravity;
    KinematicAnswer ans;
    ans.set("flight_time", AnswerValue::num(flight));
    ans.set("maximum_height", AnswerValue::num(v0.z() * v0.z() / (2.0 * gravity)));
    ans.set("range_x", AnswerValue::num(v0.x() * flight));
    ans.set("range_y", AnswerValue::num(v0.y() * flight));
    ans.set("range_z", AnswerValue::any());
    return ans;
}

CollisionReport predict_sphere_collision(const ObjectState& a, const ObjectState& b) {
    CollisionReport report;
    const Vec3 dp = b.position - a.position;
    const Vec3 dv = b.velocity - a.velocity;
    const double contact_r = a.radius + b.radius;

    if (dp.squaredNorm() <= contact_r * contact_r) {
        report.will_collide = true;
        report.time_of_impact = 0.0;
        return report;
    }
    const double qa = dv.squaredNorm();
    if (qa == 0.0) return report;
    const double qb = 2.0 * dp.dot(dv);
    if (qb >= 0.0) return report;  // not approaching
    const double qc = dp.squaredNorm() - contact_r * contact_r;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) return report;  // closest approach stays outside contact
    const double t = (-qb - std::sqrt(disc)) / (2.0 * qa);
    if (t < 0.0) return report;
    report.will_collide = true;
    report.time_of_impact = t;
    return report;
}

std::pair<Vec3, Vec3> resolve_elastic_componentwise(double m1, const Vec3& v1, double m2,
                                                    const Vec3& v2) {
    if (!(m1 > 0.0) || !(m2 > 0.0)) {
        throw InvalidInputError("resolve_elastic_componentwise: masses must be > 0");
    }
    const double sum = m1 + m2;
    const Vec3 v1p = ((m1 - m2) * v1 + 2.0 * m2 * v2) / sum;
    const Vec3 v2p = ((m2 - m1) * v2 + 2.0 * m1 * v1) / sum;
    return {v1p, v2p};
}

std::pair<Vec3, Vec3> resolve_elastic_normal(const ObjectState& a, const ObjectState& b) {
    const Vec3 dp = b.position - a.position;
    const double dist = dp.norm();
    if (dist <= kDegenerateDistance) {
        throw InvalidInputError("resolve_elastic_normal: coincident centers");
    }
    if (dist > a.radius + b.radius + kContactTolerance) {
        throw InvalidInputError("resolve_elastic_normal: objects are not in contact");
    }
    const Vec3 n = dp / dist;
    const double v1n = a.velocity.dot(n);
    const double v2n = b.velocity.dot(n);
    const double sum = a.mass + b.mass;
    const double v1n_post = ((a.mass - b.mass) * v1n + 2.0 * b.mass * v2n) / sum;
    const double v2n_post = ((b.mass - a.mass) * v2n + 2.0 * a.mass * v1n) / sum;
    return {a.velocity + (v1n_post - v1n) * n, b.velocity + (v2n_post - v2n) * n};
}

}  // namespace apex
