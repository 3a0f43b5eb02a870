#include "apex/world.hpp"

#include <cmath>
#include <unordered_set>

#include "apex/error.hpp"

namespace apex {

const char* to_string(ObjectKind kind) {
    switch (kind) {
        case ObjectKind::agent: return "agent";
        case ObjectKind::obstacle: return "obstacle";
        case ObjectKind::projectile: return "projectile";
        case ObjectKind::generic: return "generic";
    }
    return "generic";
}

ObjectKind object_kind_from_string(const std::string& s) {
    if (s == "agent") return ObjectKind::agent;
    if (s == "obstacle") return ObjectKind::obstacle;
    if (s == "projectile") return ObjectKind::projectile;
    if (s == "generic") return ObjectKind::generic;
    throw InvalidInputError("unknown object kind: " + s);
}

const ObjectState* WorldState::find(const std::string& id) const {
    for (const auto& obj : objects) {
        if (obj.id == id) return &obj;
    }
    return nullptr;
}

ObjectState* WorldState::find(const std::string& id) {
    for (auto& obj : objects) {
        if (obj.id == id) return &obj;
    }
    return nullptr;
}

void validate(const WorldState& world) {
    if (!std::isfinite(world.timestamp)) {
        throw InvalidInputError("world timestamp is not finite");
    }
    std::unordered_set<std::string> seen;
    for (const auto& obj : world.objects) {
        if (obj.id.empty()) throw InvalidInputError("object with empty id");
        if (!seen.insert(obj.id).second) {
            throw InvalidInputError("duplicate object id: " + obj.id);
        }
        if (!is_finite(obj.position) || !is_finite(obj.velocity) || !is_finite(obj.acceleration)) {
            throw InvalidInputError("non-finite state for object " + obj.id);
        }
        if (!(obj.radius >= 0.0) || !std::isfinite(obj.radius)) {
            throw InvalidInputError("negative or non-finite radius for object " + obj.id);
        }
        if (!(obj.mass > 0.0) || !std::isfinite(obj.mass)) {
            throw InvalidInputError("non-positive or non-finite mass for object " + obj.id);
        }
    }
}

Json to_json(const ObjectState& obj) {
    return Json{{"id", obj.id},
                {"kind", to_string(obj.kind)},
                {"position", vec3_to_json(obj.position)},
                {"velocity", vec3_to_json(obj.velocity)},
                {"acceleration", vec3_to_json(obj.acceleration)},
                {"radius", obj.radius},
                {"mass", obj.mass}};
}

Json to_json(const WorldState& world) {
    Json objs = Json::array();
    for (const auto& obj : world.objects) objs.push_back(to_json(obj));
    return Json{{"timestamp", world.timestamp}, {"objects", objs}};
}

ObjectState object_from_json(const Json& j) {
    ObjectState obj;
    obj.id = j.at("id").get<std::string>();
    obj.kind = object_kind_from_string(j.at("kind").get<std::string>());
    obj.position = vec3_from_json(j.at("position"));
    obj.velocity = vec3_from_json(j.at("velocity"));
    obj.acceleration = vec3_from_json(j.at("acceleration"));
    obj.radius = j.at("radius").get<double>();
    obj.mass = j.at("mass").get<double>();
    return obj;
}

WorldState world_from_json(const Json& j) {
    WorldState world;
    world.timestamp = j.at("timestamp").get<double>();
    for (const auto& item : j.at("objects")) world.objects.push_back(object_from_json(item));
    validate(world);
    return world;
}

double center_distance(const ObjectState& a, const ObjectState& b) {
    return (a.position - b.position).norm();
}

double clearance(const ObjectState& a, const ObjectState& b) {
    return center_distance(a, b) - a.radius - b.radius;
}

}  // namespace apex
