#pragma once

#include <string>
#include <vector>

#include "apex/vec.hpp"

namespace apex {

enum class ObjectKind { agent, obstacle, projectile, generic };

const char* to_string(ObjectKind kind);
ObjectKind object_kind_from_string(const std::string& s);

/// One rigid body. Spheres only; radius 0 means a point mass.
struct ObjectState {
    std::string id;
    ObjectKind kind = ObjectKind::generic;
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    Vec3 acceleration = Vec3::Zero();
    double radius = 0.0;  // meters, >= 0
    double mass = 1.0;    // kilograms, > 0
};

/// Snapshot of every object at one instant. Object order is stable and
/// meaningful: downstream consumers (prompts, result files) preserve it.
struct WorldState {
    double timestamp = 0.0;  // seconds
    std::vector<ObjectState> objects;

    const ObjectState* find(const std::string& id) const;
    ObjectState* find(const std::string& id);
};

/// Throws InvalidInputError on duplicate/empty ids, non-finite numbers,
/// negative radius, or non-positive mass.
void validate(const WorldState& world);

Json to_json(const ObjectState& obj);
Json to_json(const WorldState& world);
ObjectState object_from_json(const Json& j);
WorldState world_from_json(const Json& j);

/// Center-to-center distance.
double center_distance(const ObjectState& a, const ObjectState& b);

/// Surface-to-surface clearance; negative while overlapping.
double clearance(const ObjectState& a, const ObjectState& b);

}  // namespace apex
