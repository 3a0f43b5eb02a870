#pragma once

#include <string>
#include <utility>
#include <vector>

#include "apex/world.hpp"

namespace apex {

/// Unordered object pair, stored lexicographically (first < second).
using EdgeKey = std::pair<std::string, std::string>;

EdgeKey make_edge_key(const std::string& a, const std::string& b);

struct SceneEdge {
    EdgeKey pair;
    double distance = 0.0;        // center-to-center, meters
    double relative_speed = 0.0;  // |v_i - v_j|, m/s
};

/// Complete relational graph over one world snapshot.
struct SceneGraph {
    double timestamp = 0.0;
    std::vector<std::string> nodes;  // object ids, world order
    std::vector<SceneEdge> edges;    // all unordered pairs, key-sorted

    const SceneEdge* find(const EdgeKey& key) const;
};

struct DiffEdge {
    EdgeKey pair;
    double distance_delta = 0.0;     // dist(next) - dist(prev), meters
    double relative_velocity = 0.0;  // distance_delta / dt_obs, m/s
    bool approaching = false;        // distance shrank across the gap
    bool appeared = false;           // edge only in the newer graph
    bool vanished = false;           // edge only in the older graph
};

/// Edge-level difference between two snapshots of the same node set.
struct DiffGraph {
    double dt_obs = 0.0;  // observation gap, seconds, > 0
    std::vector<DiffEdge> edges;

    const DiffEdge* find(const EdgeKey& key) const;
};

/// Builds the complete pairwise graph for a validated world snapshot.
/// Throws InvalidInputError via validate() on duplicate ids or bad numbers.
SceneGraph build_scene_graph(const WorldState& world);

/// Differences g_next against g_prev.
/// Throws InvalidInputError when the node sets differ or when
/// g_next.timestamp <= g_prev.timestamp.
DiffGraph diff_graph(const SceneGraph& g_prev, const SceneGraph& g_next);

}  // namespace apex
