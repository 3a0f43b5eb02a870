#include "apex/scene_graph.hpp"

#include <algorithm>
#include <set>

#include "apex/error.hpp"

namespace apex {

EdgeKey make_edge_key(const std::string& a, const std::string& b) {
    return a < b ? EdgeKey{a, b} : EdgeKey{b, a};
}

const SceneEdge* SceneGraph::find(const EdgeKey& key) const {
    for (const auto& e : edges) {
        if (e.pair == key) return &e;
    }
    return nullptr;
}

const DiffEdge* DiffGraph::find(const EdgeKey& key) const {
    for (const auto& e : edges) {
        if (e.pair == key) return &e;
    }
    return nullptr;
}

SceneGraph build_scene_graph(const WorldState& world) {
    validate(world);
    SceneGraph graph;
    graph.timestamp = world.timestamp;
    for (const auto& obj : world.objects) graph.nodes.push_back(obj.id);
    const auto& objs = world.objects;
    for (std::size_t i = 0; i < objs.size(); ++i) {
        for (std::size_t j = i + 1; j < objs.size(); ++j) {
            SceneEdge edge;
            edge.pair = make_edge_key(objs[i].id, objs[j].id);
            edge.distance = center_distance(objs[i], objs[j]);
            edge.relative_speed = (objs[i].velocity - objs[j].velocity).norm();
            graph.edges.push_back(edge);
        }
    }
    std::sort(graph.edges.begin(), graph.edges.end(),
              [](const SceneEdge& a, const SceneEdge& b) { return a.pair < b.pair; });
    return graph;
}

DiffGraph diff_graph(const SceneGraph& g_prev, const SceneGraph& g_next) {
    const std::set<std::string> prev_nodes(g_prev.nodes.begin(), g_prev.nodes.end());
    const std::set<std::string> next_nodes(g_next.nodes.begin(), g_next.nodes.end());
    if (prev_nodes != next_nodes) {
        throw InvalidInputError("diff_graph: node sets differ between snapshots");
    }
    if (!(g_next.timestamp > g_prev.timestamp)) {
        throw InvalidInputError("diff_graph: snapshots must be strictly time-ordered");
    }

    DiffGraph diff;
    diff.dt_obs = g_next.timestamp - g_prev.timestamp;
    for (const auto& next_edge : g_next.edges) {
        DiffEdge edge;
        edge.pair = next_edge.pair;
        if (const SceneEdge* prev_edge = g_prev.find(next_edge.pair)) {
            edge.distance_delta = next_edge.distance - prev_edge->distance;
            edge.relative_velocity = edge.distance_delta / diff.dt_obs;
            edge.approaching = edge.distance_delta < 0.0;
        } else {
            edge.appeared = true;
        }
        diff.edges.push_back(edge);
    }
    for (const auto& prev_edge : g_prev.edges) {
        if (g_next.find(prev_edge.pair) == nullptr) {
            DiffEdge edge;
            edge.pair = prev_edge.pair;
            edge.vanished = true;
            diff.edges.push_back(edge);
        }
    }
    std::sort(diff.edges.begin(), diff.edges.end(),
              [](const DiffEdge& a, const DiffEdge& b) { return a.pair < b.pair; });
    return diff;
}

}  // namespace apex
