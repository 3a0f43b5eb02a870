#include "apex/salience.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "apex/error.hpp"

namespace apex {

namespace {

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

std::string format2(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", x);
    return buf;
}

const ObjectState& must_find(const WorldState& world, const std::string& id) {
    const ObjectState* obj = world.find(id);
    if (obj == nullptr) throw InvalidInputError("salience: object not in world: " + id);
    return *obj;
}

}  // namespace

double time_to_closest_approach(const Vec3& dp, const Vec3& dv) {
    const double dv2 = dv.squaredNorm();
    if (dv2 == 0.0) return std::numeric_limits<double>::infinity();
    const double t = -dp.dot(dv) / dv2;
    if (t < 0.0) return std::numeric_limits<double>::infinity();
    return t;
}

std::vector<SalienceScore> score_edges(const DiffGraph& diff, const WorldState& world,
                                       const SalienceConfig& cfg) {
    if (cfg.scorer == ScorerKind::pluggable && !cfg.custom) {
        throw InvalidInputError("salience: pluggable scorer selected but no scorer installed");
    }
    std::vector<SalienceScore> scores;
    scores.reserve(diff.edges.size());
    for (const auto& edge : diff.edges) {
        SalienceScore s;
        s.pair = edge.pair;
        if (cfg.scorer == ScorerKind::pluggable) {
            s.score = clamp01(cfg.custom(edge, world));
        } else {
            const ObjectState& a = must_find(world, edge.pair.first);
            const ObjectState& b = must_find(world, edge.pair.second);
            const Vec3 dp = b.position - a.position;
            const Vec3 dv = b.velocity - a.velocity;
            const double t_star = time_to_closest_approach(dp, dv);
            if (std::isfinite(t_star) && dp.dot(dv) < 0.0) {
                s.score = clamp01(1.0 / (1.0 + t_star));
            } else {
                s.score = clamp01(cfg.epsilon_floor / (1.0 + dp.norm()));
            }
        }
        scores.push_back(s);
    }
    return scores;
}

std::vector<SalienceScore> select_top_k(std::vector<SalienceScore> scores, int k) {
    if (k < 1) throw InvalidInputError("select_top_k: k must be >= 1");
    std::sort(scores.begin(), scores.end(), [](const SalienceScore& a, const SalienceScore& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.pair < b.pair;
    });
    if (static_cast<std::size_t>(k) < scores.size()) scores.resize(static_cast<std::size_t>(k));
    return scores;
}

SceneSummary summarize(const std::vector<SalienceScore>& selected, const WorldState& world,
                       const std::optional<std::string>& agent_id) {
    SceneSummary summary;
    if (selected.empty()) {
        summary.text = "No salient interactions detected.";
        return summary;
    }

    auto label = [&](const std::string& id) {
        return (agent_id && *agent_id == id) ? "agent " + id : "object " + id;
    };

    std::vector<std::string> sentences;
    for (const auto& sel : selected) {
        const ObjectState& a = must_find(world, sel.pair.first);
        const ObjectState& b = must_find(world, sel.pair.second);
        const Vec3 dp = b.position - a.position;
        const Vec3 dv = b.velocity - a.velocity;
        const double t_star = time_to_closest_approach(dp, dv);

        SummaryEntry entry;
        entry.pair = sel.pair;
        entry.approaching = std::isfinite(t_star) && dp.dot(dv) < 0.0;
        entry.closest_approach_time = entry.approaching ? t_star : 0.0;
        entry.min_distance = (dp + entry.closest_approach_time * dv).norm();
        summary.entries.push_back(entry);

        // the agent, when present, is mentioned second so sentences read as
        // "Object obs3 is on a collision course with agent robot: ..."
        std::string first = sel.pair.first;
        std::string second = sel.pair.second;
        if (agent_id && *agent_id == first) std::swap(first, second);

        std::string sentence;
        if (entry.approaching) {
            sentence = label(first) + " is on a collision course with " + label(second) +
                       ": closest approach " + format2(entry.min_distance) + " m in " +
                       format2(entry.closest_approach_time) + " s.";
        } else {
            sentence = label(first) + " and " + label(second) + " are moving apart: closest approach " +
                       format2(entry.min_distance) + " m in " +
                       format2(entry.closest_approach_time) + " s.";
        }
        sentence[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(sentence[0])));
        sentences.push_back(sentence);
    }
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (i > 0) summary.text += "\n";
        summary.text += sentences[i];
    }
    return summary;
}

}  // namespace apex
