#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "apex/scene_graph.hpp"

namespace apex {

struct SalienceScore {
    EdgeKey pair;
    double score = 0.0;  // in [0, 1]
};

/// External scoring hook; must return a value that clamps sensibly to [0, 1].
using EdgeScorer = std::function<double(const DiffEdge&, const WorldState&)>;

enum class ScorerKind { analytic_ttc, pluggable };

struct SalienceConfig {
    int k = 2;                                  // edges kept by select_top_k, >= 1
    ScorerKind scorer = ScorerKind::analytic_ttc;
    double epsilon_floor = 0.1;                 // receding-pair score numerator
    EdgeScorer custom;                          // required when scorer == pluggable
};

struct SummaryEntry {
    EdgeKey pair;
    double closest_approach_time = 0.0;  // seconds from now, 0 for non-approaching pairs
    double min_distance = 0.0;           // center distance at closest approach, meters
    bool approaching = false;
};

struct SceneSummary {
    std::string text;  // one sentence per selected edge, newline separated
    std::vector<SummaryEntry> entries;
};

/**
 * Time to closest approach for relative state (dp, dv):
 * t* = -dot(dp, dv) / |dv|^2, or +infinity when the pair is not approaching
 * (|dv| = 0, or the formula lands in the past).
 */
double time_to_closest_approach(const Vec3& dp, const Vec3& dv);

/**
 * Scores every diff edge from the current world state.
 *
 * Analytic scorer: approaching pairs get 1/(1 + t*); everything else gets
 * epsilon_floor/(1 + current distance). Results are clamped to [0, 1].
 * Scores scale monotonically with urgency, so any positive rescaling of a
 * score vector preserves the top-k set.
 */
std::vector<SalienceScore> score_edges(const DiffGraph& diff, const WorldState& world,
                                       const SalienceConfig& cfg);

/// Top k by score (descending); ties break lexicographically on the pair.
/// k >= |scores| returns everything, still sorted.
std::vector<SalienceScore> select_top_k(std::vector<SalienceScore> scores, int k);

/**
 * Renders the selected edges as deterministic natural-language sentences plus
 * structured closest-approach records. When agent_id names one end of a pair,
 * that end is labeled "agent <id>" and the other object leads the sentence.
 * An empty selection yields "No salient interactions detected."
 */
SceneSummary summarize(const std::vector<SalienceScore>& selected, const WorldState& world,
                       const std::optional<std::string>& agent_id = std::nullopt);

}  // namespace apex
