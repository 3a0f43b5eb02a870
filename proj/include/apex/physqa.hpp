#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "apex/physics.hpp"

namespace apex {

enum class TaskType { linear, circular, projectile, collision, multi };

const char* to_string(TaskType type);
TaskType task_type_from_string(const std::string& name);
const std::vector<TaskType>& all_task_types();

/**
 * One generated question. Parameters hold the exact (already rounded) numbers
 * the question text shows, so text, oracle, and engine all see identical
 * inputs: velocities/accelerations/times at 2 decimals, collision positions
 * at 4 and velocities at 3.
 */
struct Problem {
    TaskType task_type = TaskType::linear;
    int index = 0;
    Json parameters;  // named numeric map; vectors as [x, y, z] arrays
    std::string question_text;
    std::vector<std::string> schema_fields;  // ordered leaf answer keys
};

/**
 * Seeded, reproducible generation. Ranges: velocity components [-25, 25],
 * acceleration [-3, 3], time [1, 10] s, radius [1, 5] m, omega [0.5, 5] rad/s,
 * masses [1, 10] kg, projectile v0z in (5, 25]; collision spheres have radius
 * 0.5 and instances alternate colliding/non-colliding for an exact split,
 * with colliding cases required to hit within 8 s at closest-approach
 * distance <= 0.8 of the contact sum (keeps stepped detection unambiguous).
 */
std::vector<Problem> generate_problems(TaskType type, int n, std::uint64_t seed);

/// Closed-form answer key. Non-colliding collision instances mark the final
/// velocities "any"; projectile range_z and multi z_C are "any" as well.
KinematicAnswer oracle_answer(const Problem& problem);

/// Same fields produced by stepping the forward-Euler engine at cfg.dt
/// (circular advances the phase by omega*dt per step; projectile integrates
/// until the first sample below ground; collision runs a 10 s first-contact
/// horizon).
KinematicAnswer engine_answer(const Problem& problem, const SimConfig& cfg);

/// Python-dict-style answer shape for the prompt's schema slot, e.g.
/// "{'x_B': 'float', 'y_B': 'float', 'z_B': 'float'}".
std::string schema_text(const Problem& problem);

/// Nested answer object in the family's published shape.
Json answer_to_json(const Problem& problem, const KinematicAnswer& answer);

/// Full response object (reasoning + nested answer), as a model would reply.
std::string response_text(const Problem& problem, const KinematicAnswer& answer);

/// Extracts the answer object (tolerating a fenced block and a wrapping
/// {"reasoning", "answer"} envelope) and flattens nesting to leaf-name ->
/// value-string. Unparseable text yields an empty map rather than throwing.
std::map<std::string, std::string> parse_answer_json(const std::string& text);

struct FieldGrade {
    std::string name;
    bool any = false;        // ungraded field, always passes
    bool parseable = false;  // value present and numeric/boolean
    bool passed = false;
    double value = 0.0;
    double truth = 0.0;
    double squared_error = 0.0;
};

/**
 * Per-problem grading result. Units partition the fields by trailing object
 * tag (_A/_B/_C) so multi-object problems grade per sub-object; single-object
 * families form one unit. fully_correct <=> every unit passed.
 */
struct GradeRecord {
    std::vector<FieldGrade> fields;
    int units_total = 1;
    int units_correct = 0;
    bool fully_correct = false;
    double duration_s = 0.0;  // engine wall time, not part of determinism checks
};

/// A field passes iff it parses to a finite number with
/// |value - truth| <= max(tolerance*|truth|, tolerance); booleans must match
/// exactly (true/false, "true"/"false", 1/0 all accepted). "any" fields
/// always pass and stay out of the validity and MSE denominators.
GradeRecord grade_response(const std::map<std::string, std::string>& fields,
                           const KinematicAnswer& key, double tolerance = 0.05);

struct SuiteMetrics {
    double accuracy_pct = 0.0;  // passed units / total units
    double mse = 0.0;           // pooled over parseable graded fields
    double validity_pct = 0.0;  // mean per-problem parseable fraction
    double mean_duration_s = 0.0;
    int problems = 0;
    int units = 0;
};

SuiteMetrics aggregate_suite(const std::vector<GradeRecord>& records);

Json to_json(const Problem& problem);
Problem problem_from_json(const Json& j);
Json to_json(const GradeRecord& record);

}  // namespace apex
