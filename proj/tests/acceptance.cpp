// Release gate: the ten acceptance criteria, each reported as one
// [PASS]/[FAIL] line with its measured numbers. Any red line makes the
// binary exit nonzero, which is what CTest keys on.
#include <unistd.h>

#include "apex/avoid.hpp"
#include "apex/decision.hpp"
#include "apex/error.hpp"
#include "apex/harness.hpp"
#include "apex/physics.hpp"
#include "apex/physqa.hpp"
#include "apex/prompt.hpp"
#include "apex/rng.hpp"
#include "apex/salience.hpp"
#include "apex/scene_graph.hpp"
#include "apex/tetris.hpp"

// after the Eigen-bearing headers: httplib drags in <resolv.h>, whose _res
// macro mangles Eigen internals when it lands first
#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

using namespace apex;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

// Accumulates clause failures so one criterion can report every violated
// bound at once instead of stopping at the first.
struct Gate {
    bool ok = true;
    std::string why;

    void expect(bool condition, const std::string& message) {
        if (condition) return;
        ok = false;
        if (!why.empty()) why += "; ";
        why += message;
    }
};

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
    return buf;
}

double field_number(const KinematicAnswer& answer, const char* name) {
    const AnswerValue* value = answer.find(name);
    if (value == nullptr || value->kind != AnswerValue::Kind::number) {
        throw InvalidInputError(std::string("missing numeric answer field ") + name);
    }
    return value->number;
}

// --- 1. golden closed-form ground truths --------------------------------

Verdict criterion_golden_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    Gate g;
    auto check = [&](const char* label, double got, double want) {
        g.expect(std::abs(got - want) <= 0.01,
                 std::string(label) + " got " + fmt(got, 6) + " want " + fmt(want, 6));
    };

    const KinematicAnswer lin = linear_closed_form({13.15, 1.48, 6.23}, {-2.77, 2.36, 1.77}, 9.03);
    check("linear velocity_x", field_number(lin, "velocity_x"), -11.8631);
    check("linear velocity_y", field_number(lin, "velocity_y"), 22.7908);
    check("linear velocity_z", field_number(lin, "velocity_z"), 22.2131);
    check("linear displacement_x", field_number(lin, "displacement_x"), 5.8103535);
    check("linear displacement_y", field_number(lin, "displacement_y"), 109.582662);
    check("linear displacement_z", field_number(lin, "displacement_z"), 128.4205965);

    const KinematicAnswer proj = projectile_closed_form({7.68, 18.83, 11.81});
    check("projectile flight_time", field_number(proj, "flight_time"), 2.40774720);
    check("projectile maximum_height", field_number(proj, "maximum_height"), 7.10887360);
    check("projectile range_x", field_number(proj, "range_x"), 18.49149847);
    check("projectile range_y", field_number(proj, "range_y"), 45.33787971);

    Problem multi;
    multi.task_type = TaskType::multi;
    multi.parameters =
        Json{{"A", Json{{"v0", Json::array({11.41, 1.01, 6.45})},
                        {"a", Json::array({-0.7, 0.8, 1.55})},
                        {"t", 5.18}}},
             {"B", Json{{"radius", 2.49}, {"omega", 3.51}, {"t", 5.95}}},
             {"C", Json{{"v0", Json::array({21.47, 12.09, 15.0})}, {"t", 6.57}}}};
    const KinematicAnswer combo = oracle_answer(multi);
    check("multi x_A", field_number(combo, "x_A"), 49.71246);
    check("multi y_A", field_number(combo, "y_A"), 15.96476);
    check("multi z_A", field_number(combo, "z_A"), 54.20611);
    check("multi x_C", field_number(combo, "x_C"), 141.0579);
    check("multi y_C", field_number(combo, "y_C"), 79.4313);

    const auto [v1, v2] = resolve_elastic_componentwise(8.4, {1.999, 1.779, 2.108}, 5.91,
                                                        {-1.273, -1.133, -1.342});
    check("collision v1_x", v1.x(), -0.70365828);
    check("collision v1_y", v1.y(), -0.62629979);
    check("collision v1_z", v1.z(), -0.74168553);
    check("collision v2_x", v2.x(), 2.56834172);
    check("collision v2_y", v2.y(), 2.28570021);
    check("collision v2_z", v2.z(), 2.70831447);

    const double elapsed = seconds_since(t0);
    g.expect(elapsed < 1.0, "runtime " + fmt(elapsed) + " s exceeds 1 s");
    if (g.ok) return {true, "23 reference fields within 0.01, " + fmt(elapsed, 3) + " s"};
    return {false, g.why};
}

// --- 2. integration-step accuracy trend ---------------------------------

Verdict criterion_dt_trend() {
    const auto t0 = std::chrono::steady_clock::now();
    constexpr double kSweep[] = {0.001, 0.005, 0.01};
    constexpr int kPerFamily = 25;
    constexpr std::uint64_t kSeed = 7;

    Gate g;
    std::ostringstream matrix;
    for (const TaskType type : all_task_types()) {
        const std::vector<Problem> problems = generate_problems(type, kPerFamily, kSeed);
        double acc[3] = {0.0, 0.0, 0.0};
        for (int di = 0; di < 3; ++di) {
            SimConfig sim;
            sim.dt = kSweep[di];
            std::vector<GradeRecord> grades;
            grades.reserve(problems.size());
            for (const Problem& problem : problems) {
                const KinematicAnswer key = oracle_answer(problem);
                const std::string response = response_text(problem, engine_answer(problem, sim));
                grades.push_back(grade_response(parse_answer_json(response), key));
            }
            acc[di] = aggregate_suite(grades).accuracy_pct;
        }
        matrix << (matrix.str().empty() ? "" : " | ") << to_string(type) << " " << fmt(acc[0], 1)
               << "/" << fmt(acc[1], 1) << "/" << fmt(acc[2], 1);

        switch (type) {
            case TaskType::linear:
            case TaskType::circular:
            case TaskType::collision:
                for (int di = 0; di < 3; ++di) {
                    g.expect(acc[di] >= 90.0, std::string(to_string(type)) + " dt=" +
                                                  fmt(kSweep[di], 3) + " accuracy " + fmt(acc[di]) +
                                                  " below 90");
                }
                break;
            case TaskType::projectile:
                g.expect(acc[0] >= 85.0,
                         "projectile dt=0.001 accuracy " + fmt(acc[0]) + " below 85");
                g.expect(acc[2] <= 60.0, "projectile dt=0.01 accuracy " + fmt(acc[2]) +
                                             " above the 60 ceiling (analytic stepping does not "
                                             "collapse at coarse dt)");
                break;
            case TaskType::multi: {
                const double want[3] = {97.33, 90.67, 80.00};
                for (int di = 0; di < 3; ++di) {
                    g.expect(std::abs(acc[di] - want[di]) <= 10.0,
                             "multi dt=" + fmt(kSweep[di], 3) + " accuracy " + fmt(acc[di]) +
                                 " outside " + fmt(want[di]) + " +- 10");
                }
                break;
            }
        }
    }

    const double elapsed = seconds_since(t0);
    g.expect(elapsed < 120.0, "runtime " + fmt(elapsed) + " s exceeds 2 min");
    const std::string measured = "accuracy@dt{0.001,0.005,0.01}: " + matrix.str() + ", " +
                                 fmt(elapsed, 1) + " s";
    if (g.ok) return {true, measured};
    return {false, g.why + " [" + measured + "]"};
}

// --- 3. oracle self-grading identity ------------------------------------

Verdict criterion_self_grading() {
    Gate g;
    int suites = 0;
    for (const TaskType type : all_task_types()) {
        for (const std::uint64_t seed : {1, 2, 3}) {
            const std::vector<Problem> problems = generate_problems(type, 25, seed);
            std::vector<GradeRecord> grades;
            for (const Problem& problem : problems) {
                const KinematicAnswer key = oracle_answer(problem);
                grades.push_back(grade_response(parse_answer_json(response_text(problem, key)), key));
            }
            const SuiteMetrics m = aggregate_suite(grades);
            const std::string tag =
                std::string(to_string(type)) + "/seed" + std::to_string(seed);
            g.expect(m.accuracy_pct == 100.0, tag + " accuracy " + fmt(m.accuracy_pct));
            g.expect(m.mse == 0.0, tag + " MSE " + fmt(m.mse, 12));
            g.expect(m.validity_pct == 100.0, tag + " validity " + fmt(m.validity_pct));
            ++suites;
        }
    }
    if (g.ok) {
        return {true, std::to_string(suites) +
                          " family/seed suites graded 100 accuracy, 0 MSE, 100 validity"};
    }
    return {false, g.why};
}

// --- 4. conservation under elastic resolution ---------------------------

Verdict criterion_conservation() {
    constexpr int kTrials = 10000;
    Rng rng(20260822);
    Gate g;
    double worst_momentum = 0.0;
    double worst_energy = 0.0;

    auto conservation = [&](double m1, const Vec3& v1, double m2, const Vec3& v2,
                            const Vec3& w1, const Vec3& w2) {
        const Vec3 p_before = m1 * v1 + m2 * v2;
        const Vec3 p_after = m1 * w1 + m2 * w2;
        const double ke_before = 0.5 * m1 * v1.squaredNorm() + 0.5 * m2 * v2.squaredNorm();
        const double ke_after = 0.5 * m1 * w1.squaredNorm() + 0.5 * m2 * w2.squaredNorm();
        const double p_err = (p_after - p_before).norm() / (1.0 + p_before.norm());
        const double ke_err = std::abs(ke_after - ke_before) / (1.0 + ke_before);
        worst_momentum = std::max(worst_momentum, p_err);
        worst_energy = std::max(worst_energy, ke_err);
    };
    auto random_vec = [&](double half) {
        return Vec3(rng.uniform(-half, half), rng.uniform(-half, half), rng.uniform(-half, half));
    };

    for (int i = 0; i < kTrials; ++i) {
        const double m1 = rng.uniform(1.0, 10.0);
        const double m2 = rng.uniform(1.0, 10.0);
        const Vec3 v1 = random_vec(25.0);
        const Vec3 v2 = random_vec(25.0);
        const auto [w1, w2] = resolve_elastic_componentwise(m1, v1, m2, v2);
        conservation(m1, v1, m2, v2, w1, w2);

        // normal-resolution trial: spheres placed exactly touching along a
        // random direction so the contact precondition holds
        ObjectState a;
        a.id = "a";
        a.mass = rng.uniform(1.0, 10.0);
        a.radius = rng.uniform(0.1, 1.0);
        a.velocity = random_vec(25.0);
        ObjectState b;
        b.id = "b";
        b.mass = rng.uniform(1.0, 10.0);
        b.radius = rng.uniform(0.1, 1.0);
        b.velocity = random_vec(25.0);
        const double z = rng.uniform(-1.0, 1.0);
        const double phi = rng.uniform(0.0, 2.0 * M_PI);
        const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
        const Vec3 dir(s * std::cos(phi), s * std::sin(phi), z);
        b.position = a.position + dir * (a.radius + b.radius);
        const auto [n1, n2] = resolve_elastic_normal(a, b);
        conservation(a.mass, a.velocity, b.mass, b.velocity, n1, n2);
    }

    g.expect(worst_momentum <= 1e-9,
             "momentum drift " + fmt(worst_momentum, 12) + " above 1e-9");
    g.expect(worst_energy <= 1e-6, "energy drift " + fmt(worst_energy, 9) + " above 1e-6");
    const std::string measured = std::to_string(kTrials) +
                                 " resolutions per resolver, max momentum drift " +
                                 fmt(worst_momentum, 12) + ", max energy drift " +
                                 fmt(worst_energy, 9);
    if (g.ok) return {true, measured};
    return {false, g.why};
}

// --- 5. collision predictor vs brute-force stepping ---------------------

Verdict criterion_predictor_vs_brute_force() {
    const auto t0 = std::chrono::steady_clock::now();
    constexpr int kScenes = 1000;
    constexpr double kStep = 1e-4;
    constexpr int kMaxSteps = 100000;  // 10 s horizon
    Rng rng(5);
    Gate g;

    int agreements = 0;
    int both_collide = 0;
    double worst_toi_error = 0.0;
    for (int scene = 0; scene < kScenes; ++scene) {
        ObjectState a;
        a.id = "a";
        a.radius = 0.5;
        ObjectState b;
        b.id = "b";
        b.radius = 0.5;
        do {
            for (ObjectState* obj : {&a, &b}) {
                obj->position = Vec3(rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0),
                                     rng.uniform(-3.0, 3.0));
                obj->velocity = Vec3(rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5),
                                     rng.uniform(-2.5, 2.5));
            }
        } while (center_distance(a, b) <= 1.2);  // start clearly separated

        const CollisionReport report = predict_sphere_collision(a, b);
        const bool predicted = report.will_collide && *report.time_of_impact <= kMaxSteps * kStep;

        // straight-line relative motion sampled every 0.1 ms, plain doubles
        // on purpose: independent of the engine under test
        const Vec3 d0 = b.position - a.position;
        const Vec3 dv = b.velocity - a.velocity;
        const double contact = a.radius + b.radius;
        const double contact2 = contact * contact;
        double stepped_toi = -1.0;
        const double d0x = d0.x(), d0y = d0.y(), d0z = d0.z();
        const double dvx = dv.x(), dvy = dv.y(), dvz = dv.z();
        for (int k = 1; k <= kMaxSteps; ++k) {
            const double t = k * kStep;
            const double x = d0x + dvx * t;
            const double y = d0y + dvy * t;
            const double z = d0z + dvz * t;
            if (x * x + y * y + z * z <= contact2) {
                stepped_toi = t;
                break;
            }
        }
        const bool stepped = stepped_toi >= 0.0;

        if (predicted == stepped) ++agreements;
        if (predicted && stepped) {
            ++both_collide;
            worst_toi_error =
                std::max(worst_toi_error, std::abs(*report.time_of_impact - stepped_toi));
        }
    }

    const double elapsed = seconds_since(t0);
    g.expect(agreements >= 990, "agreement " + std::to_string(agreements) + "/1000 below 990");
    g.expect(worst_toi_error <= 2e-4,
             "max impact-time error " + fmt(worst_toi_error, 6) + " above 2e-4");
    g.expect(elapsed < 60.0, "runtime " + fmt(elapsed) + " s exceeds 1 min");
    const std::string measured = "agreement " + std::to_string(agreements) + "/1000, " +
                                 std::to_string(both_collide) + " shared impacts, max TOI error " +
                                 fmt(worst_toi_error, 6) + " s, " + fmt(elapsed, 1) + " s";
    if (g.ok) return {true, measured};
    return {false, g.why};
}

// --- 6. tetris with the scripted decider --------------------------------

Verdict criterion_tetris() {
    Gate g;
    const std::vector<int> seeds = {1, 2, 3, 4, 5};

    BackendConfig scripted;
    scripted.kind = BackendKind::scripted;
    const auto backend = make_backend(scripted);
    std::vector<TetrisMetrics> metrics;
    for (const int seed : seeds) metrics.push_back(run_tetris_episode(*backend, seed).metrics);
    const TetrisAggregate agg = aggregate_tetris(metrics);
    g.expect(agg.mean_score >= 100.0, "mean score " + fmt(agg.mean_score) + " below 100");
    g.expect(agg.mean_max_height <= 8.0, "mean max height " + fmt(agg.mean_max_height) + " above 8");
    g.expect(agg.mean_holes <= 6.0, "mean holes " + fmt(agg.mean_holes) + " above 6");
    g.expect(agg.mean_bumpiness <= 10.0, "mean bumpiness " + fmt(agg.mean_bumpiness) + " above 10");

    BackendConfig always_down;
    always_down.kind = BackendKind::always_down;
    const auto baseline = make_backend(always_down);
    std::vector<TetrisMetrics> base_metrics;
    for (const int seed : seeds) {
        base_metrics.push_back(run_tetris_episode(*baseline, seed).metrics);
        g.expect(base_metrics.back().final_score == 0,
                 "always-down seed " + std::to_string(seed) + " scored " +
                     std::to_string(base_metrics.back().final_score));
    }
    const TetrisAggregate base = aggregate_tetris(base_metrics);
    g.expect(base.mean_max_height >= 12.0,
             "always-down mean max height " + fmt(base.mean_max_height) + " below 12");

    const std::string measured = "scripted score/height/holes/bumpiness " + fmt(agg.mean_score, 1) +
                                 "/" + fmt(agg.mean_max_height, 1) + "/" + fmt(agg.mean_holes, 1) +
                                 "/" + fmt(agg.mean_bumpiness, 1) + "; always-down score " +
                                 fmt(base.mean_score, 1) + " height " +
                                 fmt(base.mean_max_height, 1);
    if (g.ok) return {true, measured};
    return {false, g.why + " [" + measured + "]"};
}

// --- 7. avoidance with the scripted decider -----------------------------

Verdict criterion_avoid() {
    Gate g;
    BackendConfig scripted;
    scripted.kind = BackendKind::scripted;
    const auto backend = make_backend(scripted);

    std::ostringstream measured;
    for (const DifficultyLevel level :
         {DifficultyLevel::simple, DifficultyLevel::medium, DifficultyLevel::hard}) {
        const Difficulty difficulty = difficulty_table(level);
        std::vector<EpisodeRecord> records;
        for (int seed = 1; seed <= 5; ++seed) {
            records.push_back(run_avoid_episode(*backend, difficulty, seed));
        }
        const AvoidAggregate agg = aggregate_avoid(records);
        measured << (measured.str().empty() ? "" : " | ") << to_string(level) << " CFR "
                 << fmt(agg.cfr_pct, 1) << " AST " << fmt(agg.ast_s) << " IAR "
                 << fmt(agg.iar_pct, 1);
        g.expect(agg.iar_pct == 0.0, std::string(to_string(level)) + " scripted IAR " +
                                         fmt(agg.iar_pct) + " nonzero");
        if (level == DifficultyLevel::simple) {
            g.expect(agg.cfr_pct == 100.0, "simple CFR " + fmt(agg.cfr_pct) + " below 100");
            g.expect(std::abs(agg.ast_s - 10.0) <= 1e-9, "simple AST " + fmt(agg.ast_s, 4));
        }
        if (level == DifficultyLevel::hard) {
            g.expect(agg.cfr_pct >= 40.0, "hard CFR " + fmt(agg.cfr_pct) + " below 40");
        }
    }

    // the barely-safe corridor: first-safe walks it, clearance 0.54 m
    const AvoidWorld fixture = narrow_corridor_fixture();
    const std::vector<RolloutOutcome> outcomes = avoid_rollouts(fixture, SimConfig{});
    const ActionPlan plan = first_safe_decide(outcomes, ActionEnv::avoid);
    g.expect(!plan.steps.empty() && plan.steps.front().move == "W",
             "first-safe picked " + (plan.steps.empty() ? "<none>" : plan.steps.front().move));
    const RolloutOutcome* west = nullptr;
    for (const RolloutOutcome& outcome : outcomes) {
        if (outcome.action.direction == Direction::W) west = &outcome;
    }
    g.expect(west != nullptr && west->safe &&
                 std::abs(west->min_obstacle_distance - 0.54) <= 0.01,
             "corridor clearance " +
                 (west == nullptr ? std::string("<missing>") : fmt(west->min_obstacle_distance)));

    if (g.ok) return {true, measured.str() + "; first-safe walks the 0.54 m corridor"};
    return {false, g.why + " [" + measured.str() + "]"};
}

// --- 8. byte determinism of result files --------------------------------

Verdict criterion_determinism() {
    Gate g;
    const fs::path dir =
        fs::temp_directory_path() / ("apex_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);

    auto slurp = [](const fs::path& path) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        return buffer.str();
    };
    auto rerun_identical = [&](std::vector<std::string> args, const std::string& file_name,
                               const std::string& label) {
        const fs::path out = dir / file_name;
        args.push_back("--out");
        args.push_back(out.string());
        std::vector<const char*> argv;
        argv.reserve(args.size());
        for (const std::string& arg : args) argv.push_back(arg.c_str());
        const int rc1 = run_cli(static_cast<int>(argv.size()), argv.data());
        const std::string first = slurp(out);
        const int rc2 = run_cli(static_cast<int>(argv.size()), argv.data());
        const std::string second = slurp(out);
        g.expect(rc1 == 0 && rc2 == 0, label + " exit codes " + std::to_string(rc1) + "/" +
                                           std::to_string(rc2));
        g.expect(!first.empty(), label + " produced an empty result file");
        g.expect(strip_wallclock(first) == strip_wallclock(second),
                 label + " reruns differ after wall-clock stripping");
    };

    rerun_identical({"apex", "physqa", "run", "--type", "linear", "--n", "5", "--seed", "3",
                     "--answers", "oracle"},
                    "qa.jsonl", "physqa");
    rerun_identical({"apex", "tetris", "run", "--seeds", "1,2", "--blocks", "5"}, "tetris.jsonl",
                    "tetris");
    rerun_identical({"apex", "avoid", "run", "--difficulty", "simple", "--seeds", "1"},
                    "avoid.jsonl", "avoid");

    std::error_code ec;
    fs::remove_all(dir, ec);
    if (g.ok) return {true, "physqa, tetris, and avoid reruns byte-identical modulo timing"};
    return {false, g.why};
}

// --- 9. remote backend plumbing against a local mock --------------------

constexpr const char* kKeyVar = "APEX_ACCEPTANCE_API_KEY";

struct MockServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    explicit MockServer(httplib::Server::Handler handler) {
        server.Post("/v1/chat/completions", std::move(handler));
        port = server.bind_to_any_port("127.0.0.1");
        if (port <= 0) throw BackendError("mock server failed to bind");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~MockServer() {
        server.stop();
        if (thread.joinable()) thread.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port) + "/v1"; }
};

Verdict criterion_remote_plumbing() {
    Gate g;
    ::setenv(kKeyVar, "sk-acceptance", 1);

    auto remote_config = [](const std::string& base_url, double timeout_s, int retries) {
        BackendConfig cfg;
        cfg.kind = BackendKind::remote;
        cfg.base_url = base_url;
        cfg.model = "mock-model";
        cfg.timeout_s = timeout_s;
        cfg.retries = retries;
        cfg.backoff_s = 0.01;
        cfg.api_key_env = kKeyVar;
        return cfg;
    };
    const PromptBundle prompt = assemble_prompt(
        TemplateId::avoid, {{"state", "{}"}, {"available_move", "moves"}}, "none", "outcomes");
    const std::vector<RolloutOutcome> outcomes =
        avoid_rollouts(narrow_corridor_fixture(), SimConfig{});

    {
        MockServer ok([](const httplib::Request&, httplib::Response& res) {
            const Json content = Json::array({Json{{"move", "E"}, {"duration", 1.0}}});
            const Json body = {
                {"choices", Json::array({Json{{"message", Json{{"content", content.dump()}}}}})}};
            res.set_content(body.dump(), "application/json");
        });
        const auto backend = make_backend(remote_config(ok.base_url(), 5.0, 0));
        const DecideResult result = backend->decide(prompt, outcomes, ActionEnv::avoid);
        g.expect(result.parse_ok, "mock round trip failed to parse");
        g.expect(!result.plan.steps.empty() && result.plan.steps.front().move == "E",
                 "mock round trip plan mismatch");
    }

    {
        // read timeout: the handler outlives the client budget on every retry
        MockServer slow([](const httplib::Request&, httplib::Response& res) {
            std::this_thread::sleep_for(std::chrono::milliseconds(400));
            res.set_content("{}", "application/json");
        });
        const auto backend = make_backend(remote_config(slow.base_url(), 0.05, 1));
        bool threw = false;
        try {
            backend->decide(prompt, outcomes, ActionEnv::avoid);
        } catch (const BackendError&) {
            threw = true;
        }
        g.expect(threw, "timeout path did not surface a backend error");
    }

    {
        // retry exhaustion inside an episode: every decision falls back to
        // stay, is logged invalid, and the episode itself completes
        const auto backend = make_backend(remote_config("http://127.0.0.1:9/v1", 0.2, 0));
        AvoidEpisodeConfig cfg;
        cfg.horizon = 3.0;
        const EpisodeRecord record =
            run_avoid_episode(*backend, difficulty_table(DifficultyLevel::simple), 1, cfg);
        g.expect(record.decisions == 3, "dead-port episode made " +
                                            std::to_string(record.decisions) + " decisions");
        g.expect(record.backend_errors == 3, "dead-port episode logged " +
                                                 std::to_string(record.backend_errors) +
                                                 " backend errors");
        g.expect(record.invalid_actions == 3, "dead-port episode logged " +
                                                  std::to_string(record.invalid_actions) +
                                                  " invalid actions");
        bool all_stay = record.decision_log.size() == 3;
        for (const AvoidDecisionLog& entry : record.decision_log) {
            all_stay = all_stay && entry.chosen_move == "stay" && entry.invalid;
        }
        g.expect(all_stay, "dead-port episode did not fall back to stay on every decision");
    }

    if (g.ok) {
        return {true, "round trip parsed; timeout and retry exhaustion surfaced as backend "
                      "errors; dead-port episode completed on stay fallbacks"};
    }
    return {false, g.why};
}

// --- 10. salience top-k invariance --------------------------------------

Verdict criterion_salience_invariance() {
    constexpr int kTrials = 1000;
    Rng rng(10);
    Gate g;

    int checked_full = 0;
    for (int trial = 0; trial < kTrials && g.ok; ++trial) {
        WorldState world;
        const int objects = 2 + static_cast<int>(rng.below(5));
        for (int i = 0; i < objects; ++i) {
            ObjectState obj;
            obj.id = "o" + std::to_string(i);
            obj.position =
                Vec3(rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0));
            obj.velocity =
                Vec3(rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0));
            obj.radius = rng.uniform(0.1, 0.5);
            world.objects.push_back(obj);
        }
        const SceneGraph before = build_scene_graph(world);
        const SceneGraph after = build_scene_graph(euler_step(world, 0.1));
        const DiffGraph diff = diff_graph(before, after);
        const std::vector<SalienceScore> scores = score_edges(diff, world, SalienceConfig{});

        const int edge_count = static_cast<int>(scores.size());
        g.expect(select_top_k(scores, edge_count).size() == scores.size(),
                 "k=|E| dropped edges at trial " + std::to_string(trial));
        ++checked_full;

        const int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(edge_count)));
        auto pair_set = [](const std::vector<SalienceScore>& selected) {
            std::set<EdgeKey> keys;
            for (const SalienceScore& s : selected) keys.insert(s.pair);
            return keys;
        };
        const auto base = pair_set(select_top_k(scores, k));

        const double scale = std::exp(rng.uniform(-4.0, 4.0));
        std::vector<SalienceScore> rescaled = scores;
        for (SalienceScore& s : rescaled) s.score *= scale;
        const auto scaled = pair_set(select_top_k(rescaled, k));
        g.expect(base == scaled, "top-k set changed under rescale at trial " +
                                     std::to_string(trial) + " (k=" + std::to_string(k) +
                                     ", scale=" + fmt(scale, 4) + ")");
    }

    if (g.ok) {
        return {true, std::to_string(checked_full) +
                          " random graphs: top-k invariant under positive rescaling, k=|E| "
                          "returns every edge"};
    }
    return {false, g.why};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
        {"golden closed-form ground truths", criterion_golden_oracle},
        {"integration-step accuracy trend", criterion_dt_trend},
        {"oracle self-grading identity", criterion_self_grading},
        {"elastic-resolution conservation", criterion_conservation},
        {"collision predictor vs brute force", criterion_predictor_vs_brute_force},
        {"tetris scripted-decider episodes", criterion_tetris},
        {"avoidance scripted-decider episodes", criterion_avoid},
        {"result-file determinism", criterion_determinism},
        {"remote backend plumbing", criterion_remote_plumbing},
        {"salience top-k invariance", criterion_salience_invariance},
    };

    std::vector<std::pair<std::string, Verdict>> results;
    for (const auto& [label, fn] : criteria) {
        Verdict verdict;
        try {
            verdict = fn();
        } catch (const std::exception& e) {
            verdict = {false, std::string("unexpected exception: ") + e.what()};
        }
        results.emplace_back(label, std::move(verdict));
    }

    int failed = 0;
    std::printf("\n==== acceptance criteria ====\n");
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& [label, verdict] = results[i];
        if (!verdict.pass) ++failed;
        std::printf("[%s] %2zu. %s — %s\n", verdict.pass ? "PASS" : "FAIL", i + 1, label.c_str(),
                    verdict.detail.c_str());
    }
    std::printf("%d/10 criteria passed\n", 10 - failed);
    return failed == 0 ? 0 : 1;
}
