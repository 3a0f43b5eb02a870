#include "apex/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>
#include <tuple>

#include <CLI11.hpp>

#include "apex/avoid.hpp"
#include "apex/error.hpp"
#include "apex/physqa.hpp"
#include "apex/prompt.hpp"
#include "apex/tetris.hpp"

namespace apex {

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool timing_key(const std::string& key) {
    return ends_with(key, "_wallclock") || ends_with(key, "latency_s");
}

void remove_timing_fields(Json& node) {
    if (node.is_object()) {
        for (auto it = node.begin(); it != node.end();) {
            if (timing_key(it.key())) {
                it = node.erase(it);
            } else {
                remove_timing_fields(it.value());
                ++it;
            }
        }
    } else if (node.is_array()) {
        for (auto& item : node) remove_timing_fields(item);
    }
}

// Quotes a cell when it would otherwise break the table shape.
std::string csv_quote(const std::string& raw) {
    if (raw.find_first_of(",\"\n") == std::string::npos) return raw;
    std::string quoted = "\"";
    for (const char c : raw) {
        if (c == '"') quoted += "\"\"";
        else quoted += c;
    }
    quoted += '"';
    return quoted;
}

// Splits one CSV line, honoring double-quoted cells with "" escapes.
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell += c;
            }
        } else if (c == '"' && cell.empty()) {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else {
            cell += c;
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

// --- config plumbing ----------------------------------------------------

void reject_unknown_keys(const Json& doc, const std::vector<std::string>& allowed,
                         const std::string& prefix) {
    for (const auto& [key, _] : doc.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError("unknown config key \"" + prefix + key + "\"");
        }
    }
}

double number_at(const Json& doc, const char* key) {
    if (!doc.at(key).is_number()) {
        throw ConfigError(std::string("config key \"") + key + "\" must be a number");
    }
    return doc.at(key).get<double>();
}

std::string csv_cell(const Json& value) {
    return csv_quote(value.is_string() ? value.get<std::string>() : value.dump());
}

std::string timestamp_iso_utc() {
    const std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buffer;
}

// --- QA drivers ---------------------------------------------------------

enum class QaAnswerSource { oracle, engine, remote };

QaAnswerSource qa_source_from_string(const std::string& name) {
    if (name == "oracle") return QaAnswerSource::oracle;
    if (name == "engine") return QaAnswerSource::engine;
    if (name == "remote") return QaAnswerSource::remote;
    throw ConfigError("unknown answer source \"" + name +
                      "\" (expected oracle, engine, or remote)");
}

const char* to_string(QaAnswerSource source) {
    switch (source) {
        case QaAnswerSource::oracle: return "oracle";
        case QaAnswerSource::engine: return "engine";
        case QaAnswerSource::remote: return "remote";
    }
    return "?";
}

std::vector<TaskType> parse_task_selector(const std::string& name) {
    if (name == "all") return all_task_types();
    return {task_type_from_string(name)};
}

struct QaSuiteResult {
    std::vector<Json> records;
    Json aggregate_row;
};

/// Runs one family at one dt: generate, answer via the chosen source, grade
/// against the closed-form key.
QaSuiteResult run_qa_suite(TaskType type, int n, int seed, QaAnswerSource source,
                           const RunConfig& config) {
    const std::vector<Problem> problems =
        generate_problems(type, n, static_cast<std::uint64_t>(seed));

    std::string api_key;
    if (source == QaAnswerSource::remote) {
        const char* key = std::getenv(config.backend.api_key_env.c_str());
        if (key == nullptr || *key == '\0') {
            throw ConfigError("environment variable " + config.backend.api_key_env +
                              " is not set (required for the remote backend)");
        }
        api_key = key;
    }

    std::vector<Json> records(problems.size());
    std::vector<GradeRecord> grades(problems.size());
    parallel_for_index(problems.size(), [&](std::size_t i) {
        const Problem& problem = problems[i];
        const KinematicAnswer key = oracle_answer(problem);
        const auto started = std::chrono::steady_clock::now();
        std::string response;
        if (source == QaAnswerSource::oracle) {
            response = response_text(problem, key);
        } else if (source == QaAnswerSource::engine) {
            response = response_text(problem, engine_answer(problem, config.sim));
        } else {
            const Json prediction =
                answer_to_json(problem, engine_answer(problem, config.sim));
            const PromptBundle bundle = assemble_prompt(
                TemplateId::physqa,
                {{"question", problem.question_text}, {"answer_json", schema_text(problem)}},
                "", prediction.dump(2));
            response = chat_completion(bundle, config.backend, api_key).content;
        }
        GradeRecord grade = grade_response(parse_answer_json(response), key);
        grade.duration_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        grades[i] = grade;
        records[i] = Json{{"benchmark", std::string("physqa/") + to_string(type)},
                          {"seed", seed},
                          {"index", problem.index},
                          {"problem", to_json(problem)},
                          {"response", response},
                          {"grade", to_json(grade)}};
    });

    const SuiteMetrics metrics = aggregate_suite(grades);
    QaSuiteResult result;
    result.records = std::move(records);
    result.aggregate_row = Json{{"benchmark", "physqa"},
                                {"task_type", to_string(type)},
                                {"answers", to_string(source)},
                                {"dt", config.sim.dt},
                                {"n", n},
                                {"seed", seed},
                                {"accuracy_pct", metrics.accuracy_pct},
                                {"mse", metrics.mse},
                                {"validity_pct", metrics.validity_pct},
                                {"mean_duration_wallclock", metrics.mean_duration_s},
                                {"units", metrics.units}};
    return result;
}

int cmd_physqa_gen(const RunConfig& config, const std::string& type_name, int n, int seed) {
    std::vector<Json> records;
    std::vector<Json> rows;
    for (const TaskType type : parse_task_selector(type_name)) {
        const auto problems = generate_problems(type, n, static_cast<std::uint64_t>(seed));
        for (const Problem& p : problems) {
            records.push_back(Json{{"benchmark", std::string("physqa/") + to_string(type)},
                                   {"seed", seed},
                                   {"index", p.index},
                                   {"problem", to_json(p)}});
        }
        rows.push_back(Json{{"benchmark", "physqa"},
                            {"mode", "gen"},
                            {"task_type", to_string(type)},
                            {"n", n},
                            {"seed", seed}});
    }
    const ResultEnvelope envelope = make_envelope(config, std::move(records), std::move(rows));
    persist_results(envelope, config.out_path, config.format);
    return 0;
}

int cmd_physqa_run(const RunConfig& config, const std::string& type_name, int n, int seed,
                   const std::string& source_name) {
    const QaAnswerSource source = qa_source_from_string(source_name);
    std::vector<Json> records;
    std::vector<Json> rows;
    for (const TaskType type : parse_task_selector(type_name)) {
        QaSuiteResult suite = run_qa_suite(type, n, seed, source, config);
        std::move(suite.records.begin(), suite.records.end(), std::back_inserter(records));
        rows.push_back(std::move(suite.aggregate_row));
    }
    const ResultEnvelope envelope = make_envelope(config, std::move(records), std::move(rows));
    persist_results(envelope, config.out_path, config.format);
    for (const auto& row : envelope.aggregate_rows) std::printf("%s\n", row.dump().c_str());
    return 0;
}

int cmd_physqa_grade(const RunConfig& config, const std::string& problems_path,
                     const std::string& responses_path) {
    auto read_lines = [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read " + path);
        std::vector<Json> docs;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            try {
                docs.push_back(Json::parse(line));
            } catch (const Json::parse_error&) {
                throw ConfigError("unparseable JSON line in " + path);
            }
        }
        return docs;
    };

    std::vector<Problem> problems;
    for (const Json& doc : read_lines(problems_path)) {
        if (doc.contains("problem")) {
            problems.push_back(problem_from_json(doc.at("problem")));
        } else if (doc.contains("parameters")) {
            problems.push_back(problem_from_json(doc));
        }
        // aggregate/trailer lines pass through silently
    }
    if (problems.empty()) throw ConfigError("no problems found in " + problems_path);

    // responses pair with problems by file order; an explicit "index" field
    // must agree with the problem it lands on
    std::vector<std::string> responses;
    for (const Json& doc : read_lines(responses_path)) {
        if (doc.is_object() && doc.contains("response")) {
            responses.push_back(doc.at("response").get<std::string>());
        } else if (doc.is_object() && doc.contains("text")) {
            responses.push_back(doc.at("text").get<std::string>());
        } else {
            responses.push_back(doc.dump());
        }
    }

    std::vector<Json> records;
    std::vector<GradeRecord> grades;
    for (std::size_t i = 0; i < problems.size(); ++i) {
        const Problem& problem = problems[i];
        const std::string response = i < responses.size() ? responses[i] : "";
        const GradeRecord grade = grade_response(parse_answer_json(response), oracle_answer(problem));
        grades.push_back(grade);
        records.push_back(Json{{"benchmark", std::string("physqa/") + to_string(problem.task_type)},
                               {"seed", 0},
                               {"index", problem.index},
                               {"grade", to_json(grade)}});
    }
    const SuiteMetrics metrics = aggregate_suite(grades);
    std::vector<Json> rows = {Json{{"benchmark", "physqa"},
                                   {"mode", "grade"},
                                   {"accuracy_pct", metrics.accuracy_pct},
                                   {"mse", metrics.mse},
                                   {"validity_pct", metrics.validity_pct},
                                   {"problems", metrics.problems},
                                   {"units", metrics.units}}};
    const ResultEnvelope envelope = make_envelope(config, std::move(records), std::move(rows));
    persist_results(envelope, config.out_path, config.format);
    for (const auto& row : envelope.aggregate_rows) std::printf("%s\n", row.dump().c_str());
    return 0;
}

int cmd_ablate_dt(RunConfig config, const std::string& type_name, int n, int seed) {
    static constexpr double kSweep[] = {0.001, 0.005, 0.01};
    std::vector<Json> records;
    std::vector<Json> rows;
    for (const TaskType type : parse_task_selector(type_name)) {
        for (const double dt : kSweep) {
            config.sim.dt = dt;
            QaSuiteResult suite = run_qa_suite(type, n, seed, QaAnswerSource::engine, config);
            for (Json& r : suite.records) {
                r["benchmark"] = r["benchmark"].get<std::string>() + "/dt" + Json(dt).dump();
                records.push_back(std::move(r));
            }
            rows.push_back(std::move(suite.aggregate_row));
        }
    }
    const ResultEnvelope envelope = make_envelope(config, std::move(records), std::move(rows));
    persist_results(envelope, config.out_path, config.format);
    for (const auto& row : envelope.aggregate_rows) std::printf("%s\n", row.dump().c_str());
    return 0;
}

// --- tetris / avoid drivers ---------------------------------------------

Json to_json(const TetrisMetrics& m) {
    return Json{{"seed", m.seed},
                {"final_score", m.final_score},
                {"max_height", m.max_height},
                {"holes", m.holes},
                {"bumpiness", m.bumpiness},
                {"height_delta_per_move", m.height_delta_per_move},
                {"blocks_placed", m.blocks_placed},
                {"lines_cleared", m.lines_cleared},
                {"topped_out", m.topped_out},
                {"aborted", m.aborted},
                {"decisions", m.decisions},
                {"invalid_actions", m.invalid_actions},
                {"backend_errors", m.backend_errors},
                {"latency_s", m.latencies_s}};
}

int cmd_tetris_run(const RunConfig& config, int blocks, bool frames) {
    const auto backend = make_backend(config.backend);
    TetrisEpisodeConfig episode_cfg;
    episode_cfg.block_cap = blocks;
    episode_cfg.record_frames = frames;

    std::vector<TetrisEpisode> episodes(config.seeds.size());
    parallel_for_index(config.seeds.size(), [&](std::size_t i) {
        episodes[i] = run_tetris_episode(*backend, config.seeds[i], episode_cfg);
    });

    std::vector<Json> records;
    std::vector<TetrisMetrics> metrics;
    for (std::size_t i = 0; i < episodes.size(); ++i) {
        metrics.push_back(episodes[i].metrics);
        Json record{{"benchmark", "tetris"},
                    {"seed", config.seeds[i]},
                    {"index", 0},
                    {"metrics", to_json(episodes[i].metrics)}};
        if (frames) record["frames"] = episodes[i].frames;
        records.push_back(std::move(record));
    }
    const TetrisAggregate agg = aggregate_tetris(metrics);
    std::vector<Json> rows = {Json{{"benchmark", "tetris"},
                                   {"backend", to_string(config.backend.kind)},
                                   {"blocks", blocks},
                                   {"episodes", agg.episodes},
                                   {"mean_score", agg.mean_score},
                                   {"mean_max_height", agg.mean_max_height},
                                   {"mean_holes", agg.mean_holes},
                                   {"mean_bumpiness", agg.mean_bumpiness},
                                   {"mean_height_delta_per_move", agg.mean_height_delta_per_move},
                                   {"mean_latency_s", agg.mean_latency_s}}};
    const ResultEnvelope envelope = make_envelope(config, std::move(records), std::move(rows));
    persist_results(envelope, config.out_path, config.format);
    for (const auto& row : envelope.aggregate_rows) std::printf("%s\n", row.dump().c_str());
    return 0;
}

std::vector<DifficultyLevel> parse_difficulty_selector(const std::string& name) {
    if (name == "all") {
        return {DifficultyLevel::simple, DifficultyLevel::medium, DifficultyLevel::hard};
    }
    return {difficulty_from_string(name)};
}

void write_trajectory_csv(const EpisodeRecord& record, int obstacle_count,
                          const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << "t,agent_x,agent_y,agent_z";
    for (int i = 1; i <= obstacle_count; ++i) {
        out << ",cat" << i << "_x,cat" << i << "_y,cat" << i << "_z";
    }
    out << "\n";
    char buffer[32];
    for (const auto& row : record.trajectory) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buffer, sizeof(buffer), "%.6f", row[i]);
            out << (i == 0 ? "" : ",") << buffer;
        }
        out << "\n";
    }
}

int cmd_avoid_run(const RunConfig& config, const std::string& difficulty_name,
                  const std::string& trajectory_dir) {
    const auto backend = make_backend(config.backend);
    AvoidEpisodeConfig episode_cfg;
    episode_cfg.top_k = config.salience.k;
    episode_cfg.sim = config.sim;
    episode_cfg.record_trajectory = !trajectory_dir.empty();

    const std::vector<DifficultyLevel> levels = parse_difficulty_selector(difficulty_name);
    struct Job {
        DifficultyLevel level;
        int seed;
    };
    std::vector<Job> jobs;
    for (const DifficultyLevel level : levels) {
        for (const int seed : config.seeds) jobs.push_back({level, seed});
    }

    std::vector<EpisodeRecord> episodes(jobs.size());
    parallel_for_index(jobs.size(), [&](std::size_t i) {
        episodes[i] = run_avoid_episode(*backend, difficulty_table(jobs[i].level), jobs[i].seed,
                                        episode_cfg);
    });

    if (!trajectory_dir.empty()) {
        std::filesystem::create_directories(trajectory_dir);
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            const std::string name = std::string("avoid_") + to_string(jobs[i].level) + "_seed" +
                                     std::to_string(jobs[i].seed) + ".csv";
            write_trajectory_csv(episodes[i], difficulty_table(jobs[i].level).obstacle_count,
                                 std::filesystem::path(trajectory_dir) / name);
        }
    }

    std::vector<Json> records;
    std::vector<Json> rows;
    for (std::size_t i = 0; i < episodes.size(); ++i) {
        records.push_back(Json{{"benchmark", std::string("avoid/") + episodes[i].difficulty},
                               {"seed", episodes[i].seed},
                               {"index", 0},
                               {"episode", to_json(episodes[i])}});
    }
    for (const DifficultyLevel level : levels) {
        std::vector<EpisodeRecord> group;
        for (const auto& e : episodes) {
            if (e.difficulty == to_string(level)) group.push_back(e);
        }
        const AvoidAggregate agg = aggregate_avoid(group);
        rows.push_back(Json{{"benchmark", "avoid"},
                            {"difficulty", to_string(level)},
                            {"backend", to_string(config.backend.kind)},
                            {"episodes", agg.episodes},
                            {"decisions", agg.decisions},
                            {"cfr_pct", agg.cfr_pct},
                            {"iar_pct", agg.iar_pct},
                            {"ast_s", agg.ast_s},
                            {"mean_latency_s", agg.mean_latency_s}});
    }
    const ResultEnvelope envelope = make_envelope(config, std::move(records), std::move(rows));
    persist_results(envelope, config.out_path, config.format);
    for (const auto& row : envelope.aggregate_rows) std::printf("%s\n", row.dump().c_str());
    return 0;
}

int cmd_ablate_topk(RunConfig config, const std::vector<int>& ks,
                    const std::string& difficulty_name) {
    const auto backend = make_backend(config.backend);
    const DifficultyLevel level = difficulty_from_string(difficulty_name);

    std::vector<Json> records;
    std::vector<Json> rows;
    for (const int k : ks) {
        if (k < 1) throw ConfigError("top-k values must be >= 1");
        AvoidEpisodeConfig episode_cfg;
        episode_cfg.top_k = k;
        episode_cfg.sim = config.sim;

        std::vector<EpisodeRecord> episodes(config.seeds.size());
        parallel_for_index(config.seeds.size(), [&](std::size_t i) {
            episodes[i] = run_avoid_episode(*backend, difficulty_table(level), config.seeds[i],
                                            episode_cfg);
        });
        for (const auto& e : episodes) {
            records.push_back(Json{{"benchmark", "avoid/" + e.difficulty + "/k" + std::to_string(k)},
                                   {"seed", e.seed},
                                   {"index", 0},
                                   {"episode", to_json(e)}});
        }
        const AvoidAggregate agg = aggregate_avoid(episodes);
        rows.push_back(Json{{"benchmark", "ablate"},
                            {"sweep", "topk"},
                            {"k", k},
                            {"difficulty", to_string(level)},
                            {"backend", to_string(config.backend.kind)},
                            {"episodes", agg.episodes},
                            {"cfr_pct", agg.cfr_pct},
                            {"iar_pct", agg.iar_pct},
                            {"ast_s", agg.ast_s},
                            {"mean_latency_s", agg.mean_latency_s}});
    }
    const ResultEnvelope envelope = make_envelope(config, std::move(records), std::move(rows));
    persist_results(envelope, config.out_path, config.format);
    for (const auto& row : envelope.aggregate_rows) std::printf("%s\n", row.dump().c_str());
    return 0;
}

}  // namespace

const char* to_string(OutputFormat format) {
    return format == OutputFormat::jsonl ? "jsonl" : "csv";
}

OutputFormat output_format_from_string(const std::string& name) {
    if (name == "jsonl") return OutputFormat::jsonl;
    if (name == "csv") return OutputFormat::csv;
    throw ConfigError("unknown output format \"" + name + "\" (expected jsonl or csv)");
}

void validate(const RunConfig& config) {
    if (config.seeds.empty()) throw ConfigError("seed list must not be empty");
    validate(config.sim);
    if (config.salience.k < 1) throw ConfigError("salience k must be >= 1");
}

void apply_config_json(RunConfig& config, const Json& doc) {
    if (!doc.is_object()) throw ConfigError("config document must be a JSON object");
    reject_unknown_keys(doc, {"benchmark", "seeds", "out", "format", "sim", "salience", "backend"},
                        "");
    if (doc.contains("benchmark")) config.benchmark = doc.at("benchmark").get<std::string>();
    if (doc.contains("seeds")) {
        config.seeds = doc.at("seeds").get<std::vector<int>>();
    }
    if (doc.contains("out")) config.out_path = doc.at("out").get<std::string>();
    if (doc.contains("format")) {
        config.format = output_format_from_string(doc.at("format").get<std::string>());
    }
    if (doc.contains("sim")) {
        const Json& sim = doc.at("sim");
        reject_unknown_keys(sim, {"dt", "gravity", "max_steps"}, "sim.");
        if (sim.contains("dt")) config.sim.dt = number_at(sim, "dt");
        if (sim.contains("gravity")) config.sim.gravity = number_at(sim, "gravity");
        if (sim.contains("max_steps")) config.sim.max_steps = sim.at("max_steps").get<long long>();
    }
    if (doc.contains("salience")) {
        const Json& sal = doc.at("salience");
        reject_unknown_keys(sal, {"k", "epsilon_floor"}, "salience.");
        if (sal.contains("k")) config.salience.k = sal.at("k").get<int>();
        if (sal.contains("epsilon_floor")) {
            config.salience.epsilon_floor = number_at(sal, "epsilon_floor");
        }
    }
    if (doc.contains("backend")) {
        const Json& backend = doc.at("backend");
        reject_unknown_keys(
            backend, {"kind", "base_url", "model", "timeout_s", "retries", "backoff_s", "api_key_env"},
            "backend.");
        if (backend.contains("kind")) {
            config.backend.kind = backend_kind_from_string(backend.at("kind").get<std::string>());
        }
        if (backend.contains("base_url")) {
            config.backend.base_url = backend.at("base_url").get<std::string>();
        }
        if (backend.contains("model")) config.backend.model = backend.at("model").get<std::string>();
        if (backend.contains("timeout_s")) config.backend.timeout_s = number_at(backend, "timeout_s");
        if (backend.contains("retries")) config.backend.retries = backend.at("retries").get<int>();
        if (backend.contains("backoff_s")) config.backend.backoff_s = number_at(backend, "backoff_s");
        if (backend.contains("api_key_env")) {
            config.backend.api_key_env = backend.at("api_key_env").get<std::string>();
        }
    }
    validate(config);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
    RunConfig config;
    apply_config_json(config, doc);
    return config;
}

Json config_to_json(const RunConfig& config) {
    return Json{
        {"benchmark", config.benchmark},
        {"seeds", config.seeds},
        {"out", config.out_path},
        {"format", to_string(config.format)},
        {"sim",
         {{"dt", config.sim.dt}, {"gravity", config.sim.gravity}, {"max_steps", config.sim.max_steps}}},
        {"salience", {{"k", config.salience.k}, {"epsilon_floor", config.salience.epsilon_floor}}},
        {"backend",
         {{"kind", to_string(config.backend.kind)},
          {"base_url", config.backend.base_url},
          {"model", config.backend.model},
          {"timeout_s", config.backend.timeout_s},
          {"retries", config.backend.retries},
          {"backoff_s", config.backend.backoff_s},
          {"api_key_env", config.backend.api_key_env}}}};
}

std::string config_hash_hex(const Json& config_echo) {
    const std::string text = config_echo.dump();
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const char c : text) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 0x100000001b3ULL;
    }
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
    return buffer;
}

ResultEnvelope make_envelope(const RunConfig& config, std::vector<Json> records,
                             std::vector<Json> aggregate_rows) {
    ResultEnvelope envelope;
    envelope.config = config_to_json(config);
    envelope.config_hash = config_hash_hex(envelope.config);
    envelope.records = std::move(records);
    envelope.aggregate_rows = std::move(aggregate_rows);
    auto sort_key = [](const Json& r) {
        return std::make_tuple(r.value("benchmark", std::string()), r.value("seed", 0),
                               r.value("index", 0));
    };
    std::stable_sort(envelope.records.begin(), envelope.records.end(),
                     [&](const Json& a, const Json& b) { return sort_key(a) < sort_key(b); });
    return envelope;
}

void persist_results(const ResultEnvelope& envelope, const std::string& path,
                     OutputFormat format) {
    if (path.empty()) throw ConfigError("output path must not be empty");
    const std::filesystem::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(target.parent_path(), ec);
    }
    std::ofstream out(target);
    if (!out) throw ConfigError("cannot write " + path);

    if (format == OutputFormat::jsonl) {
        for (const auto& record : envelope.records) out << record.dump() << "\n";
        const Json trailer{{"aggregate", envelope.aggregate_rows},
                           {"config", envelope.config},
                           {"config_hash", envelope.config_hash},
                           {"tool_version", envelope.tool_version},
                           {"written_wallclock", timestamp_iso_utc()}};
        out << trailer.dump() << "\n";
    } else {
        out << "# config_hash=" << envelope.config_hash << " tool_version=" << envelope.tool_version
            << "\n";
        out << "# config=" << envelope.config.dump() << "\n";
        if (!envelope.aggregate_rows.empty()) {
            std::vector<std::string> columns;
            for (const auto& [key, _] : envelope.aggregate_rows.front().items()) {
                columns.push_back(key);
            }
            for (std::size_t i = 0; i < columns.size(); ++i) {
                out << (i == 0 ? "" : ",") << columns[i];
            }
            out << "\n";
            for (const auto& row : envelope.aggregate_rows) {
                for (std::size_t i = 0; i < columns.size(); ++i) {
                    out << (i == 0 ? "" : ",")
                        << (row.contains(columns[i]) ? csv_cell(row.at(columns[i])) : "");
                }
                out << "\n";
            }
        }
    }
    if (!out) throw ConfigError("write to " + path + " failed");
}

std::string strip_wallclock(const std::string& text) {
    std::stringstream in(text);
    std::string line;
    std::string out;
    bool csv_header_seen = false;
    std::vector<std::size_t> csv_kept;
    while (std::getline(in, line)) {
        if (!line.empty() && line.front() == '{') {
            try {
                Json doc = Json::parse(line);
                remove_timing_fields(doc);
                out += doc.dump();
            } catch (const Json::parse_error&) {
                out += line;
            }
            out += "\n";
            continue;
        }
        if (line.empty() || line.front() == '#') {
            out += line;
            out += "\n";
            continue;
        }
        const auto cells = split_csv_line(line);
        if (!csv_header_seen) {
            csv_header_seen = true;
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (!timing_key(cells[i])) csv_kept.push_back(i);
            }
        }
        bool first = true;
        for (const std::size_t i : csv_kept) {
            if (i >= cells.size()) continue;
            out += (first ? "" : ",");
            out += csv_quote(cells[i]);
            first = false;
        }
        out += "\n";
    }
    return out;
}

void parallel_for_index(std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    const unsigned hardware = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min<std::size_t>(n, hardware);
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> futures;
    futures.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        futures.push_back(std::async(std::launch::async, [&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        }));
    }
    for (auto& f : futures) f.get();
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"anticipatory-physics decision benchmarks"};
    app.require_subcommand(1);

    // shared settings; per-flag presence decides whether a flag overrides the
    // config file
    std::string config_path;
    std::string out_path;
    std::string format_name = "jsonl";
    std::string backend_name;
    std::string url;
    std::string model;
    double timeout_s = 30.0;
    int retries = 2;
    double dt = 1e-3;
    std::vector<int> seeds;
    int top_k = 2;

    std::string type_name = "all";
    int n = 25;
    int seed = 7;
    std::string source_name = "engine";
    std::string problems_path;
    std::string responses_path;
    int blocks = kDefaultBlockCap;
    bool frames = false;
    std::string difficulty_name = "all";
    std::string trajectory_dir;
    std::vector<int> ks = {1, 2, 4};

    struct Shared {
        CLI::Option* config = nullptr;
        CLI::Option* out = nullptr;
        CLI::Option* format = nullptr;
        CLI::Option* backend = nullptr;
        CLI::Option* url = nullptr;
        CLI::Option* model = nullptr;
        CLI::Option* timeout = nullptr;
        CLI::Option* retries = nullptr;
        CLI::Option* dt = nullptr;
        CLI::Option* seeds = nullptr;
        CLI::Option* top_k = nullptr;
    };
    std::map<CLI::App*, Shared> shared;
    auto add_shared = [&](CLI::App* cmd, bool with_dt, bool with_seeds, bool with_topk) {
        Shared s;
        s.config = cmd->add_option("--config", config_path, "JSON config file");
        s.out = cmd->add_option("--out", out_path, "result file path");
        s.format = cmd->add_option("--format", format_name, "jsonl or csv");
        s.backend = cmd->add_option("--backend", backend_name, "decision backend");
        s.url = cmd->add_option("--url", url, "remote endpoint base URL");
        s.model = cmd->add_option("--model", model, "remote model name");
        s.timeout = cmd->add_option("--timeout", timeout_s, "remote timeout, seconds");
        s.retries = cmd->add_option("--retries", retries, "remote retry count");
        if (with_dt) s.dt = cmd->add_option("--dt", dt, "integration step, seconds");
        if (with_seeds) {
            s.seeds = cmd->add_option("--seeds", seeds, "episode seeds")->delimiter(',');
        }
        if (with_topk) s.top_k = cmd->add_option("--top-k", top_k, "salient edges to summarize");
        shared[cmd] = s;
    };

    auto resolve_config = [&](CLI::App* cmd, const std::string& benchmark,
                              const std::string& default_out) {
        const Shared& s = shared.at(cmd);
        RunConfig config;
        if (s.config->count() > 0) config = load_config(config_path);
        config.benchmark = benchmark;
        if (s.out->count() > 0) config.out_path = out_path;
        if (config.out_path.empty()) config.out_path = default_out;
        if (s.format->count() > 0) config.format = output_format_from_string(format_name);
        if (s.backend->count() > 0) config.backend.kind = backend_kind_from_string(backend_name);
        if (s.url->count() > 0) config.backend.base_url = url;
        if (s.model->count() > 0) config.backend.model = model;
        if (s.timeout->count() > 0) config.backend.timeout_s = timeout_s;
        if (s.retries->count() > 0) config.backend.retries = retries;
        if (s.dt != nullptr && s.dt->count() > 0) config.sim.dt = dt;
        if (s.seeds != nullptr && s.seeds->count() > 0) config.seeds = seeds;
        if (s.top_k != nullptr && s.top_k->count() > 0) config.salience.k = top_k;
        validate(config);
        return config;
    };

    CLI::App* physqa = app.add_subcommand("physqa", "kinematics question suites");
    physqa->require_subcommand(1);

    CLI::App* qa_gen = physqa->add_subcommand("gen", "generate problems");
    qa_gen->add_option("--type", type_name, "task family or 'all'");
    qa_gen->add_option("--n", n, "problems per family");
    qa_gen->add_option("--seed", seed, "generator seed");
    add_shared(qa_gen, false, false, false);

    CLI::App* qa_run = physqa->add_subcommand("run", "answer and grade a suite");
    qa_run->add_option("--type", type_name, "task family or 'all'");
    qa_run->add_option("--n", n, "problems per family");
    qa_run->add_option("--seed", seed, "generator seed");
    qa_run->add_option("--answers", source_name, "answer source: oracle, engine, or remote");
    add_shared(qa_run, true, false, false);

    CLI::App* qa_grade = physqa->add_subcommand("grade", "grade stored responses");
    qa_grade->add_option("--problems", problems_path, "problems JSONL")->required();
    qa_grade->add_option("--responses", responses_path, "responses JSONL")->required();
    add_shared(qa_grade, false, false, false);

    CLI::App* qa_ablate = physqa->add_subcommand("ablate", "dt sweep (engine answers)");
    qa_ablate->add_option("--type", type_name, "task family or 'all'");
    qa_ablate->add_option("--n", n, "problems per family");
    qa_ablate->add_option("--seed", seed, "generator seed");
    add_shared(qa_ablate, false, false, false);

    CLI::App* tetris = app.add_subcommand("tetris", "board episodes");
    CLI::App* tetris_run = tetris->add_subcommand("run", "run seeded episodes");
    tetris_run->add_option("--blocks", blocks, "piece cap per episode");
    tetris_run->add_flag("--frames", frames, "record rendered boards");
    add_shared(tetris_run, false, true, false);
    tetris->require_subcommand(1);

    CLI::App* avoid = app.add_subcommand("avoid", "obstacle-avoidance episodes");
    CLI::App* avoid_run = avoid->add_subcommand("run", "run seeded episodes");
    avoid_run->add_option("--difficulty", difficulty_name, "simple, medium, hard, or all");
    avoid_run->add_option("--trajectory-dir", trajectory_dir, "write per-episode trajectory CSVs");
    add_shared(avoid_run, true, true, true);
    avoid->require_subcommand(1);

    CLI::App* ablate = app.add_subcommand("ablate", "parameter sweeps");
    ablate->require_subcommand(1);
    CLI::App* ablate_dt = ablate->add_subcommand("dt", "integration-step sweep");
    ablate_dt->add_option("--type", type_name, "task family or 'all'");
    ablate_dt->add_option("--n", n, "problems per family");
    ablate_dt->add_option("--seed", seed, "generator seed");
    add_shared(ablate_dt, false, false, false);
    CLI::App* ablate_topk = ablate->add_subcommand("topk", "salience top-k sweep");
    ablate_topk->add_option("--k", ks, "k values to sweep")->delimiter(',');
    ablate_topk->add_option("--difficulty", difficulty_name, "difficulty level");
    add_shared(ablate_topk, true, true, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (qa_gen->parsed()) {
            return cmd_physqa_gen(resolve_config(qa_gen, "physqa", "physqa_problems.jsonl"),
                                  type_name, n, seed);
        }
        if (qa_run->parsed()) {
            return cmd_physqa_run(resolve_config(qa_run, "physqa", "physqa_results.jsonl"),
                                  type_name, n, seed, source_name);
        }
        if (qa_grade->parsed()) {
            return cmd_physqa_grade(resolve_config(qa_grade, "physqa", "physqa_grades.jsonl"),
                                    problems_path, responses_path);
        }
        if (qa_ablate->parsed()) {
            return cmd_ablate_dt(resolve_config(qa_ablate, "ablate", "ablate_dt.jsonl"), type_name,
                                 n, seed);
        }
        if (tetris_run->parsed()) {
            return cmd_tetris_run(resolve_config(tetris_run, "tetris", "tetris_results.jsonl"),
                                  blocks, frames);
        }
        if (avoid_run->parsed()) {
            return cmd_avoid_run(resolve_config(avoid_run, "avoid", "avoid_results.jsonl"),
                                 difficulty_name, trajectory_dir);
        }
        if (ablate_dt->parsed()) {
            return cmd_ablate_dt(resolve_config(ablate_dt, "ablate", "ablate_dt.jsonl"), type_name,
                                 n, seed);
        }
        if (ablate_topk->parsed()) {
            return cmd_ablate_topk(resolve_config(ablate_topk, "ablate", "ablate_topk.jsonl"), ks,
                                   difficulty_name);
        }
    } catch (const BackendError& e) {
        std::fprintf(stderr, "backend error: %s\n", e.what());
        return 3;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const InvalidInputError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}

}  // namespace apex
