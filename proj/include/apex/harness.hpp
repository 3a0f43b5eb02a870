#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "apex/decision.hpp"
#include "apex/physics.hpp"
#include "apex/salience.hpp"
#include "apex/vec.hpp"

namespace apex {

inline constexpr const char* kToolVersion = "0.1.0";

enum class OutputFormat { jsonl, csv };

const char* to_string(OutputFormat format);
OutputFormat output_format_from_string(const std::string& name);

/**
 * Fully resolved run settings. Built from defaults, then an optional JSON
 * config file, then command-line flags (flags win). The salience scorer is
 * always the analytic one here; pluggable scorers are a library-level
 * feature.
 */
struct RunConfig {
    std::string benchmark;  // physqa | tetris | avoid | ablate
    SimConfig sim;
    SalienceConfig salience;
    BackendConfig backend;
    std::vector<int> seeds = {1, 2, 3, 4, 5};
    std::string out_path;
    OutputFormat format = OutputFormat::jsonl;
};

/// Throws ConfigError on empty seeds or invalid sim settings.
void validate(const RunConfig& config);

/**
 * Applies a JSON document onto a config. Recognized keys: benchmark, seeds,
 * out, format, sim{dt, gravity, max_steps}, salience{k, epsilon_floor},
 * backend{kind, base_url, model, timeout_s, retries, backoff_s, api_key_env}.
 * Any other key throws ConfigError naming it (dotted for nested keys).
 */
void apply_config_json(RunConfig& config, const Json& doc);

/// Reads a JSON config file onto defaults. Missing/unreadable file or any
/// unknown key / out-of-range value throws ConfigError.
RunConfig load_config(const std::string& path);

/// Full resolved copy, suitable for embedding in result files.
Json config_to_json(const RunConfig& config);

/// FNV-1a 64-bit over the compact dump, as fixed-width hex.
std::string config_hash_hex(const Json& config_echo);

/**
 * Everything one run emits. Records are sorted by (benchmark, seed, index) —
 * each record carries those three keys — and the aggregate holds one flat
 * row per reported group (task family, difficulty, sweep point...).
 */
struct ResultEnvelope {
    Json config;
    std::string config_hash;
    std::vector<Json> records;
    std::vector<Json> aggregate_rows;
    std::string tool_version = kToolVersion;
};

/// Sorts records and stamps config echo + hash + version.
ResultEnvelope make_envelope(const RunConfig& config, std::vector<Json> records,
                             std::vector<Json> aggregate_rows);

/**
 * JSONL: one line per record, then one trailer line carrying the aggregate
 * rows, config echo, config hash, and tool version. CSV: two `#` comment
 * lines (hash/version, config echo) then the flat aggregate table. Re-running
 * with the same config and seeds reproduces the bytes except wall-clock
 * fields. IO failure throws ConfigError.
 */
void persist_results(const ResultEnvelope& envelope, const std::string& path,
                     OutputFormat format);

/**
 * Removes every timing field so determinism checks can compare bytes:
 * JSON keys ending in `_wallclock` or `latency_s`, CSV columns with such
 * headers. Input is JSONL (lines starting with `{`) or CSV; unparseable
 * lines pass through unchanged.
 */
std::string strip_wallclock(const std::string& text);

/// Index-ordered parallel map; results land in slot i regardless of timing.
void parallel_for_index(std::size_t n, const std::function<void(std::size_t)>& fn);

/**
 * Entry point behind main(). Subcommands: physqa gen|run|grade|ablate,
 * tetris run, avoid run, ablate dt|topk. Returns 0 on success, 2 on
 * usage/config errors, 3 on backend errors.
 */
int run_cli(int argc, const char* const* argv);

}  // namespace apex
