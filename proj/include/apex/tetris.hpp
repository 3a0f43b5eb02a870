#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "apex/decision.hpp"
#include "apex/rng.hpp"
#include "apex/rollout.hpp"

namespace apex {

constexpr int kBoardRows = 20;
constexpr int kBoardCols = 10;
constexpr int kPointsPerLine = 100;
constexpr int kDefaultBlockCap = 15;

/// Landed cells only (0 blank, 2 landed); the active piece exists transiently
/// inside apply_plan / render_board as value 1.
struct Board {
    int rows = kBoardRows;
    int cols = kBoardCols;
    std::vector<std::uint8_t> cells;  // row-major, row 0 is the TOP row
    int score = 0;
    int blocks_placed = 0;
    int lines_cleared_total = 0;

    Board();
    Board(int rows_, int cols_);
    std::uint8_t at(int row, int col) const { return cells[row * cols + col]; }
    std::uint8_t& at(int row, int col) { return cells[row * cols + col]; }
    int landed_cells() const;
};

enum class PieceKind { I, O, T, S, Z, J, L };

const char* to_string(PieceKind kind);

/// One rotation state: four (row, col) cells normalized to the top-left.
struct PieceRotation {
    std::array<std::pair<int, int>, 4> cells;
    int width = 0;
    int height = 0;
};

/// Distinct rotation states, clockwise order (I and S/Z have 2, O has 1,
/// T/J/L have 4).
const std::vector<PieceRotation>& piece_rotations(PieceKind kind);

/// Spawn column for rotation 0: horizontally centered, ties toward the left.
int spawn_column(PieceKind kind);

struct BoardMetrics {
    int max_height = 0;
    int holes = 0;
    int bumpiness = 0;
};

/// Column height counts rows above and including the topmost landed cell;
/// holes are blanks strictly below a landed cell in their column; bumpiness
/// sums adjacent column height differences.
BoardMetrics board_metrics(const Board& board);

struct PlanEvent {
    std::string what;  // moved_left, blocked_right, rotated, locked, cleared_lines, ...
    int count = 0;
};

struct PlanResult {
    int lines_cleared = 0;
    bool game_over = false;  // spawn collided: piece never entered the board
    std::vector<PlanEvent> events;
};

/**
 * Spawns `piece` (rotation 0, centered) and applies the plan: left/right shift
 * one column per count (blocked shifts are no-op events), rotate is clockwise
 * and rejected outright when it would collide, down is a single hard drop.
 * A plan without a down step still drops at the end ("implicit_drop"), so
 * every surviving plan lands its piece. Landing locks cells, clears full
 * rows, and adds 100 points per line.
 */
PlanResult apply_plan(Board& board, PieceKind piece, const ActionPlan& plan);

/// Board text as digit rows, top row first, with the spawned piece drawn as 1.
/// Pass std::nullopt to render landed cells only.
std::string render_board(const Board& board, const std::optional<PieceKind>& piece);

/**
 * All placements reachable by [rotate^r, shift, drop] move grammar: one
 * outcome per (rotation, column) whose realizing sequence executes without a
 * single blocked move. Each outcome carries the post-placement board scores
 * and the realizing sequence (oracle equivalence with apply_plan).
 */
std::vector<RolloutOutcome> enumerate_placements(const Board& board, PieceKind piece);

struct TetrisMetrics {
    int seed = 0;
    int final_score = 0;
    int max_height = 0;  // peak over the whole episode
    int holes = 0;       // final board
    int bumpiness = 0;   // final board
    double height_delta_per_move = 0.0;
    int blocks_placed = 0;
    int lines_cleared = 0;
    bool topped_out = false;
    bool aborted = false;  // backend failure ended the episode early
    int decisions = 0;
    int invalid_actions = 0;
    int backend_errors = 0;
    std::vector<double> latencies_s;
};

struct TetrisEpisodeConfig {
    int block_cap = kDefaultBlockCap;
    bool record_frames = false;
};

struct TetrisEpisode {
    TetrisMetrics metrics;
    Board final_board;
    std::vector<std::string> frames;  // rendered boards after each placement
};

/// Seeded 7-bag piece sequence; every decision round-trips through the full
/// pipeline: enumerate placements, describe them, assemble the board prompt,
/// let the backend decide, apply the plan. Ends at the block cap or top-out.
TetrisEpisode run_tetris_episode(DecisionBackend& backend, int seed,
                                 const TetrisEpisodeConfig& cfg = {});

struct TetrisAggregate {
    double mean_score = 0.0;
    double mean_max_height = 0.0;
    double mean_holes = 0.0;
    double mean_bumpiness = 0.0;
    double mean_height_delta_per_move = 0.0;
    double mean_latency_s = 0.0;
    int episodes = 0;
};

TetrisAggregate aggregate_tetris(const std::vector<TetrisMetrics>& episodes);

}  // namespace apex
