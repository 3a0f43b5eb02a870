#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "apex/error.hpp"
#include "apex/tetris.hpp"

using namespace apex;

namespace {

ActionPlan plan_of(std::vector<PlanStep> steps) {
    ActionPlan plan;
    plan.env = ActionEnv::tetris;
    plan.steps = std::move(steps);
    return plan;
}

// fill one full bottom row except the given columns
void fill_bottom_row_except(Board& board, const std::vector<int>& gaps) {
    for (int c = 0; c < board.cols; ++c) {
        bool gap = false;
        for (int g : gaps) gap = gap || (g == c);
        if (!gap) board.at(board.rows - 1, c) = 2;
    }
}

}  // namespace

TEST_CASE("rotation states per piece") {
    CHECK(piece_rotations(PieceKind::I).size() == 2);
    CHECK(piece_rotations(PieceKind::O).size() == 1);
    CHECK(piece_rotations(PieceKind::S).size() == 2);
    CHECK(piece_rotations(PieceKind::Z).size() == 2);
    CHECK(piece_rotations(PieceKind::T).size() == 4);
    CHECK(piece_rotations(PieceKind::J).size() == 4);
    CHECK(piece_rotations(PieceKind::L).size() == 4);

    // every rotation is exactly four cells inside its bounding box
    for (PieceKind kind : {PieceKind::I, PieceKind::O, PieceKind::T, PieceKind::S, PieceKind::Z,
                           PieceKind::J, PieceKind::L}) {
        for (const PieceRotation& rot : piece_rotations(kind)) {
            for (const auto& [r, c] : rot.cells) {
                CHECK(r >= 0);
                CHECK(r < rot.height);
                CHECK(c >= 0);
                CHECK(c < rot.width);
            }
        }
    }
}

TEST_CASE("enumerated placement counts: 17 for I, 9 for O") {
    const Board empty;
    CHECK(enumerate_placements(empty, PieceKind::I).size() == 17);  // 7 flat + 10 upright
    CHECK(enumerate_placements(empty, PieceKind::O).size() == 9);
}

TEST_CASE("landed cell accounting over seeded episodes") {
    BackendConfig cfg;
    cfg.kind = BackendKind::scripted;
    auto backend = make_backend(cfg);
    const TetrisEpisode episode = run_tetris_episode(*backend, 11);
    const Board& board = episode.final_board;
    CHECK(board.landed_cells() ==
          4 * board.blocks_placed - board.cols * board.lines_cleared_total);
    CHECK(board.score == kPointsPerLine * board.lines_cleared_total);
    CHECK(episode.metrics.blocks_placed == kDefaultBlockCap);
}

TEST_CASE("board metrics: heights, holes, bumpiness") {
    Board board(6, 4);
    // col 0: height 3; col 1: height 1; col 2: height 2; col 3: empty
    board.at(3, 0) = 2;
    board.at(4, 0) = 2;
    board.at(5, 0) = 2;
    board.at(5, 1) = 2;
    board.at(4, 2) = 2;
    board.at(5, 2) = 2;
    const BoardMetrics metrics = board_metrics(board);
    CHECK(metrics.max_height == 3);
    CHECK(metrics.holes == 0);
    CHECK(metrics.bumpiness == 5);  // |3-1| + |1-2| + |2-0|

    // a blank strictly below a landed cell is a hole
    Board holed(6, 4);
    holed.at(3, 1) = 2;
    holed.at(5, 1) = 2;  // row 4 is the hole
    const BoardMetrics hm = board_metrics(holed);
    CHECK(hm.holes == 1);
    CHECK(hm.max_height == 3);

    CHECK(board_metrics(Board()).max_height == 0);
    CHECK(board_metrics(Board()).holes == 0);
    CHECK(board_metrics(Board()).bumpiness == 0);
}

TEST_CASE("hard drop lands on the floor and locks") {
    Board board;
    const PlanResult result = apply_plan(board, PieceKind::O, plan_of({{"down", 1, 1.0}}));
    CHECK_FALSE(result.game_over);
    CHECK(result.lines_cleared == 0);
    CHECK(board.landed_cells() == 4);
    // O spawns centered (columns 4-5) and falls straight to the bottom
    CHECK(board.at(kBoardRows - 1, 4) == 2);
    CHECK(board.at(kBoardRows - 1, 5) == 2);
    CHECK(board.at(kBoardRows - 2, 4) == 2);
    CHECK(board.at(kBoardRows - 2, 5) == 2);
}

TEST_CASE("a plan without a down step still drops") {
    Board board;
    const PlanResult result = apply_plan(board, PieceKind::O, plan_of({{"left", 2, 1.0}}));
    CHECK_FALSE(result.game_over);
    CHECK(board.landed_cells() == 4);
    CHECK(board.at(kBoardRows - 1, 2) == 2);
    bool implicit = false;
    for (const auto& e : result.events) implicit = implicit || e.what == "implicit_drop";
    CHECK(implicit);
}

TEST_CASE("blocked shifts are no-ops, not failures") {
    Board board;
    // O spawn corners at columns 4-5; 20 lefts pin it against the wall
    const PlanResult result =
        apply_plan(board, PieceKind::O, plan_of({{"left", 20, 1.0}, {"down", 1, 1.0}}));
    CHECK_FALSE(result.game_over);
    CHECK(board.at(kBoardRows - 1, 0) == 2);
    CHECK(board.at(kBoardRows - 1, 1) == 2);
    bool blocked = false;
    for (const auto& e : result.events) blocked = blocked || e.what == "blocked_left";
    CHECK(blocked);
}

TEST_CASE("impossible rotation is rejected as a no-op") {
    Board board;
    // O has a single rotation state; rotating it must change nothing
    const PlanResult result =
        apply_plan(board, PieceKind::O, plan_of({{"rotate", 1, 1.0}, {"down", 1, 1.0}}));
    CHECK_FALSE(result.game_over);
    CHECK(board.at(kBoardRows - 1, 4) == 2);
    CHECK(board.at(kBoardRows - 1, 5) == 2);
}

TEST_CASE("clearing a line scores 100 and collapses the row") {
    Board board;
    fill_bottom_row_except(board, {4, 5});
    const PlanResult result = apply_plan(board, PieceKind::O, plan_of({{"down", 1, 1.0}}));
    CHECK(result.lines_cleared == 1);
    CHECK(board.score == 100);
    CHECK(board.lines_cleared_total == 1);
    // the two upper O cells fall into the cleared bottom row
    CHECK(board.at(kBoardRows - 1, 4) == 2);
    CHECK(board.at(kBoardRows - 1, 5) == 2);
    CHECK(board.landed_cells() == 2);
    CHECK(board_metrics(board).max_height == 1);
}

TEST_CASE("vertical I clears a row through a single-column well") {
    Board board;
    for (int r = kBoardRows - 4; r < kBoardRows; ++r) {
        for (int c = 0; c < kBoardCols; ++c) {
            if (c != 0) board.at(r, c) = 2;
        }
    }
    // rotate to vertical, march to the wall, drop down the well
    const PlanResult result = apply_plan(
        board, PieceKind::I,
        plan_of({{"rotate", 1, 1.0}, {"left", 9, 1.0}, {"down", 1, 1.0}}));
    CHECK(result.lines_cleared == 4);
    CHECK(board.score == 400);
    CHECK(board.landed_cells() == 0);
}

TEST_CASE("spawn collision tops the game out") {
    Board board;
    for (int r = 0; r < board.rows; ++r) {
        for (int c = 0; c < board.cols; ++c) board.at(r, c) = 2;
    }
    Board before = board;
    const PlanResult result = apply_plan(board, PieceKind::T, plan_of({{"down", 1, 1.0}}));
    CHECK(result.game_over);
    CHECK(board.landed_cells() == before.landed_cells());
}

TEST_CASE("render marks the active piece as 1 and landed cells as 2") {
    Board board;
    board.at(kBoardRows - 1, 0) = 2;
    const std::string rendered = render_board(board, PieceKind::O);
    const std::vector<std::string> rows = [&] {
        std::vector<std::string> out;
        std::string line;
        for (char ch : rendered) {
            if (ch == '\n') {
                out.push_back(line);
                line.clear();
            } else {
                line += ch;
            }
        }
        if (!line.empty()) out.push_back(line);
        return out;
    }();
    REQUIRE(rows.size() == static_cast<std::size_t>(kBoardRows));
    CHECK(rows[0] == "0000110000");
    CHECK(rows[1] == "0000110000");
    CHECK(rows[kBoardRows - 1] == "2000000000");
    CHECK(render_board(board, std::nullopt).find('1') == std::string::npos);
}

TEST_CASE("enumerate_placements outcomes replay to identical boards") {
    Board board;
    fill_bottom_row_except(board, {0, 1, 7});
    for (const RolloutOutcome& outcome : enumerate_placements(board, PieceKind::T)) {
        REQUIRE(outcome.tetris.has_value());
        Board replay = board;
        ActionPlan plan;
        plan.env = ActionEnv::tetris;
        for (const auto& [move, times] : outcome.tetris->moves) {
            plan.steps.push_back({move, times, 1.0});
        }
        const PlanResult result = apply_plan(replay, PieceKind::T, plan);
        CHECK_FALSE(result.game_over);
        CHECK(result.lines_cleared == outcome.tetris->lines_cleared);
        const BoardMetrics metrics = board_metrics(replay);
        CHECK(metrics.holes == outcome.tetris->holes);
        CHECK(metrics.bumpiness == outcome.tetris->bumpiness);
        CHECK(metrics.max_height == outcome.tetris->max_height);
    }
}

TEST_CASE("episodes are deterministic given seed and backend") {
    BackendConfig cfg;
    cfg.kind = BackendKind::scripted;
    auto backend_a = make_backend(cfg);
    auto backend_b = make_backend(cfg);
    const TetrisEpisode a = run_tetris_episode(*backend_a, 3);
    const TetrisEpisode b = run_tetris_episode(*backend_b, 3);
    CHECK(a.metrics.final_score == b.metrics.final_score);
    CHECK(a.metrics.max_height == b.metrics.max_height);
    CHECK(a.metrics.holes == b.metrics.holes);
    CHECK(a.metrics.bumpiness == b.metrics.bumpiness);
    CHECK(a.final_board.cells == b.final_board.cells);

    auto backend_c = make_backend(cfg);
    const TetrisEpisode c = run_tetris_episode(*backend_c, 4);
    CHECK(a.final_board.cells != c.final_board.cells);  // seed actually matters
}

TEST_CASE("seven-bag sequence: scripted episodes place the block cap") {
    BackendConfig cfg;
    cfg.kind = BackendKind::scripted;
    auto backend = make_backend(cfg);
    TetrisEpisodeConfig episode_cfg;
    episode_cfg.block_cap = 7;
    episode_cfg.record_frames = true;
    const TetrisEpisode episode = run_tetris_episode(*backend, 1, episode_cfg);
    CHECK(episode.metrics.blocks_placed == 7);
    CHECK(episode.metrics.decisions == 7);
    CHECK(episode.frames.size() == 7);
    CHECK_FALSE(episode.metrics.aborted);
    CHECK(episode.metrics.latencies_s.size() == 7);
}

TEST_CASE("always-down backend stacks a center tower") {
    BackendConfig cfg;
    cfg.kind = BackendKind::always_down;
    auto backend = make_backend(cfg);
    const TetrisEpisode episode = run_tetris_episode(*backend, 1);
    CHECK(episode.metrics.final_score == 0);
    CHECK(episode.metrics.max_height >= 10);
}

TEST_CASE("aggregate averages the per-episode metrics") {
    TetrisMetrics m1;
    m1.final_score = 100;
    m1.max_height = 4;
    m1.holes = 2;
    m1.bumpiness = 6;
    m1.height_delta_per_move = 1.0;
    TetrisMetrics m2;
    m2.final_score = 300;
    m2.max_height = 6;
    m2.holes = 0;
    m2.bumpiness = 2;
    m2.height_delta_per_move = 3.0;
    const TetrisAggregate agg = aggregate_tetris({m1, m2});
    CHECK(agg.episodes == 2);
    CHECK(agg.mean_score == doctest::Approx(200.0));
    CHECK(agg.mean_max_height == doctest::Approx(5.0));
    CHECK(agg.mean_holes == doctest::Approx(1.0));
    CHECK(agg.mean_bumpiness == doctest::Approx(4.0));
    CHECK(agg.mean_height_delta_per_move == doctest::Approx(2.0));
}
