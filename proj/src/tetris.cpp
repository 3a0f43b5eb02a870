#include "apex/tetris.hpp"

#include <algorithm>
#include <stdexcept>

#include "apex/error.hpp"

namespace apex {

namespace {

struct ActivePiece {
    PieceKind kind = PieceKind::I;
    int rotation = 0;
    int row = 0;  // top-left anchor of the normalized cells
    int col = 0;
};

const PieceRotation& rotation_of(const ActivePiece& piece) {
    return piece_rotations(piece.kind)[piece.rotation];
}

bool fits(const Board& board, const ActivePiece& piece) {
    const auto& rot = rotation_of(piece);
    for (const auto& [dr, dc] : rot.cells) {
        const int r = piece.row + dr;
        const int c = piece.col + dc;
        if (r < 0 || r >= board.rows || c < 0 || c >= board.cols) return false;
        if (board.at(r, c) != 0) return false;
    }
    return true;
}

void add_event(std::vector<PlanEvent>& events, const std::string& what, int count = 1) {
    if (count <= 0) return;
    events.push_back({what, count});
}

int clear_full_rows(Board& board) {
    int cleared = 0;
    for (int r = board.rows - 1; r >= 0; --r) {
        bool full = true;
        for (int c = 0; c < board.cols; ++c) {
            if (board.at(r, c) != 2) {
                full = false;
                break;
            }
        }
        if (!full) continue;
        ++cleared;
        for (int rr = r; rr > 0; --rr) {
            for (int c = 0; c < board.cols; ++c) board.at(rr, c) = board.at(rr - 1, c);
        }
        for (int c = 0; c < board.cols; ++c) board.at(0, c) = 0;
        ++r;  // the shifted-down row needs a fresh look
    }
    return cleared;
}

void lock_piece(Board& board, const ActivePiece& piece, PlanResult& result) {
    const auto& rot = rotation_of(piece);
    for (const auto& [dr, dc] : rot.cells) board.at(piece.row + dr, piece.col + dc) = 2;
    ++board.blocks_placed;
    const int cleared = clear_full_rows(board);
    if (cleared > 0) {
        board.score += kPointsPerLine * cleared;
        board.lines_cleared_total += cleared;
        result.lines_cleared = cleared;
        add_event(result.events, "cleared_lines", cleared);
    }
}

void hard_drop(Board& board, ActivePiece& piece, PlanResult& result) {
    int drop = 0;
    ActivePiece probe = piece;
    while (true) {
        probe.row = piece.row + drop + 1;
        if (!fits(board, probe)) break;
        ++drop;
    }
    piece.row += drop;
    lock_piece(board, piece, result);
}

}  // namespace

Board::Board() : Board(kBoardRows, kBoardCols) {}

Board::Board(int rows_, int cols_) : rows(rows_), cols(cols_), cells(rows_ * cols_, 0) {
    if (rows_ < 4 || cols_ < 4) throw InvalidInputError("board must be at least 4x4");
}

int Board::landed_cells() const {
    return static_cast<int>(std::count(cells.begin(), cells.end(), std::uint8_t{2}));
}

const char* to_string(PieceKind kind) {
    switch (kind) {
        case PieceKind::I: return "I";
        case PieceKind::O: return "O";
        case PieceKind::T: return "T";
        case PieceKind::S: return "S";
        case PieceKind::Z: return "Z";
        case PieceKind::J: return "J";
        case PieceKind::L: return "L";
    }
    throw std::logic_error("unknown PieceKind");
}

const std::vector<PieceRotation>& piece_rotations(PieceKind kind) {
    auto rot = [](std::array<std::pair<int, int>, 4> cells, int w, int h) {
        return PieceRotation{cells, w, h};
    };
    static const std::vector<PieceRotation> i = {
        rot({{{0, 0}, {0, 1}, {0, 2}, {0, 3}}}, 4, 1),
        rot({{{0, 0}, {1, 0}, {2, 0}, {3, 0}}}, 1, 4),
    };
    static const std::vector<PieceRotation> o = {
        rot({{{0, 0}, {0, 1}, {1, 0}, {1, 1}}}, 2, 2),
    };
    static const std::vector<PieceRotation> t = {
        rot({{{0, 1}, {1, 0}, {1, 1}, {1, 2}}}, 3, 2),
        rot({{{0, 0}, {1, 0}, {1, 1}, {2, 0}}}, 2, 3),
        rot({{{0, 0}, {0, 1}, {0, 2}, {1, 1}}}, 3, 2),
        rot({{{0, 1}, {1, 0}, {1, 1}, {2, 1}}}, 2, 3),
    };
    static const std::vector<PieceRotation> s = {
        rot({{{0, 1}, {0, 2}, {1, 0}, {1, 1}}}, 3, 2),
        rot({{{0, 0}, {1, 0}, {1, 1}, {2, 1}}}, 2, 3),
    };
    static const std::vector<PieceRotation> z = {
        rot({{{0, 0}, {0, 1}, {1, 1}, {1, 2}}}, 3, 2),
        rot({{{0, 1}, {1, 0}, {1, 1}, {2, 0}}}, 2, 3),
    };
    static const std::vector<PieceRotation> j = {
        rot({{{0, 0}, {1, 0}, {1, 1}, {1, 2}}}, 3, 2),
        rot({{{0, 0}, {0, 1}, {1, 0}, {2, 0}}}, 2, 3),
        rot({{{0, 0}, {0, 1}, {0, 2}, {1, 2}}}, 3, 2),
        rot({{{0, 1}, {1, 1}, {2, 0}, {2, 1}}}, 2, 3),
    };
    static const std::vector<PieceRotation> l = {
        rot({{{0, 2}, {1, 0}, {1, 1}, {1, 2}}}, 3, 2),
        rot({{{0, 0}, {1, 0}, {2, 0}, {2, 1}}}, 2, 3),
        rot({{{0, 0}, {0, 1}, {0, 2}, {1, 0}}}, 3, 2),
        rot({{{0, 0}, {0, 1}, {1, 1}, {2, 1}}}, 2, 3),
    };
    switch (kind) {
        case PieceKind::I: return i;
        case PieceKind::O: return o;
        case PieceKind::T: return t;
        case PieceKind::S: return s;
        case PieceKind::Z: return z;
        case PieceKind::J: return j;
        case PieceKind::L: return l;
    }
    throw std::logic_error("unknown PieceKind");
}

int spawn_column(PieceKind kind) {
    return (kBoardCols - piece_rotations(kind)[0].width) / 2;
}

BoardMetrics board_metrics(const Board& board) {
    BoardMetrics m;
    std::vector<int> heights(board.cols, 0);
    for (int c = 0; c < board.cols; ++c) {
        int top = -1;
        for (int r = 0; r < board.rows; ++r) {
            if (board.at(r, c) == 2) {
                top = r;
                break;
            }
        }
        if (top < 0) continue;
        heights[c] = board.rows - top;
        for (int r = top + 1; r < board.rows; ++r) {
            if (board.at(r, c) == 0) ++m.holes;
        }
    }
    for (int c = 0; c + 1 < board.cols; ++c) m.bumpiness += std::abs(heights[c] - heights[c + 1]);
    m.max_height = *std::max_element(heights.begin(), heights.end());
    return m;
}

PlanResult apply_plan(Board& board, PieceKind piece, const ActionPlan& plan) {
    if (plan.env != ActionEnv::tetris) {
        throw InvalidInputError("apply_plan expects a tetris plan");
    }
    PlanResult result;
    ActivePiece active{piece, 0, 0, spawn_column(piece)};
    if (!fits(board, active)) {
        result.game_over = true;
        add_event(result.events, "game_over");
        return result;
    }

    bool dropped = false;
    for (const auto& step : plan.steps) {
        if (dropped) {
            add_event(result.events, "ignored_after_drop", step.times);
            continue;
        }
        if (step.move == "left" || step.move == "right") {
            const int delta = step.move == "left" ? -1 : 1;
            int moved = 0;
            int blocked = 0;
            for (int i = 0; i < step.times; ++i) {
                ActivePiece probe = active;
                probe.col += delta;
                if (fits(board, probe)) {
                    active = probe;
                    ++moved;
                } else {
                    ++blocked;
                }
            }
            add_event(result.events, std::string("moved_") + step.move, moved);
            add_event(result.events, std::string("blocked_") + step.move, blocked);
        } else if (step.move == "rotate") {
            int rotated = 0;
            int rejected = 0;
            const int states = static_cast<int>(piece_rotations(piece).size());
            for (int i = 0; i < step.times; ++i) {
                ActivePiece probe = active;
                probe.rotation = (probe.rotation + 1) % states;
                if (fits(board, probe)) {
                    active = probe;
                    ++rotated;
                } else {
                    ++rejected;
                }
            }
            add_event(result.events, "rotated", rotated);
            add_event(result.events, "rotate_rejected", rejected);
        } else if (step.move == "down") {
            add_event(result.events, "hard_drop");
            hard_drop(board, active, result);
            dropped = true;
        } else {
            throw InvalidInputError("unknown tetris move \"" + step.move + "\"");
        }
    }
    if (!dropped) {
        add_event(result.events, "implicit_drop");
        hard_drop(board, active, result);
    }
    return result;
}

std::string render_board(const Board& board, const std::optional<PieceKind>& piece) {
    std::vector<std::string> rows(board.rows, std::string(board.cols, '0'));
    for (int r = 0; r < board.rows; ++r) {
        for (int c = 0; c < board.cols; ++c) {
            if (board.at(r, c) == 2) rows[r][c] = '2';
        }
    }
    if (piece) {
        const ActivePiece active{*piece, 0, 0, spawn_column(*piece)};
        if (fits(board, active)) {
            for (const auto& [dr, dc] : rotation_of(active).cells) {
                rows[active.row + dr][active.col + dc] = '1';
            }
        }
    }
    std::string out;
    for (int r = 0; r < board.rows; ++r) {
        if (r > 0) out += '\n';
        out += rows[r];
    }
    return out;
}

std::vector<RolloutOutcome> enumerate_placements(const Board& board, PieceKind piece) {
    std::vector<RolloutOutcome> outcomes;
    const auto& rotations = piece_rotations(piece);
    const int origin = spawn_column(piece);
    for (int r = 0; r < static_cast<int>(rotations.size()); ++r) {
        const int width = rotations[r].width;
        for (int c = 0; c + width <= board.cols; ++c) {
            std::vector<std::pair<std::string, int>> moves;
            if (r > 0) moves.emplace_back("rotate", r);
            if (c < origin) moves.emplace_back("left", origin - c);
            if (c > origin) moves.emplace_back("right", c - origin);
            moves.emplace_back("down", 1);

            ActionPlan plan;
            plan.env = ActionEnv::tetris;
            for (const auto& [move, times] : moves) plan.steps.push_back({move, times, 1.0});

            Board copy = board;
            const PlanResult res = apply_plan(copy, piece, plan);
            if (res.game_over) continue;
            bool clean = true;
            for (const auto& e : res.events) {
                if (e.what == "blocked_left" || e.what == "blocked_right" ||
                    e.what == "rotate_rejected") {
                    clean = false;
                    break;
                }
            }
            if (!clean) continue;

            const BoardMetrics bm = board_metrics(copy);
            RolloutOutcome outcome;
            outcome.action.env = ActionEnv::tetris;
            outcome.action.rotation = r;
            outcome.action.column = c;
            outcome.collision = false;
            outcome.safe = true;
            TetrisOutcome t;
            t.lines_cleared = res.lines_cleared;
            t.holes = bm.holes;
            t.bumpiness = bm.bumpiness;
            t.max_height = bm.max_height;
            t.moves = std::move(moves);
            outcome.tetris = std::move(t);
            outcomes.push_back(std::move(outcome));
        }
    }
    return outcomes;
}

TetrisEpisode run_tetris_episode(DecisionBackend& backend, int seed,
                                 const TetrisEpisodeConfig& cfg) {
    if (cfg.block_cap < 1) throw InvalidInputError("block cap must be >= 1");
    TetrisEpisode episode;
    Board& board = episode.final_board;
    TetrisMetrics& m = episode.metrics;
    m.seed = seed;

    Rng rng(derive_seed(static_cast<std::uint64_t>(seed), "tetris"));
    std::vector<PieceKind> bag;
    auto next_piece = [&] {
        if (bag.empty()) {
            bag = {PieceKind::I, PieceKind::O, PieceKind::T, PieceKind::S,
                   PieceKind::Z, PieceKind::J, PieceKind::L};
            rng.shuffle(bag);
        }
        const PieceKind kind = bag.back();
        bag.pop_back();
        return kind;
    };

    while (board.blocks_placed < cfg.block_cap) {
        const PieceKind piece = next_piece();
        const ActivePiece spawn{piece, 0, 0, spawn_column(piece)};
        if (!fits(board, spawn)) {
            m.topped_out = true;
            break;
        }
        const auto outcomes = enumerate_placements(board, piece);
        const PromptBundle prompt =
            assemble_prompt(TemplateId::tetris, {{"state", render_board(board, piece)}}, "",
                            describe_outcomes(outcomes));
        ActionPlan plan;
        try {
            const DecideResult dr = backend.decide(prompt, outcomes, ActionEnv::tetris);
            m.latencies_s.push_back(dr.latency_s);
            if (!dr.parse_ok) ++m.invalid_actions;
            plan = dr.plan;
        } catch (const BackendError&) {
            // unlike avoidance there is no neutral action here: a hard drop
            // changes the board, so the episode ends with a failure flag
            ++m.backend_errors;
            m.aborted = true;
            break;
        }
        ++m.decisions;
        const PlanResult res = apply_plan(board, piece, plan);
        if (res.game_over) {
            m.topped_out = true;
            break;
        }
        m.max_height = std::max(m.max_height, board_metrics(board).max_height);
        if (cfg.record_frames) episode.frames.push_back(render_board(board, std::nullopt));
    }

    const BoardMetrics final_metrics = board_metrics(board);
    m.final_score = board.score;
    m.holes = final_metrics.holes;
    m.bumpiness = final_metrics.bumpiness;
    m.blocks_placed = board.blocks_placed;
    m.lines_cleared = board.lines_cleared_total;
    // total vertical growth over the episode; the board starts empty, so this
    // is the final peak column height
    m.height_delta_per_move = static_cast<double>(final_metrics.max_height);
    return episode;
}

TetrisAggregate aggregate_tetris(const std::vector<TetrisMetrics>& episodes) {
    if (episodes.empty()) throw InvalidInputError("no tetris episodes to aggregate");
    TetrisAggregate agg;
    agg.episodes = static_cast<int>(episodes.size());
    double latency_sum = 0.0;
    long long latency_count = 0;
    for (const auto& m : episodes) {
        agg.mean_score += m.final_score;
        agg.mean_max_height += m.max_height;
        agg.mean_holes += m.holes;
        agg.mean_bumpiness += m.bumpiness;
        agg.mean_height_delta_per_move += m.height_delta_per_move;
        for (const double l : m.latencies_s) {
            latency_sum += l;
            ++latency_count;
        }
    }
    const double n = static_cast<double>(agg.episodes);
    agg.mean_score /= n;
    agg.mean_max_height /= n;
    agg.mean_holes /= n;
    agg.mean_bumpiness /= n;
    agg.mean_height_delta_per_move /= n;
    agg.mean_latency_s = latency_count > 0 ? latency_sum / static_cast<double>(latency_count) : 0.0;
    return agg;
}

}  // namespace apex
