#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "faery/error.hpp"
#include "faery/grid.hpp"
#include "faery/qd.hpp"

using namespace faery;
using grid::GridGenome;

namespace {

const int kSide = 40;

Task<GridGenome> goal_at(GridGenome goal) { return grid::make_grid_task(grid::GridWorldSpec::standard(0), goal); }

MutateFn<GridGenome> step(int step_max) {
    return [step_max](const GridGenome& g, Rng& rng) { return grid::grid_mutate(g, kSide, step_max, rng); };
}

std::vector<qd::Seed<GridGenome>> seeds_at(std::vector<GridGenome> cells) {
    std::vector<qd::Seed<GridGenome>> out;
    for (std::size_t i = 0; i < cells.size(); ++i) out.push_back({cells[i], i});
    return out;
}

qd::QdOutcome<GridGenome> run(const Task<GridGenome>& task, const std::vector<qd::Seed<GridGenome>>& seeds,
                              const qd::QdConfig& cfg, std::uint64_t seed, int step_max = 3) {
    Rng rng(seed);
    return qd::run_qd_instance<GridGenome>(task, seeds, cfg, step(step_max), rng);
}

/// Probability that one mutation of `from` lands on `goal`, by enumerating
/// every (direction, magnitude) pair with clamping.
double one_step_probability(GridGenome from, GridGenome goal, int step_max) {
    int hits = 0;
    const int dr[4] = {0, 0, -1, 1};
    const int dc[4] = {-1, 1, 0, 0};
    for (int d = 0; d < 4; ++d) {
        for (int m = 1; m <= step_max; ++m) {
            GridGenome g{std::clamp(from.row + dr[d] * m, 0, kSide - 1), std::clamp(from.col + dc[d] * m, 0, kSide - 1)};
            hits += g == goal;
        }
    }
    return static_cast<double>(hits) / (4.0 * step_max);
}

} // namespace

TEST(Qd, SeedThatSolvesStopsAtGenerationZero) {
    qd::QdConfig cfg;
    const auto out = run(goal_at({5, 5}), seeds_at({{0, 0}, {5, 5}, {1, 1}}), cfg, 1);
    EXPECT_TRUE(out.solved);
    ASSERT_TRUE(out.generations_used.has_value());
    EXPECT_EQ(*out.generations_used, 0u);
    EXPECT_EQ(out.evaluations, 3u);
    ASSERT_EQ(out.solutions.size(), 1u);
    EXPECT_EQ(out.forest.node(out.solutions[0].node_id).depth, 0u);
    EXPECT_EQ(out.forest.node(out.solutions[0].node_id).root_index, 1u);
    EXPECT_EQ(out.solutions[0].genome, (GridGenome{5, 5}));
}

TEST(Qd, ZeroBudgetWithoutSolutionIsUnsolved) {
    qd::QdConfig cfg;
    cfg.g_qd_max = 0;
    const auto out = run(goal_at({20, 20}), seeds_at({{0, 0}, {0, 1}}), cfg, 1);
    EXPECT_FALSE(out.solved);
    EXPECT_FALSE(out.generations_used.has_value());
    EXPECT_EQ(out.evaluations, 2u);
    EXPECT_TRUE(out.solutions.empty());
}

TEST(Qd, BudgetExhaustedWithSomeSolutionsStillCountsAsSolved) {
    qd::QdConfig cfg;
    cfg.g_qd_max = 0;
    cfg.s_max = 2;
    const auto out = run(goal_at({0, 1}), seeds_at({{0, 0}, {0, 1}}), cfg, 1);
    EXPECT_TRUE(out.solved);
    EXPECT_EQ(out.generations_used, std::optional<std::size_t>(0));
    EXPECT_EQ(out.solutions.size(), 1u);
}

TEST(Qd, EvaluationCountFollowsOffspringRate) {
    qd::QdConfig cfg;
    cfg.g_qd_max = 5;
    cfg.c_lambda = 1.5;
    const auto out = run(goal_at({39, 39}), seeds_at({{0, 0}, {0, 10}, {0, 20}}), cfg, 4, 1);
    EXPECT_FALSE(out.solved);
    EXPECT_EQ(out.evaluations, 3u + 5u * 5u);
    EXPECT_EQ(out.forest.size(), out.evaluations);
}

TEST(Qd, OffspringCount) {
    EXPECT_EQ(qd::inner_offspring_count(1.0, 24), 24u);
    EXPECT_EQ(qd::inner_offspring_count(0.5, 3), 2u);
    EXPECT_EQ(qd::inner_offspring_count(0.1, 1), 1u);
    EXPECT_EQ(qd::inner_offspring_count(1.5, 4), 6u);
}

TEST(Qd, EveryNodeTracesBackToASeed) {
    qd::QdConfig cfg;
    cfg.g_qd_max = 30;
    cfg.s_max = 3;
    const auto out = run(goal_at({10, 12}), seeds_at({{0, 5}, {0, 15}, {0, 25}, {0, 35}}), cfg, 8);
    for (const auto& rec : out.forest.nodes()) {
        EXPECT_LT(rec.root_index, 4u);
        const auto& root = out.forest.get_root(rec.node_id);
        EXPECT_EQ(root.depth, 0u);
        EXPECT_EQ(root.root_index, rec.root_index);
    }
    for (const auto& s : out.solutions) EXPECT_EQ(s.genome, (GridGenome{10, 12}));
    if (out.solved && out.solutions.size() >= cfg.s_max) EXPECT_LE(*out.generations_used, cfg.g_qd_max);
}

TEST(Qd, FirstGenerationSolveMatchesEnumeration) {
    qd::QdConfig cfg;
    cfg.g_qd_max = 1;
    struct Case {
        GridGenome seed, goal;
    };
    // An interior neighbor, a neighbor reached through clamping, a cell three
    // steps away and one out of reach.
    const std::vector<Case> cases = {
        {{20, 20}, {21, 20}}, {{0, 1}, {0, 0}}, {{20, 20}, {20, 17}}, {{20, 20}, {21, 21}}};
    const int trials = 12000;
    for (std::size_t c = 0; c < cases.size(); ++c) {
        const double p = one_step_probability(cases[c].seed, cases[c].goal, 3);
        int solved = 0;
        for (int t = 0; t < trials; ++t) {
            const auto out = run(goal_at(cases[c].goal), seeds_at({cases[c].seed}), cfg, 1000003ull * c + t);
            solved += out.solved;
        }
        const double freq = static_cast<double>(solved) / trials;
        const double sigma = std::sqrt(std::max(p * (1 - p), 1e-12) / trials);
        EXPECT_NEAR(freq, p, 4.5 * sigma + 1e-12) << "case " << c;
    }
    EXPECT_DOUBLE_EQ(one_step_probability({20, 20}, {21, 20}, 3), 1.0 / 12.0);
    EXPECT_DOUBLE_EQ(one_step_probability({0, 1}, {0, 0}, 3), 3.0 / 12.0);
}

TEST(Qd, Deterministic) {
    qd::QdConfig cfg;
    cfg.g_qd_max = 25;
    cfg.s_max = 4;
    const auto seeds = seeds_at({{0, 3}, {0, 13}, {0, 23}});
    const auto a = run(goal_at({9, 19}), seeds, cfg, 77);
    const auto b = run(goal_at({9, 19}), seeds, cfg, 77);
    EXPECT_EQ(a.solved, b.solved);
    EXPECT_EQ(a.generations_used, b.generations_used);
    EXPECT_EQ(a.evaluations, b.evaluations);
    EXPECT_EQ(a.solved_nodes(), b.solved_nodes());
    ASSERT_EQ(a.forest.size(), b.forest.size());
    for (std::size_t i = 0; i < a.forest.size(); ++i) {
        EXPECT_EQ(a.forest.nodes()[i].parent_id, b.forest.nodes()[i].parent_id);
    }
}

TEST(Qd, InvalidSeedsRejected) {
    qd::QdConfig cfg;
    EXPECT_THROW(run(goal_at({1, 1}), {}, cfg, 1), Error);
    std::vector<qd::Seed<GridGenome>> dup = {{{0, 0}, 2}, {{0, 1}, 2}};
    EXPECT_THROW(run(goal_at({1, 1}), dup, cfg, 1), Error);
}

TEST(Qd, InvalidConfigRejected) {
    qd::QdConfig cfg;
    cfg.s_max = 0;
    EXPECT_THROW(run(goal_at({1, 1}), seeds_at({{0, 0}}), cfg, 1), ConfigError);
}

TEST(Qd, EvaluationFailureNamesTheNode) {
    qd::QdConfig cfg;
    const auto seeds = seeds_at({{0, 0}, {-1, 4}});
    try {
        run(goal_at({1, 1}), seeds, cfg, 1);
        FAIL() << "expected EvaluationError";
    } catch (const qd::EvaluationError& e) {
        EXPECT_EQ(e.node(), 1u);
    }
}
