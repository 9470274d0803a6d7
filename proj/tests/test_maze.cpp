#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "faery/error.hpp"
#include "faery/maze.hpp"
#include "support/oracles.hpp"
#include "support/properties.hpp"

using namespace faery;
using namespace faery::maze;

namespace {

/// 2x2 maze whose only opening joins the start cell to the goal above it.
MazeLayout corridor() {
    MazeLayout m(2);
    m.open({0, 0}, Side::north);
    return m;
}

double point_segment_distance(Vec2 p, const Segment& s) {
    const double vx = s.x1 - s.x0, vy = s.y1 - s.y0;
    const double len2 = vx * vx + vy * vy;
    const double t = std::clamp(((p.x - s.x0) * vx + (p.y - s.y0) * vy) / len2, 0.0, 1.0);
    return std::hypot(p.x - (s.x0 + t * vx), p.y - (s.y0 + t * vy));
}

policy::Genome constant_action_genome(double bias_x, double bias_y) {
    const auto& shape = default_maze_shape();
    std::vector<double> p(shape.parameter_count(), 0.0);
    p[p.size() - 2] = bias_x;
    p[p.size() - 1] = bias_y;
    return policy::Genome(p, {});
}

} // namespace

TEST(MazeGen, SpanningTreesFromRandomSeeds) { EXPECT_EQ(props::check_spanning_trees(150, 3), ""); }

TEST(MazeGen, SingleCell) {
    Rng rng(1);
    const auto m = generate_maze(1, rng);
    EXPECT_EQ(m.open_internal_borders(), 0u);
    EXPECT_EQ(m.start_cell(), m.goal_cell());
    EXPECT_EQ(m.wall_segments().size(), 4u);
}

TEST(MazeGen, DeterministicPerSeed) {
    Rng a(9), b(9), c(10);
    const auto ma = generate_maze(8, a);
    EXPECT_EQ(ma, generate_maze(8, b));
    EXPECT_NE(ma, generate_maze(8, c));
}

TEST(MazeLayout, OuterBordersStayClosed) {
    MazeLayout m(3);
    EXPECT_THROW(m.open({0, 0}, Side::west), Error);
    EXPECT_THROW(m.open({2, 2}, Side::north), Error);
    m.open({1, 1}, Side::east);
    EXPECT_FALSE(m.closed({2, 1}, Side::west));
}

TEST(MazeLayout, HexRoundTrip) {
    for (int n : {1, 2, 5, 8}) {
        Rng rng(static_cast<std::uint64_t>(n));
        const auto m = generate_maze(n, rng);
        EXPECT_EQ(MazeLayout::from_canonical_hex(n, m.canonical_hex()), m);
    }
    EXPECT_THROW(MazeLayout::from_canonical_hex(2, "f"), DimensionMismatch);
    EXPECT_THROW(MazeLayout::from_canonical_hex(2, "zz"), Error);
}

TEST(MazeLayout, WallSegmentsAreUnique) {
    Rng rng(4);
    const auto m = generate_maze(6, rng);
    const auto segs = m.wall_segments();
    std::set<std::array<double, 4>> seen;
    for (const auto& s : segs) EXPECT_TRUE(seen.insert({s.x0, s.y0, s.x1, s.y1}).second);
    // A perfect maze on n^2 cells has 2n(n+1) borders of which n^2 - 1 are open.
    EXPECT_EQ(segs.size(), 2u * 6 * 7 - 35);
}

TEST(MazeLayout, RenderMarksStartAndGoal) {
    const auto text = render(corridor());
    EXPECT_EQ(text, "+---+---+\n| G |   |\n+   +---+\n| S |   |\n+---+---+\n");
}

TEST(Rangefinder, WallAtPointThree) {
    MazeWorld w(MazeLayout(8), {});
    EXPECT_DOUBLE_EQ(w.range_max(), 0.8);
    EXPECT_NEAR(w.rangefinder({0.3, 0.5}, {-1.0, 0.0}), 0.3, 1e-12);
    EXPECT_NEAR(w.rangefinder({0.3, 0.5}, {1.0, 0.0}), 0.7, 1e-12);
}

TEST(Rangefinder, ClampsToRangeMax) {
    MazeLayout m(8);
    for (int x = 0; x < 7; ++x) m.open({x, 0}, Side::east);
    MazeWorld w(m, {});
    EXPECT_DOUBLE_EQ(w.rangefinder({0.5, 0.5}, {1.0, 0.0}), 0.8);
}

TEST(Rangefinder, AgreesWithBruteForce) { EXPECT_EQ(props::check_rangefinders(12, 150, 21), ""); }

TEST(Observation, HeadingAtRestIsPlusX) {
    EXPECT_EQ(MazeWorld::heading({0.0, 0.0}), (Vec2{1.0, 0.0}));
    const auto h = MazeWorld::heading({0.0, -2.0});
    EXPECT_DOUBLE_EQ(h.x, 0.0);
    EXPECT_DOUBLE_EQ(h.y, -1.0);
}

TEST(Step, ZeroActionAtRestStaysPut) {
    MazeWorld w(MazeLayout(4), {});
    const auto s0 = w.initial_state();
    const auto r = w.step(s0, {0.0, 0.0});
    EXPECT_EQ(r.state.position, s0.position);
    EXPECT_EQ(r.state.velocity, (Vec2{0.0, 0.0}));
    EXPECT_EQ(r.state.step, 1u);
    EXPECT_EQ(r.reward, 0.0);
    EXPECT_FALSE(r.terminated);
    EXPECT_EQ(r.observation.bumper_left, 0.0);
    EXPECT_EQ(r.observation.bumper_right, 0.0);
}

TEST(Step, HeadOnContactTriggersBothBumpers) {
    MazeWorld w(MazeLayout(4), {});
    MazeSimState s;
    s.position = {0.88, 0.5};
    s.velocity = {0.5, 0.0};
    const auto r = w.step(s, {1.0, 0.0});
    EXPECT_NEAR(r.state.position.x, 0.9, 1e-12);
    EXPECT_EQ(r.state.velocity.x, 0.0);
    EXPECT_EQ(r.observation.bumper_left, 1.0);
    EXPECT_EQ(r.observation.bumper_right, 1.0);
}

TEST(Step, GlancingContactOnTheRight) {
    MazeWorld w(MazeLayout(4), {});
    MazeSimState s;
    s.position = {0.88, 0.5};
    s.velocity = {0.5, 0.5};
    const auto r = w.step(s, {0.0, 0.0});
    EXPECT_EQ(r.observation.bumper_left, 0.0);
    EXPECT_EQ(r.observation.bumper_right, 1.0);
    EXPECT_GT(r.state.position.y, 0.5);
}

TEST(Step, BodyFrameActionFollowsTheStoredHeading) {
    MazeWorld w(MazeLayout(4), {});
    MazeSimState s;
    s.position = {2.5, 2.5};
    s.heading = {0.0, 1.0};
    // Forward along +y, then left of +y is -x.
    const auto fwd = w.step(s, {1.0, 0.0});
    EXPECT_NEAR(fwd.state.velocity.x, 0.0, 1e-15);
    EXPECT_NEAR(fwd.state.velocity.y, 0.1, 1e-15);
    EXPECT_NEAR(fwd.state.heading.y, 1.0, 1e-15);
    const auto left = w.step(s, {0.0, 1.0});
    EXPECT_NEAR(left.state.velocity.x, -0.1, 1e-15);
    EXPECT_NEAR(left.state.velocity.y, 0.0, 1e-15);
    EXPECT_NEAR(left.state.heading.x, -1.0, 1e-15);

    MazeParams world;
    world.action_frame = ActionFrame::world;
    const auto r = MazeWorld(MazeLayout(4), world).step(s, {1.0, 0.0});
    EXPECT_NEAR(r.state.velocity.x, 0.1, 1e-15);
    EXPECT_NEAR(r.state.velocity.y, 0.0, 1e-15);
}

TEST(Step, HeadingIsKeptAtRest) {
    MazeWorld w(MazeLayout(8), {});
    MazeSimState s;
    s.position = {2.5, 2.3};
    s.heading = {0.0, -1.0};
    const auto r = w.step(s, {0.0, 0.0});
    EXPECT_EQ(r.state.heading, (Vec2{0.0, -1.0}));
    // The forward rangefinder still looks down at the wall 0.3 below.
    EXPECT_NEAR(r.observation.range_0, 0.3, 1e-12);
}

TEST(Step, RobotKeepsClearOfWallsAndUsesOpenBorders) {
    MazeParams params;
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        Rng rng(seed);
        const auto layout = generate_maze(5, rng);
        MazeWorld w(layout, params);
        auto s = w.initial_state();
        for (int t = 0; t < 1500; ++t) {
            const Vec2 a{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
            const auto r = w.step(s, a);
            for (const auto& seg : w.segments()) {
                ASSERT_GE(point_segment_distance(r.state.position, seg), params.radius - 1e-9)
                    << "seed " << seed << " step " << t;
            }
            const Cell from{static_cast<int>(std::floor(s.position.x)), static_cast<int>(std::floor(s.position.y))};
            const Cell to{static_cast<int>(std::floor(r.state.position.x)),
                          static_cast<int>(std::floor(r.state.position.y))};
            if (from != to && std::abs(from.x - to.x) + std::abs(from.y - to.y) == 1) {
                const Side side = to.x > from.x   ? Side::east
                                  : to.x < from.x ? Side::west
                                  : to.y > from.y ? Side::north
                                                  : Side::south;
                ASSERT_FALSE(layout.closed(from, side)) << "crossed a wall at step " << t;
            }
            s = r.state;
        }
    }
}

TEST(Goal, InsideGoalCellOnly) {
    MazeWorld w(MazeLayout(4), {});
    EXPECT_TRUE(w.in_goal({0.5, 3.5}));
    EXPECT_TRUE(w.in_goal({1.0, 3.0}));
    EXPECT_FALSE(w.in_goal({0.5, 2.99}));
    EXPECT_FALSE(w.in_goal({1.01, 3.5}));
}

TEST(Episode, ZeroPolicyNeverMoves) {
    MazeWorld w(corridor(), {});
    const auto g = policy::Genome::zeros(default_maze_shape().parameter_count());
    const auto r = run_episode(w, g, default_maze_shape(), {});
    EXPECT_FALSE(r.evaluation.solved);
    EXPECT_EQ(r.evaluation.fitness, 0.0);
    EXPECT_EQ(r.steps, w.params().episode_length);
    EXPECT_EQ(r.evaluation.behavior, (std::vector<double>{0.25, 0.25}));
}

TEST(Episode, CorridorFitnessIsDiscountAtArrival) {
    MazeParams params;
    params.action_frame = ActionFrame::world;
    MazeWorld w(corridor(), params);
    const auto g = constant_action_genome(0.0, 1.0);
    const auto r = run_episode(w, g, default_maze_shape(), {});

    // Straight-line integration of the damped point mass.
    const double a = std::tanh(1.0);
    double v = 0.0, y = 0.5;
    std::size_t k = 0;
    while (y < 1.0) {
        v = params.damping * v + params.dt * params.force_scale * a;
        y += params.dt * v;
        ++k;
    }
    EXPECT_TRUE(r.evaluation.solved);
    EXPECT_EQ(r.steps, k);
    EXPECT_NEAR(r.evaluation.fitness, std::pow(params.gamma, static_cast<double>(k - 1)), 1e-12);
    EXPECT_NEAR(r.final_position.x, 0.5, 1e-12);
    EXPECT_NEAR(r.evaluation.behavior[1], r.final_position.y / 2.0, 1e-15);
}

TEST(Episode, PushingIntoAWallNeverSolves) {
    MazeWorld w(corridor(), {});
    const auto r = run_episode(w, constant_action_genome(1.0, 0.0), default_maze_shape(), {});
    EXPECT_FALSE(r.evaluation.solved);
    EXPECT_NEAR(r.final_position.x, 0.9, 1e-12);
}

TEST(Task, RepeatableAndNoiseSeeded) {
    Rng rng(3);
    const auto layout = generate_maze(4, rng);
    const auto& shape = default_maze_shape();
    const auto g = policy::Genome::uniform(shape.parameter_count(), {}, rng);
    MazeParams params;
    params.init_noise = 0.05;
    const auto t1 = make_task(layout, params, shape, 17);
    const auto t2 = make_task(layout, params, shape, 17);
    const auto e1 = t1.evaluate(g);
    const auto e2 = t1.evaluate(g);
    EXPECT_EQ(e1.fitness, e2.fitness);
    EXPECT_EQ(e1.behavior, e2.behavior);
    EXPECT_EQ(e1.behavior, t2.evaluate(g).behavior);
    // A motionless policy ends where it starts, exposing the start offset.
    const auto still = policy::Genome::zeros(shape.parameter_count());
    const auto a = make_task(layout, params, shape, 17).evaluate(still).behavior;
    const auto b = make_task(layout, params, shape, 18).evaluate(still).behavior;
    EXPECT_NE(a, b);
    EXPECT_NEAR(a[0], 0.125, 0.4 / 4);
}

TEST(Task, WrongGenomeSizeRejected) {
    const auto task = make_task(corridor(), {}, default_maze_shape(), 1);
    EXPECT_THROW(task.evaluate(policy::Genome::zeros(10)), DimensionMismatch);
}

TEST(Params, Validation) {
    MazeParams p;
    EXPECT_NO_THROW(p.validate());
    p.gamma = 0.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = MazeParams{};
    p.force_scale = 50.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = MazeParams{};
    p.radius = 0.5;
    EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Dataset, FullSizePoolsAreDistinctAndDisjoint) {
    const auto ds = generate_dataset(8, 1200, 200, 7);
    ASSERT_EQ(ds.train.size(), 1200u);
    ASSERT_EQ(ds.test.size(), 200u);
    std::set<std::string> seen;
    for (const auto* pool : {&ds.train, &ds.test}) {
        for (const auto& r : *pool) {
            EXPECT_EQ(r.n, 8);
            EXPECT_TRUE(seen.insert(r.layout.canonical_hex()).second);
        }
    }
    const auto again = generate_dataset(8, 1200, 200, 7);
    EXPECT_EQ(again.test.back().layout, ds.test.back().layout);
}

TEST(Dataset, PigeonholeFailure) {
    // Only two perfect 2x2 mazes exist from a DFS rooted in a corner.
    EXPECT_NO_THROW(generate_dataset(2, 1, 1, 0));
    EXPECT_THROW(generate_dataset(2, 2, 1, 0), Error);
    EXPECT_THROW(generate_dataset(1, 1, 1, 0), Error);
    EXPECT_THROW(generate_dataset(8, 0, 1, 0), ConfigError);
}

TEST(Dataset, FileRoundTrip) {
    const auto ds = generate_dataset(5, 20, 5, 2);
    std::stringstream buf;
    write_mazes(buf, ds.train);
    const auto back = read_mazes(buf);
    ASSERT_EQ(back.size(), ds.train.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        EXPECT_EQ(back[i].seed, ds.train[i].seed);
        EXPECT_EQ(back[i].layout, ds.train[i].layout);
    }
}

TEST(Dataset, MalformedFilesRejected) {
    std::stringstream bad_header("mazes 1\n");
    EXPECT_THROW(read_mazes(bad_header), Error);
    std::stringstream bad_version("faery-mazes 9\n");
    EXPECT_THROW(read_mazes(bad_version), Error);
    std::stringstream bad_row("faery-mazes 1\n2 5 zz 0 0 0 1\n");
    EXPECT_THROW(read_mazes(bad_row), Error);
    std::stringstream short_row("faery-mazes 1\n2 5\n");
    EXPECT_THROW(read_mazes(short_row), Error);
}
