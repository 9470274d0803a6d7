#pragma once

// Procedural perfect mazes and a point-robot navigation simulator.
//
// World coordinates: an n x n maze spans [0, n] x [0, n], cell (x, y) covers
// [x, x+1] x [y, y+1], row 0 is the bottom. The robot starts in the bottom-left
// cell and must reach the top-left cell.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "faery/policy.hpp"
#include "faery/rng.hpp"
#include "faery/task.hpp"

namespace faery::maze {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Vec2&) const = default;
};

struct Cell {
    int x = 0;
    int y = 0;

    bool operator==(const Cell&) const = default;
};

enum class Side : std::uint8_t { north = 1, east = 2, south = 4, west = 8 };

/// Axis-aligned wall segment, (x0, y0) <= (x1, y1).
struct Segment {
    double x0, y0, x1, y1;

    bool vertical() const { return x0 == x1; }
};

class MazeLayout {
public:
    /// Every border closed.
    explicit MazeLayout(int n);

    int n() const { return n_; }
    Cell start_cell() const { return {0, 0}; }
    Cell goal_cell() const { return {0, n_ - 1}; }

    bool closed(Cell c, Side s) const;
    /// Opens the border and its mirror in the neighbouring cell. Outer borders
    /// cannot be opened.
    void open(Cell c, Side s);

    std::size_t open_internal_borders() const;

    /// Row-major over cells starting at the bottom row; two bits per cell
    /// (east closed, south closed), packed MSB-first and written as hex.
    std::string canonical_hex() const;
    static MazeLayout from_canonical_hex(int n, const std::string& hex);

    /// One segment per closed border, each listed once.
    std::vector<Segment> wall_segments() const;

    bool operator==(const MazeLayout&) const = default;

private:
    std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * n_ + c.x; }

    int n_;
    std::vector<std::uint8_t> closed_;
};

/// Depth-first search with backtracking from the start cell.
MazeLayout generate_maze(int n, Rng& rng);

/// ASCII drawing, top row first; S marks the start cell and G the goal.
std::string render(const MazeLayout& layout);

/// Frame of the 2-d force action: fixed world axes, or (forward, left)
/// relative to the robot's heading.
enum class ActionFrame { world, body };

struct MazeParams {
    double dt = 0.1;
    double damping = 0.9;
    double force_scale = 1.0;
    double radius = 0.1;
    std::size_t episode_length = 1000;
    double gamma = 0.99;
    /// Standard deviation of the initial position perturbation.
    double init_noise = 1e-3;
    /// Rangefinder reach as a fraction of the maze side.
    double range_fraction = 0.1;
    ActionFrame action_frame = ActionFrame::body;

    void validate() const;
};

struct MazeSimState {
    Vec2 position;
    Vec2 velocity;
    /// Unit facing direction: follows the velocity, kept while at rest.
    Vec2 heading{1.0, 0.0};
    std::size_t step = 0;
};

struct MazeObservation {
    double bumper_left = 0.0;
    double bumper_right = 0.0;
    double range_m45 = 0.0;
    double range_0 = 0.0;
    double range_p45 = 0.0;

    std::array<double, 5> as_array() const { return {bumper_left, bumper_right, range_m45, range_0, range_p45}; }
};

struct StepResult {
    MazeSimState state;
    MazeObservation observation;
    double reward = 0.0;
    bool terminated = false;
};

class MazeWorld {
public:
    MazeWorld(MazeLayout layout, MazeParams params);

    const MazeLayout& layout() const { return layout_; }
    const MazeParams& params() const { return params_; }
    double range_max() const { return range_max_; }
    const std::vector<Segment>& segments() const { return segments_; }

    /// Robot at rest in the centre of the start cell, shifted by `offset`.
    MazeSimState initial_state(Vec2 offset = {}) const;
    /// Observation without bumper contacts.
    MazeObservation observe(const MazeSimState& state) const;

    StepResult step(const MazeSimState& state, Vec2 action) const;

    /// Distance along `direction` (unit) to the nearest wall, clamped to range_max.
    double rangefinder(Vec2 origin, Vec2 direction) const;
    bool in_goal(Vec2 p) const;
    /// Unit velocity direction, or `fallback` when nearly at rest.
    static Vec2 heading(Vec2 velocity, Vec2 fallback = {1.0, 0.0});

private:
    const std::vector<std::size_t>& nearby(Vec2 p) const;
    /// Moves p along one axis by delta, stopping at the first wall contact.
    double move_axis(Vec2 p, double delta, bool along_x, bool& blocked) const;

    MazeLayout layout_;
    MazeParams params_;
    double range_max_;
    std::vector<Segment> segments_;
    std::vector<std::vector<std::size_t>> nearby_;
};

inline const policy::NetworkShape& default_maze_shape() {
    static const policy::NetworkShape shape{5, {10, 10, 10}, 2};
    return shape;
}

struct EpisodeResult {
    Evaluation evaluation;
    std::size_t steps = 0;
    Vec2 final_position;
};

/// Closed-loop episode. Fitness is the discounted reward sum, behavior the
/// final position divided by n, solved iff the goal cell was entered.
EpisodeResult run_episode(const MazeWorld& world, const policy::Genome& genome, const policy::NetworkShape& shape,
                          Vec2 start_offset);

/// Task over one layout. The start perturbation is drawn once from
/// `noise_seed`, so repeated evaluations of a genome are identical.
Task<policy::Genome> make_task(const MazeLayout& layout, const MazeParams& params, const policy::NetworkShape& shape,
                               std::uint64_t noise_seed, std::string name = "maze");

struct MazeRecord {
    int n = 0;
    std::uint64_t seed = 0;
    MazeLayout layout{1};
};

struct MazeDataset {
    std::vector<MazeRecord> train;
    std::vector<MazeRecord> test;
};

/// Distinct layouts, split into disjoint train and test pools. Throws Error
/// when the generator cannot produce enough distinct mazes.
MazeDataset generate_dataset(int n, std::size_t count_train, std::size_t count_test, std::uint64_t master_seed);

inline constexpr int kMazeFileVersion = 1;

void write_mazes(std::ostream& out, const std::vector<MazeRecord>& records);
/// Throws Error on malformed input or a version mismatch.
std::vector<MazeRecord> read_mazes(std::istream& in);

} // namespace faery::maze
