#pragma once

// Grid bandit: a side x side grid, horizon one. A task hides a single goal
// cell drawn from one of three zones; an agent is the cell it picks, which is
// also its behavior descriptor.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "faery/meta.hpp"
#include "faery/rng.hpp"
#include "faery/task.hpp"

namespace faery::grid {

struct GridGenome {
    int row = 0;
    int col = 0;

    bool operator==(const GridGenome&) const = default;
    auto operator<=>(const GridGenome&) const = default;
};

using Zone = std::vector<GridGenome>;

/// Axis-aligned block of cells, rows [row0, row0 + rows), cols [col0, col0 + cols).
Zone block(int row0, int col0, int rows, int cols);

enum class Split { train, test };

class GridWorldSpec {
public:
    /// Zones are Z0, Z1, Z2. Throws ConfigError if zones overlap, leave the
    /// grid, Z2 is not larger than Z0, or Z1 is not the zone nearest the
    /// initial row. Each zone is halved into train/test cells from split_seed.
    GridWorldSpec(int side, std::array<Zone, 3> zones, std::uint64_t split_seed, int init_row = 0);

    /// 40x40 grid with Z1 rows 8-11 x cols 18-21, Z2 rows 26-31 x cols 13-26
    /// and Z0 rows 33-35 x cols 3-5.
    static GridWorldSpec standard(std::uint64_t split_seed = 0);

    int side() const { return side_; }
    int init_row() const { return init_row_; }
    const std::array<Zone, 3>& zones() const { return zones_; }
    const Zone& zone_split(std::size_t z, Split split) const { return split == Split::train ? train_[z] : test_[z]; }
    /// Union over zones of the split's cells.
    const std::vector<GridGenome>& goals(Split split) const { return split == Split::train ? train_all_ : test_all_; }

    bool inside(GridGenome g) const { return g.row >= 0 && g.col >= 0 && g.row < side_ && g.col < side_; }
    /// Zone index containing the cell, or -1.
    int zone_of(GridGenome g) const;

private:
    int side_;
    int init_row_;
    std::array<Zone, 3> zones_;
    std::array<Zone, 3> train_;
    std::array<Zone, 3> test_;
    std::vector<GridGenome> train_all_;
    std::vector<GridGenome> test_all_;
};

Task<GridGenome> make_grid_task(const GridWorldSpec& spec, GridGenome goal);

/// Goal drawn uniformly from the split's cells.
Task<GridGenome> sample_grid_task(const GridWorldSpec& spec, Split split, Rng& rng);

/// One of four directions uniformly, magnitude uniform on {1..step_max},
/// clamped to the grid.
GridGenome grid_mutate(GridGenome g, int side, int step_max, Rng& rng);

/// Cell on init_row with a uniformly random column.
GridGenome random_first_row(const GridWorldSpec& spec, Rng& rng);

meta::Domain<GridGenome> grid_domain(const GridWorldSpec& spec, int step_max);
meta::TaskSampler<GridGenome> grid_sampler(const GridWorldSpec& spec, Split split);

struct AblationConfig {
    meta::MetaConfig meta;
    int step_max = 3;
    std::uint64_t split_seed = 0;

    /// mu = lambda = 25, 70 meta-generations, 40 training tasks each, inner
    /// loops of at most 12 generations that stop after 25 solutions.
    static AblationConfig defaults();
};

struct AblationRun {
    std::size_t run = 0;
    std::vector<GridGenome> final_prior;
    std::array<std::size_t, 3> members_in_zone{};

    bool covered(std::size_t z) const { return members_in_zone[z] > 0; }
    bool all_covered() const { return covered(0) && covered(1) && covered(2); }
};

struct AblationReport {
    meta::ObjectiveMode mode = meta::ObjectiveMode::joint;
    std::vector<AblationRun> runs;

    /// Fraction of runs covering each zone.
    std::array<double, 3> coverage_frequency() const;
};

/// Runs [first_run, first_run + runs) independently; run r uses stream
/// (master, ablation, mode, r) so subsets of runs reproduce exactly.
AblationReport run_ablation(meta::ObjectiveMode mode, std::size_t runs, const AblationConfig& cfg,
                            std::uint64_t master_seed, std::size_t first_run = 0);

void write_coverage_header(std::ostream& out);
/// Rows: mode,run,zone,covered,member_count_in_zone.
void write_coverage_csv(std::ostream& out, const AblationReport& report);
void write_positions_header(std::ostream& out);
/// Rows: mode,run,member_index,i,j.
void write_positions_csv(std::ostream& out, const AblationReport& report);

} // namespace faery::grid
