#pragma once

// End-to-end drivers behind the command line: dataset generation, maze
// meta-training with checkpoint/resume, prior evaluation and the grid
// ablation. Every output file is a function of the configuration and the
// master seed only.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "faery/config.hpp"
#include "faery/grid.hpp"
#include "faery/maze.hpp"
#include "faery/meta.hpp"

namespace faery::experiment {

using MazePrior = meta::PriorPopulation<policy::Genome>;

struct DatasetFiles {
    std::filesystem::path train;
    std::filesystem::path test;
    std::size_t train_count = 0;
    std::size_t test_count = 0;
};

/// Generates the pools and writes train.mazes / test.mazes into dir.
DatasetFiles write_dataset(const std::filesystem::path& dir, int n, std::size_t train, std::size_t test,
                           std::uint64_t master_seed);

/// Throws ConfigError when a file is missing or the pools disagree on n.
std::vector<maze::MazeRecord> load_pool(const std::filesystem::path& path, const char* field);

/// Distinct records when count <= pool size, otherwise with replacement.
std::vector<const maze::MazeRecord*> sample_records(std::span<const maze::MazeRecord> pool, std::size_t count,
                                                    Rng& rng);

/// The start-position noise of a maze task depends only on the master seed
/// and the maze's own seed.
Task<policy::Genome> maze_task(const maze::MazeRecord& record, const config::ExperimentConfig& cfg);

meta::TaskSampler<policy::Genome> maze_sampler(std::vector<maze::MazeRecord> pool,
                                               const config::ExperimentConfig& cfg);
meta::Domain<policy::Genome> maze_domain(const config::ExperimentConfig& cfg);

struct TrainOptions {
    /// Continue from <out>/checkpoint.bin when it exists.
    bool resume = false;
    std::ostream* log = nullptr;
};

struct TrainResult {
    MazePrior prior;
    std::size_t start_generation = 0;
    std::vector<meta::MetaGenReport> rows;
};

/// Writes train.csv, test.csv, checkpoint.bin (after every meta-generation),
/// prior.bin, prior.json and summary.json into cfg.output_dir.
TrainResult train(const config::ExperimentConfig& cfg, const TrainOptions& opts = {});

struct EvalOptions {
    std::optional<std::filesystem::path> checkpoint;
    bool scratch = false;
    /// Overrides meta.m_test.
    std::optional<std::size_t> tasks;
};

struct EvalTaskRow {
    std::size_t task = 0;
    std::uint64_t maze_seed = 0;
    bool solved = false;
    std::optional<std::size_t> generations_used;
    std::uint64_t evaluations = 0;
};

struct EvalResult {
    meta::SplitStats stats;
    std::vector<EvalTaskRow> rows;
};

/// QD from the checkpoint prior (or a random population with scratch) on
/// tasks sampled from the test pool. Writes eval.csv and eval_summary.json.
EvalResult evaluate(const config::ExperimentConfig& cfg, const EvalOptions& opts);

struct AblateOptions {
    std::vector<meta::ObjectiveMode> modes = {meta::ObjectiveMode::joint, meta::ObjectiveMode::f0_only,
                                              meta::ObjectiveMode::f1_only};
    std::ostream* log = nullptr;
};

/// Writes ablation_coverage.csv, ablation_positions.csv and
/// ablation_summary.json into cfg.output_dir.
std::vector<grid::AblationReport> ablate(const config::ExperimentConfig& cfg, const AblateOptions& opts = {});

} // namespace faery::experiment
