#pragma once

// Experiment configuration. A single JSON document, versioned by
// "format_version"; CLI flags override individual fields after loading.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "faery/grid.hpp"
#include "faery/maze.hpp"
#include "faery/meta.hpp"
#include "faery/policy.hpp"

namespace faery::config {

inline constexpr int kConfigVersion = 1;

enum class ExperimentKind { maze_meta, grid_ablation, qd_single, transfer_seed_eval };

std::string to_string(ExperimentKind kind);

struct DatasetConfig {
    int n = 8;
    std::size_t train = 1200;
    std::size_t test = 200;
};

/// Optional replacements for the grid ablation's own loop settings.
struct GridLoopOverrides {
    std::optional<std::size_t> mu;
    std::optional<std::size_t> lambda;
    std::optional<std::size_t> g_outer;
    std::optional<std::size_t> m_train;
    std::optional<std::size_t> g_qd_max;
    std::optional<std::size_t> s_max;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::maze_meta;
    std::optional<std::uint64_t> seed;
    /// 0 selects the number of hardware threads.
    std::size_t parallelism = 0;
    std::filesystem::path output_dir = "out";

    DatasetConfig dataset;
    std::filesystem::path train_file;
    std::filesystem::path test_file;
    maze::MazeParams maze;

    std::vector<std::size_t> hidden = {10, 10, 10};
    policy::Bounds bounds;
    policy::MutationConfig mutation;
    meta::MetaConfig meta;

    std::size_t ablation_runs = 15;
    int grid_step_max = 3;
    std::uint64_t grid_split_seed = 0;
    GridLoopOverrides grid_loop;

    policy::NetworkShape network_shape() const { return {5, hidden, 2}; }
    std::size_t resolved_parallelism() const;
    std::uint64_t master_seed() const;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Throws ConfigError with the JSON path of the first bad field.
ExperimentConfig from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig load(const std::filesystem::path& path);

/// Hash of every field that influences results; parallelism, output
/// directory and g_outer are excluded so a run may be resumed or extended.
std::uint64_t fingerprint(const ExperimentConfig& cfg);

/// Grid ablation defaults overlaid with the fields of cfg that apply.
grid::AblationConfig ablation_config(const ExperimentConfig& cfg);

} // namespace faery::config
