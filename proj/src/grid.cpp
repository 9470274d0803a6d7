#include "faery/grid.hpp"

#include <algorithm>
#include <ostream>
#include <set>

#include "faery/error.hpp"

namespace faery::grid {

Zone block(int row0, int col0, int rows, int cols) {
    Zone z;
    for (int r = row0; r < row0 + rows; ++r) {
        for (int c = col0; c < col0 + cols; ++c) z.push_back({r, c});
    }
    return z;
}

GridWorldSpec::GridWorldSpec(int side, std::array<Zone, 3> zones, std::uint64_t split_seed, int init_row)
    : side_(side), init_row_(init_row), zones_(std::move(zones)) {
    if (side_ < 1) throw ConfigError("grid side must be >= 1");
    if (init_row_ < 0 || init_row_ >= side_) throw ConfigError("grid init_row outside the grid");
    std::set<GridGenome> all;
    for (std::size_t z = 0; z < 3; ++z) {
        if (zones_[z].empty()) throw ConfigError("grid zone Z" + std::to_string(z) + " is empty");
        for (const auto& c : zones_[z]) {
            if (!inside(c)) throw ConfigError("grid zone Z" + std::to_string(z) + " leaves the grid");
            if (!all.insert(c).second) throw ConfigError("grid zones overlap");
        }
    }
    if (zones_[2].size() <= zones_[0].size()) throw ConfigError("grid zone Z2 must be larger than Z0");
    auto row_distance = [this](const Zone& z) {
        int best = side_;
        for (const auto& c : z) best = std::min(best, std::abs(c.row - init_row_));
        return best;
    };
    if (row_distance(zones_[1]) >= std::min(row_distance(zones_[0]), row_distance(zones_[2]))) {
        throw ConfigError("grid zone Z1 must be the zone nearest the initial row");
    }

    Rng rng(derive_seed(split_seed, {key(Stream::dataset)}));
    for (std::size_t z = 0; z < 3; ++z) {
        Zone shuffled = zones_[z];
        std::shuffle(shuffled.begin(), shuffled.end(), rng.engine());
        const std::size_t n_train = (shuffled.size() + 1) / 2;
        train_[z].assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_train));
        test_[z].assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_train), shuffled.end());
        std::sort(train_[z].begin(), train_[z].end());
        std::sort(test_[z].begin(), test_[z].end());
        train_all_.insert(train_all_.end(), train_[z].begin(), train_[z].end());
        test_all_.insert(test_all_.end(), test_[z].begin(), test_[z].end());
    }
}

GridWorldSpec GridWorldSpec::standard(std::uint64_t split_seed) {
    return GridWorldSpec(40, {block(33, 3, 3, 3), block(8, 18, 4, 4), block(26, 13, 6, 14)}, split_seed, 0);
}

int GridWorldSpec::zone_of(GridGenome g) const {
    for (std::size_t z = 0; z < 3; ++z) {
        if (std::find(zones_[z].begin(), zones_[z].end(), g) != zones_[z].end()) return static_cast<int>(z);
    }
    return -1;
}

Task<GridGenome> make_grid_task(const GridWorldSpec& spec, GridGenome goal) {
    const int side = spec.side();
    return {"grid:" + std::to_string(goal.row) + "," + std::to_string(goal.col),
            [goal, side](const GridGenome& g) {
                if (g.row < 0 || g.col < 0 || g.row >= side || g.col >= side) {
                    throw Error("grid genome outside the grid");
                }
                Evaluation ev;
                ev.solved = g == goal;
                ev.fitness = ev.solved ? 1.0 : 0.0;
                ev.behavior = {static_cast<double>(g.row), static_cast<double>(g.col)};
                return ev;
            }};
}

Task<GridGenome> sample_grid_task(const GridWorldSpec& spec, Split split, Rng& rng) {
    const auto& goals = spec.goals(split);
    return make_grid_task(spec, goals[rng.index(goals.size())]);
}

GridGenome grid_mutate(GridGenome g, int side, int step_max, Rng& rng) {
    const auto direction = rng.index(4);
    const int magnitude = static_cast<int>(rng.integer(1, step_max));
    switch (direction) {
    case 0:
        g.col -= magnitude;
        break;
    case 1:
        g.col += magnitude;
        break;
    case 2:
        g.row -= magnitude;
        break;
    default:
        g.row += magnitude;
        break;
    }
    g.row = std::clamp(g.row, 0, side - 1);
    g.col = std::clamp(g.col, 0, side - 1);
    return g;
}

GridGenome random_first_row(const GridWorldSpec& spec, Rng& rng) {
    return {spec.init_row(), static_cast<int>(rng.index(static_cast<std::size_t>(spec.side())))};
}

meta::Domain<GridGenome> grid_domain(const GridWorldSpec& spec, int step_max) {
    const int side = spec.side();
    return {[side, step_max](const GridGenome& g, Rng& rng) { return grid_mutate(g, side, step_max, rng); },
            [spec](Rng& rng) { return random_first_row(spec, rng); }};
}

meta::TaskSampler<GridGenome> grid_sampler(const GridWorldSpec& spec, Split split) {
    return [spec, split](std::size_t count, Rng& rng) {
        std::vector<Task<GridGenome>> tasks;
        tasks.reserve(count);
        for (std::size_t i = 0; i < count; ++i) tasks.push_back(sample_grid_task(spec, split, rng));
        return tasks;
    };
}

AblationConfig AblationConfig::defaults() {
    AblationConfig cfg;
    cfg.meta.mu = 25;
    cfg.meta.lambda = 25;
    cfg.meta.g_outer = 70;
    cfg.meta.m_train = 40;
    cfg.meta.m_test = 0;
    cfg.meta.test_every = 0;
    cfg.meta.qd.g_qd_max = 12;
    cfg.meta.qd.s_max = 25;
    cfg.meta.qd.c_lambda = 1.0;
    cfg.meta.qd.novelty_k = 15;
    cfg.meta.qd.archive_capacity = 5000;
    return cfg;
}

std::array<double, 3> AblationReport::coverage_frequency() const {
    std::array<double, 3> freq{};
    if (runs.empty()) return freq;
    for (const auto& r : runs) {
        for (std::size_t z = 0; z < 3; ++z) freq[z] += r.covered(z) ? 1.0 : 0.0;
    }
    for (auto& f : freq) f /= static_cast<double>(runs.size());
    return freq;
}

AblationReport run_ablation(meta::ObjectiveMode mode, std::size_t runs, const AblationConfig& cfg,
                            std::uint64_t master_seed, std::size_t first_run) {
    const auto spec = GridWorldSpec::standard(cfg.split_seed);
    const auto domain = grid_domain(spec, cfg.step_max);
    const auto train = grid_sampler(spec, Split::train);
    auto meta_cfg = cfg.meta;
    meta_cfg.objectives = mode;

    AblationReport report;
    report.mode = mode;
    report.runs.resize(runs);
    // Runs are independent; parallelism is spent across runs rather than
    // inside each meta-generation.
    auto inner_cfg = meta_cfg;
    inner_cfg.parallelism = 1;
    parallel_for(runs, meta_cfg.parallelism, [&](std::size_t i) {
        const std::size_t run = first_run + i;
        const auto seed = derive_seed(master_seed, {key(Stream::ablation), static_cast<std::uint64_t>(mode), run});
        auto prior = meta::initial_prior(domain, inner_cfg.mu, seed);
        prior = meta::run_faery<GridGenome>(std::move(prior), train, nullptr, inner_cfg, domain, seed, {});
        AblationRun out;
        out.run = run;
        out.final_prior = prior.genomes;
        for (const auto& g : prior.genomes) {
            const int z = spec.zone_of(g);
            if (z >= 0) ++out.members_in_zone[static_cast<std::size_t>(z)];
        }
        report.runs[i] = std::move(out);
    });
    return report;
}

void write_coverage_header(std::ostream& out) { out << "mode,run,zone,covered,member_count_in_zone\n"; }

void write_coverage_csv(std::ostream& out, const AblationReport& report) {
    for (const auto& r : report.runs) {
        for (std::size_t z = 0; z < 3; ++z) {
            out << meta::to_string(report.mode) << ',' << r.run << ",Z" << z << ',' << (r.covered(z) ? 1 : 0) << ','
                << r.members_in_zone[z] << '\n';
        }
    }
}

void write_positions_header(std::ostream& out) { out << "mode,run,member_index,i,j\n"; }

void write_positions_csv(std::ostream& out, const AblationReport& report) {
    for (const auto& r : report.runs) {
        for (std::size_t m = 0; m < r.final_prior.size(); ++m) {
            out << meta::to_string(report.mode) << ',' << r.run << ',' << m << ',' << r.final_prior[m].row << ','
                << r.final_prior[m].col << '\n';
        }
    }
}

} // namespace faery::grid
