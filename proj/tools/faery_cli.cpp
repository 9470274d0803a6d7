// Command-line front end. Exit codes: 0 success, 2 configuration error,
// 3 runtime failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "faery/config.hpp"
#include "faery/error.hpp"
#include "faery/experiment.hpp"
#include "faery/maze.hpp"

namespace {

using faery::config::ExperimentConfig;
using faery::config::ExperimentKind;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<std::size_t> parallelism;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--config", a.config_path, "Experiment configuration (JSON)");
    cmd->add_option("--seed", a.seed, "Master seed");
    cmd->add_option("--out", a.out, "Output directory");
    cmd->add_option("--parallelism", a.parallelism, "Worker threads (0 = all cores)");
}

ExperimentConfig resolve(const CommonArgs& a, std::initializer_list<ExperimentKind> accepted, ExperimentKind fallback) {
    ExperimentConfig cfg;
    if (!a.config_path.empty()) {
        cfg = faery::config::load(a.config_path);
        bool ok = false;
        for (auto k : accepted) ok = ok || cfg.kind == k;
        if (!ok) throw faery::ConfigError("kind: '" + faery::config::to_string(cfg.kind) + "' is not valid here");
    } else {
        cfg.kind = fallback;
    }
    if (a.seed) cfg.seed = *a.seed;
    if (!a.out.empty()) cfg.output_dir = a.out;
    if (a.parallelism) cfg.parallelism = *a.parallelism;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Meta-learned prior populations for quality-diversity search"};
    app.require_subcommand(1);

    CommonArgs gen_args;
    int gen_n = 0;
    std::optional<std::size_t> gen_train, gen_test;
    auto* gen = app.add_subcommand("generate-dataset", "Write disjoint train/test maze pools");
    add_common(gen, gen_args);
    gen->add_option("--n", gen_n, "Maze side length");
    gen->add_option("--train", gen_train, "Train pool size");
    gen->add_option("--test", gen_test, "Test pool size");

    CommonArgs train_args;
    bool resume = false;
    auto* train = app.add_subcommand("train", "Meta-train a prior population on mazes");
    add_common(train, train_args);
    train->add_flag("--resume", resume, "Continue from <out>/checkpoint.bin when present");

    CommonArgs eval_args;
    std::string eval_ckpt;
    bool scratch = false;
    std::optional<std::size_t> eval_tasks;
    auto* eval = app.add_subcommand("eval", "Run QD from a prior (or from scratch) on test mazes");
    add_common(eval, eval_args);
    eval->add_option("--checkpoint", eval_ckpt, "Prior checkpoint (.bin)");
    eval->add_flag("--scratch", scratch, "Seed QD with a random population instead of a prior");
    eval->add_option("--tasks", eval_tasks, "Number of test tasks (default meta.m_test)");

    CommonArgs ablate_args;
    std::optional<std::size_t> runs;
    std::string mode = "all";
    auto* ablate = app.add_subcommand("ablate", "Grid-bandit objective ablation");
    add_common(ablate, ablate_args);
    ablate->add_option("--runs", runs, "Runs per mode");
    ablate->add_option("--mode", mode, "joint, f0_only, f1_only or all")
        ->check(CLI::IsMember({"joint", "f0_only", "f1_only", "all"}));

    std::string render_file;
    std::size_t render_index = 0;
    int render_n = 8;
    std::optional<std::uint64_t> render_seed;
    auto* render = app.add_subcommand("render-maze", "Print a maze as ASCII art");
    render->add_option("--dataset", render_file, "Maze file to read from");
    render->add_option("--index", render_index, "Record index within the file");
    render->add_option("--n", render_n, "Side length when generating from --seed");
    render->add_option("--seed", render_seed, "Generate a maze from this seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*gen) {
            auto cfg = resolve(gen_args, {ExperimentKind::maze_meta}, ExperimentKind::maze_meta);
            if (gen_n != 0) cfg.dataset.n = gen_n;
            if (gen_train) cfg.dataset.train = *gen_train;
            if (gen_test) cfg.dataset.test = *gen_test;
            if (!cfg.seed) throw faery::ConfigError("seed: a master seed is required (config field or --seed)");
            if (cfg.dataset.n < 1) throw faery::ConfigError("dataset.n: must be >= 1");
            const auto files = faery::experiment::write_dataset(cfg.output_dir, cfg.dataset.n, cfg.dataset.train,
                                                                cfg.dataset.test, *cfg.seed);
            std::cout << "train pool: " << files.train_count << " mazes -> " << files.train.string() << "\n"
                      << "test pool: " << files.test_count << " mazes -> " << files.test.string() << "\n"
                      << "all " << files.train_count + files.test_count << " layouts distinct\n";
        } else if (*train) {
            auto cfg = resolve(train_args, {ExperimentKind::maze_meta}, ExperimentKind::maze_meta);
            auto result = faery::experiment::train(cfg, {resume, &std::cout});
            std::cout << "wrote " << (std::filesystem::path(cfg.output_dir) / "prior.bin").string() << "\n";
        } else if (*eval) {
            auto cfg = resolve(eval_args,
                               {ExperimentKind::maze_meta, ExperimentKind::qd_single, ExperimentKind::transfer_seed_eval},
                               ExperimentKind::qd_single);
            faery::experiment::EvalOptions opts;
            if (!eval_ckpt.empty()) opts.checkpoint = eval_ckpt;
            opts.scratch = scratch;
            opts.tasks = eval_tasks;
            const auto result = faery::experiment::evaluate(cfg, opts);
            std::cout << "tasks " << result.stats.tasks << ", solved " << result.stats.solved << ", solved_ratio "
                      << result.stats.solved_ratio << ", mean generations over solved "
                      << result.stats.mean_generations_over_solved << "\n";
        } else if (*ablate) {
            auto cfg = resolve(ablate_args, {ExperimentKind::grid_ablation}, ExperimentKind::grid_ablation);
            if (runs) cfg.ablation_runs = *runs;
            faery::experiment::AblateOptions opts;
            if (mode != "all") opts.modes = {faery::meta::parse_objective_mode(mode)};
            opts.log = &std::cout;
            faery::experiment::ablate(cfg, opts);
        } else if (*render) {
            if (!render_file.empty()) {
                std::ifstream in(render_file);
                if (!in) throw faery::ConfigError("--dataset: cannot open " + render_file);
                const auto records = faery::maze::read_mazes(in);
                if (render_index >= records.size()) {
                    throw faery::ConfigError("--index: file holds " + std::to_string(records.size()) + " mazes");
                }
                std::cout << "seed " << records[render_index].seed << "\n"
                          << faery::maze::render(records[render_index].layout);
            } else if (render_seed) {
                if (render_n < 1) throw faery::ConfigError("--n: must be >= 1");
                faery::Rng rng(*render_seed);
                std::cout << faery::maze::render(faery::maze::generate_maze(render_n, rng));
            } else {
                throw faery::ConfigError("render-maze: give --dataset or --seed");
            }
        }
    } catch (const faery::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
