#include "faery/experiment.hpp"

#include <fstream>
#include <memory>
#include <numeric>
#include <ostream>

#include "faery/checkpoint.hpp"
#include "faery/error.hpp"
#include "faery/report.hpp"

namespace faery::experiment {

namespace fs = std::filesystem;

namespace {

void write_pool(const fs::path& path, const std::vector<maze::MazeRecord>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    maze::write_mazes(out, records);
    if (!out) throw Error("write failed: " + path.string());
}

checkpoint::Checkpoint make_checkpoint(const config::ExperimentConfig& cfg, const MazePrior& prior,
                                       std::size_t next_generation) {
    checkpoint::Checkpoint c;
    c.master_seed = cfg.master_seed();
    c.next_meta_generation = next_generation;
    c.config_fingerprint = config::fingerprint(cfg);
    c.shape = cfg.network_shape();
    c.bounds = cfg.bounds;
    c.genomes = prior.genomes;
    c.scores = prior.scores;
    return c;
}

void check_pool_size(const std::vector<maze::MazeRecord>& pool, int n, const char* field) {
    if (pool.empty()) throw ConfigError(std::string(field) + ": maze pool is empty");
    for (const auto& r : pool) {
        if (r.n != n) {
            throw ConfigError(std::string(field) + ": maze of size " + std::to_string(r.n) +
                              " does not match dataset.n = " + std::to_string(n));
        }
    }
}

} // namespace

DatasetFiles write_dataset(const fs::path& dir, int n, std::size_t train, std::size_t test,
                           std::uint64_t master_seed) {
    const auto ds = maze::generate_dataset(n, train, test, master_seed);
    fs::create_directories(dir);
    DatasetFiles files{dir / "train.mazes", dir / "test.mazes", ds.train.size(), ds.test.size()};
    write_pool(files.train, ds.train);
    write_pool(files.test, ds.test);
    return files;
}

std::vector<maze::MazeRecord> load_pool(const fs::path& path, const char* field) {
    if (path.empty()) throw ConfigError(std::string(field) + ": no maze file configured");
    std::ifstream in(path);
    if (!in) throw ConfigError(std::string(field) + ": cannot open " + path.string());
    return maze::read_mazes(in);
}

std::vector<const maze::MazeRecord*> sample_records(std::span<const maze::MazeRecord> pool, std::size_t count,
                                                    Rng& rng) {
    if (pool.empty() && count > 0) throw Error("sample_records: empty pool");
    std::vector<const maze::MazeRecord*> out;
    out.reserve(count);
    if (count <= pool.size()) {
        std::vector<std::size_t> idx(pool.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t i = 0; i < count; ++i) {
            std::swap(idx[i], idx[i + rng.index(pool.size() - i)]);
            out.push_back(&pool[idx[i]]);
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) out.push_back(&pool[rng.index(pool.size())]);
    }
    return out;
}

Task<policy::Genome> maze_task(const maze::MazeRecord& record, const config::ExperimentConfig& cfg) {
    const auto noise_seed = derive_seed(cfg.master_seed(), {key(Stream::task_noise), record.seed});
    return maze::make_task(record.layout, cfg.maze, cfg.network_shape(), noise_seed,
                           "maze-" + std::to_string(record.seed));
}

meta::TaskSampler<policy::Genome> maze_sampler(std::vector<maze::MazeRecord> pool,
                                               const config::ExperimentConfig& cfg) {
    auto shared = std::make_shared<const std::vector<maze::MazeRecord>>(std::move(pool));
    return [shared, cfg](std::size_t count, Rng& rng) {
        std::vector<Task<policy::Genome>> tasks;
        for (const auto* r : sample_records(*shared, count, rng)) tasks.push_back(maze_task(*r, cfg));
        return tasks;
    };
}

meta::Domain<policy::Genome> maze_domain(const config::ExperimentConfig& cfg) {
    const auto n = cfg.network_shape().parameter_count();
    const auto bounds = cfg.bounds;
    const auto mutation = cfg.mutation;
    meta::Domain<policy::Genome> d;
    d.mutate = [mutation](const policy::Genome& g, Rng& rng) { return policy::mutate(g, mutation, rng); };
    d.random_genome = [n, bounds](Rng& rng) { return policy::Genome::uniform(n, bounds, rng); };
    return d;
}

TrainResult train(const config::ExperimentConfig& cfg_in, const TrainOptions& opts) {
    auto cfg = cfg_in;
    cfg.validate();
    cfg.meta.parallelism = cfg.resolved_parallelism();
    cfg.meta.validate();
    const auto seed = cfg.master_seed();

    auto train_pool = load_pool(cfg.train_file, "maze.train_file");
    check_pool_size(train_pool, cfg.dataset.n, "maze.train_file");
    std::optional<meta::TaskSampler<policy::Genome>> test_sampler;
    if (cfg.meta.m_test > 0) {
        auto test_pool = load_pool(cfg.test_file, "maze.test_file");
        check_pool_size(test_pool, cfg.dataset.n, "maze.test_file");
        test_sampler = maze_sampler(std::move(test_pool), cfg);
    }
    const auto train_sampler = maze_sampler(std::move(train_pool), cfg);
    const auto domain = maze_domain(cfg);

    const fs::path out = cfg.output_dir;
    fs::create_directories(out);
    const auto ckpt_path = out / "checkpoint.bin";

    TrainResult result;
    MazePrior prior;
    std::optional<std::size_t> resume_from;
    if (opts.resume && fs::exists(ckpt_path)) {
        const auto ckpt = checkpoint::load(ckpt_path);
        if (ckpt.master_seed != seed) throw ConfigError("seed: checkpoint was written with a different master seed");
        if (ckpt.config_fingerprint != config::fingerprint(cfg)) {
            throw ConfigError("config: checkpoint was written with a different configuration");
        }
        prior = ckpt.prior();
        result.start_generation = ckpt.next_meta_generation;
        resume_from = result.start_generation;
        if (opts.log) *opts.log << "resuming at meta-generation " << result.start_generation << "\n";
    } else {
        prior = meta::initial_prior(domain, cfg.meta.mu, seed);
    }

    report::ReportWriter writer(out, resume_from);
    meta::ReportSink<policy::Genome> sink = [&](const meta::MetaGenReport& r, const MazePrior& next) {
        writer.append(r);
        checkpoint::save(ckpt_path, make_checkpoint(cfg, next, r.meta_generation + 1));
        result.rows.push_back(r);
        if (opts.log) {
            *opts.log << "meta-generation " << r.meta_generation << ": train solved "
                      << report::format_number(r.train.solved_ratio) << " mean gens "
                      << report::format_number(r.train.mean_generations_over_solved);
            if (r.test) {
                *opts.log << ", test solved " << report::format_number(r.test->solved_ratio) << " mean gens "
                          << report::format_number(r.test->mean_generations_over_solved);
            }
            *opts.log << std::endl;
        }
    };
    result.prior = meta::run_faery<policy::Genome>(std::move(prior), train_sampler,
                                                   test_sampler ? &*test_sampler : nullptr, cfg.meta, domain, seed,
                                                   sink, result.start_generation);

    const auto final_ckpt = make_checkpoint(cfg, result.prior, std::max(cfg.meta.g_outer, result.start_generation));
    checkpoint::save(out / "prior.bin", final_ckpt);
    report::write_json(out / "prior.json", checkpoint::to_json(final_ckpt));
    report::write_json(out / "summary.json", report::summary_json(report::read_reports(out), seed, cfg.meta.g_outer));
    return result;
}

EvalResult evaluate(const config::ExperimentConfig& cfg_in, const EvalOptions& opts) {
    auto cfg = cfg_in;
    cfg.validate();
    const auto seed = cfg.master_seed();
    if (opts.scratch == opts.checkpoint.has_value()) {
        throw ConfigError("eval: give exactly one of a checkpoint or --scratch");
    }
    const auto domain = maze_domain(cfg);
    MazePrior prior;
    if (opts.checkpoint) {
        const auto ckpt = checkpoint::load(*opts.checkpoint);
        if (ckpt.shape != cfg.network_shape()) {
            throw DimensionMismatch("checkpoint network parameters", cfg.network_shape().parameter_count(),
                                    ckpt.shape.parameter_count());
        }
        prior = ckpt.prior();
    } else {
        prior = meta::initial_prior(domain, cfg.meta.mu, seed);
    }

    const std::size_t m = opts.tasks.value_or(cfg.meta.m_test);
    std::vector<maze::MazeRecord> pool;
    if (m > 0) {
        pool = load_pool(cfg.test_file, "maze.test_file");
        check_pool_size(pool, cfg.dataset.n, "maze.test_file");
    }
    auto task_rng = derive_stream(seed, {key(Stream::eval_tasks)});
    const auto records = sample_records(pool, m, task_rng);
    std::vector<Task<policy::Genome>> tasks;
    for (const auto* r : records) tasks.push_back(maze_task(*r, cfg));

    const auto seeds = meta::as_seeds<policy::Genome>(prior.genomes);
    const auto outcomes = meta::run_instances<policy::Genome>(tasks, seeds, cfg.meta.qd, domain.mutate, seed,
                                                              Stream::eval_qd, 0, cfg.resolved_parallelism());
    EvalResult result;
    result.stats = meta::split_stats<policy::Genome>(outcomes);
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        result.rows.push_back({i, records[i]->seed, outcomes[i].solved,
                               outcomes[i].solved ? outcomes[i].generations_used : std::nullopt,
                               outcomes[i].evaluations});
    }

    const fs::path out = cfg.output_dir;
    fs::create_directories(out);
    std::ofstream csv(out / "eval.csv", std::ios::trunc);
    csv << "task,maze_seed,solved,generations_used,evaluations\n";
    for (const auto& r : result.rows) {
        csv << r.task << ',' << r.maze_seed << ',' << (r.solved ? 1 : 0) << ','
            << (r.generations_used ? std::to_string(*r.generations_used) : "") << ',' << r.evaluations << '\n';
    }
    if (!csv) throw Error("cannot write eval.csv");
    auto summary = report::split_json(result.stats);
    summary["format_version"] = report::kReportVersion;
    summary["prior"] = opts.scratch ? std::string("scratch") : opts.checkpoint->string();
    summary["master_seed"] = seed;
    report::write_json(out / "eval_summary.json", summary);
    return result;
}

std::vector<grid::AblationReport> ablate(const config::ExperimentConfig& cfg, const AblateOptions& opts) {
    if (!cfg.seed) throw ConfigError("seed: a master seed is required (config field or --seed)");
    if (cfg.ablation_runs == 0) throw ConfigError("grid.runs: must be positive");
    if (cfg.grid_step_max < 1) throw ConfigError("grid.step_max: must be >= 1");
    const auto acfg = config::ablation_config(cfg);
    std::vector<grid::AblationReport> reports;
    for (auto mode : opts.modes) {
        reports.push_back(grid::run_ablation(mode, cfg.ablation_runs, acfg, *cfg.seed));
        if (opts.log) {
            const auto f = reports.back().coverage_frequency();
            *opts.log << meta::to_string(mode) << ": zone coverage Z0 " << f[0] << ", Z1 " << f[1] << ", Z2 " << f[2]
                      << std::endl;
        }
    }

    const fs::path out = cfg.output_dir;
    fs::create_directories(out);
    std::ofstream cov(out / "ablation_coverage.csv", std::ios::trunc);
    std::ofstream pos(out / "ablation_positions.csv", std::ios::trunc);
    grid::write_coverage_header(cov);
    grid::write_positions_header(pos);
    nlohmann::json summary;
    summary["format_version"] = report::kReportVersion;
    summary["master_seed"] = *cfg.seed;
    summary["runs"] = cfg.ablation_runs;
    for (const auto& r : reports) {
        grid::write_coverage_csv(cov, r);
        grid::write_positions_csv(pos, r);
        const auto f = r.coverage_frequency();
        std::size_t all = 0;
        for (const auto& run : r.runs) all += run.all_covered() ? 1 : 0;
        summary["modes"][meta::to_string(r.mode)] = {
            {"coverage_frequency", {{"Z0", f[0]}, {"Z1", f[1]}, {"Z2", f[2]}}}, {"runs_covering_all", all}};
    }
    if (!cov || !pos) throw Error("cannot write ablation CSVs");
    report::write_json(out / "ablation_summary.json", summary);
    return reports;
}

} // namespace faery::experiment
