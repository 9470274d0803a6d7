// Acceptance runner: prints one PASS/FAIL line per criterion and exits
// non-zero when a criterion fails that was not declared as an expected
// failure with --expect-fail.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "faery/config.hpp"
#include "faery/experiment.hpp"
#include "faery/grid.hpp"
#include "faery/meta.hpp"
#include "faery/parallel.hpp"
#include "faery/policy.hpp"
#include "faery/report.hpp"
#include "support/oracles.hpp"
#include "support/properties.hpp"

namespace fs = std::filesystem;
using namespace faery;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Options {
    std::uint64_t seed = 20240601;
    std::size_t parallelism = 0;
    std::size_t grid_runs = 15;
    fs::path work = fs::temp_directory_path() / "faery_acceptance";
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string fmt(double v) { return report::format_number(v); }

Outcome reference_scores(const Options&) {
    const auto fig = oracle::reference_forest();
    const std::vector<meta::InstanceLineage> inst = {{&fig.forest, fig.solved}};
    const auto s = meta::compute_meta_scores(std::span<const meta::InstanceLineage>(inst), 3);
    const bool ok = s[0] == meta::MetaScore{1, -2.0} && s[1] == meta::MetaScore{2, -3.5} &&
                    s[2] == meta::MetaScore{2, -3.0};
    std::ostringstream d;
    d << "f0 = (" << s[0].f0 << ", " << s[1].f0 << ", " << s[2].f0 << "), f1 = (" << fmt(s[0].f1) << ", "
      << fmt(s[1].f1) << ", " << fmt(s[2].f1) << ")";
    return {ok, d.str()};
}

Outcome grid_ablation(const Options& o) {
    auto cfg = grid::AblationConfig::defaults();
    cfg.meta.parallelism = o.parallelism == 0 ? default_parallelism() : o.parallelism;
    using meta::ObjectiveMode;
    const auto joint = grid::run_ablation(ObjectiveMode::joint, o.grid_runs, cfg, o.seed);
    const auto f0 = grid::run_ablation(ObjectiveMode::f0_only, o.grid_runs, cfg, o.seed);
    const auto f1 = grid::run_ablation(ObjectiveMode::f1_only, o.grid_runs, cfg, o.seed);

    std::size_t joint_ok = 0, f0_ok = 0, f1_ok = 0;
    for (const auto& r : joint.runs) joint_ok += r.all_covered();
    for (const auto& r : f0.runs) f0_ok += !(r.covered(0) && r.covered(1));
    for (const auto& r : f1.runs) f1_ok += r.covered(1) && !r.covered(0) && !r.covered(2);

    // Thresholds scale with the run count: at most 3 of 15 joint failures,
    // at most 2 of 15 for the single-objective modes.
    const double n = static_cast<double>(o.grid_runs);
    const auto need_joint = static_cast<std::size_t>(std::ceil(12.0 / 15.0 * n - 1e-9));
    const auto need_single = static_cast<std::size_t>(std::ceil(13.0 / 15.0 * n - 1e-9));
    std::ostringstream d;
    d << "joint covers all zones in " << joint_ok << "/" << o.grid_runs << " (need " << need_joint << "), f1_only "
      << "trapped in Z1 in " << f1_ok << "/" << o.grid_runs << " (need " << need_single << "), f0_only misses Z0 or "
      << "Z1 in " << f0_ok << "/" << o.grid_runs << " (need " << need_single << ")";
    auto freq = [](const grid::AblationReport& r) {
        const auto f = r.coverage_frequency();
        return fmt(f[0]) + "/" + fmt(f[1]) + "/" + fmt(f[2]);
    };
    d << "; zone coverage Z0/Z1/Z2 joint " << freq(joint) << ", f0_only " << freq(f0) << ", f1_only " << freq(f1);
    return {joint_ok >= need_joint && f1_ok >= need_single && f0_ok >= need_single, d.str()};
}

Outcome mazes(const Options& o) {
    const auto dir = o.work / "mazes8";
    fs::remove_all(dir);
    const auto data = experiment::write_dataset(dir, 8, 120, 40, o.seed);
    config::ExperimentConfig cfg;
    cfg.seed = o.seed;
    cfg.parallelism = o.parallelism;
    cfg.output_dir = dir / "run";
    cfg.dataset = {8, 120, 40};
    cfg.train_file = data.train;
    cfg.test_file = data.test;
    cfg.meta.mu = 24;
    cfg.meta.lambda = 24;
    cfg.meta.m_train = 8;
    cfg.meta.m_test = 8;
    cfg.meta.g_outer = 30;
    cfg.meta.qd.g_qd_max = 100;
    experiment::TrainOptions opts;
    opts.log = &std::cerr;
    const auto res = experiment::train(cfg, opts);

    std::vector<meta::SplitStats> test;
    for (const auto& r : res.rows) {
        if (r.test) test.push_back(*r.test);
    }
    if (test.size() < 6) return {false, "too few test rows"};
    const auto& base = test.front();
    const auto& last = test.back();
    double tail = 0.0;
    std::size_t tail_n = 0;
    for (std::size_t i = test.size() - 5; i < test.size(); ++i) {
        if (!std::isnan(test[i].mean_generations_over_solved)) {
            tail += test[i].mean_generations_over_solved;
            ++tail_n;
        }
    }
    const double tail_mean = tail_n == 0 ? std::nan("") : tail / static_cast<double>(tail_n);
    const bool ratio_ok = last.solved_ratio >= 0.95 && base.solved_ratio <= last.solved_ratio;
    const double base_gens = std::isnan(base.mean_generations_over_solved)
                                 ? static_cast<double>(cfg.meta.qd.g_qd_max)
                                 : base.mean_generations_over_solved;
    const bool speed_ok = tail_n > 0 && tail_mean <= 0.5 * base_gens;
    std::ostringstream d;
    d << "test solved_ratio " << fmt(base.solved_ratio) << " -> " << fmt(last.solved_ratio)
      << ", mean generations " << fmt(base.mean_generations_over_solved) << " -> last-5 mean " << fmt(tail_mean);
    return {ratio_ok && speed_ok, d.str()};
}

Outcome oracles(const Options& o) {
    std::vector<std::string> failures;
    auto run = [&](const std::string& what, const std::string& err) {
        if (!err.empty()) failures.push_back(what + ": " + err);
    };
    run("selection", props::check_selection(200, 200, o.seed));
    run("novelty", props::check_novelty(200, 500, o.seed + 1));
    run("rangefinders", props::check_rangefinders(20, 1000, o.seed + 2));
    run("forest depths", props::check_forest_depths(20, 10000, o.seed + 3));
    if (failures.empty()) {
        return {true, "sorting/selection 200 instances, novelty 200 instances (K in {1,2,15}), 20x1000 rangefinder "
                      "poses, 20 forests up to 10^4 nodes"};
    }
    std::string d;
    for (const auto& f : failures) d += (d.empty() ? "" : "; ") + f;
    return {false, d};
}

Outcome structure(const Options& o) {
    std::vector<std::string> failures;
    if (auto e = props::check_spanning_trees(1000, o.seed); !e.empty()) failures.push_back("mazes: " + e);

    Rng rng(o.seed);
    const policy::Bounds bounds{-1.0, 1.0};
    const policy::MutationConfig mut{15.0, 0.5};
    auto g = policy::Genome::uniform(8, bounds, rng);
    std::size_t draws = 0;
    bool bounded = true;
    while (draws < 100000 && bounded) {
        g = policy::mutate(g, mut, rng);
        for (double x : g.params()) bounded = bounded && bounds.contains(x);
        draws += g.size();
    }
    if (!bounded) failures.push_back("mutation left the bounds after " + std::to_string(draws) + " gene draws");

    // Two short trainings that differ only in worker count.
    const auto dir = o.work / "determinism";
    fs::remove_all(dir);
    const auto data = experiment::write_dataset(dir, 4, 30, 10, o.seed);
    std::vector<fs::path> outs;
    for (std::size_t par : {1u, 8u}) {
        config::ExperimentConfig cfg;
        cfg.seed = o.seed;
        cfg.parallelism = par;
        cfg.output_dir = dir / ("p" + std::to_string(par));
        cfg.dataset = {4, 30, 10};
        cfg.train_file = data.train;
        cfg.test_file = data.test;
        cfg.maze.episode_length = 150;
        cfg.meta.mu = 8;
        cfg.meta.lambda = 8;
        cfg.meta.m_train = 8;
        cfg.meta.m_test = 4;
        cfg.meta.g_outer = 3;
        cfg.meta.qd.g_qd_max = 10;
        experiment::train(cfg);
        outs.push_back(cfg.output_dir);
    }
    for (const char* f : {"checkpoint.bin", "prior.bin", "train.csv", "test.csv", "summary.json"}) {
        const auto a = slurp(outs[0] / f);
        if (a.empty() || a != slurp(outs[1] / f)) failures.push_back(std::string(f) + " differs between 1 and 8 workers");
    }
    if (failures.empty()) {
        return {true, "1000 seeds x n in {4,8,10} spanning trees, " + std::to_string(draws) +
                          " bounded mutation draws, byte-identical outputs at 1 vs 8 workers"};
    }
    std::string d;
    for (const auto& f : failures) d += (d.empty() ? "" : "; ") + f;
    return {false, d};
}

Outcome out_of_scope(const Options&) {
    return {true, "per-task manipulation benchmark tables, cross-task transfer percentages and wall-clock savings "
                  "are not reproduced; no criterion depends on them"};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"FAERY acceptance criteria"};
    Options o;
    std::vector<int> criteria = {1, 2, 4, 5, 6};
    std::vector<int> expect_fail;
    app.add_option("-c,--criterion", criteria, "Criteria to run (3 is slow and opt-in)")->check(CLI::Range(1, 6));
    app.add_option("--expect-fail", expect_fail, "Criteria whose failure is documented and tolerated");
    app.add_option("--seed", o.seed, "Master seed");
    app.add_option("--parallelism", o.parallelism, "Worker threads, 0 = all cores");
    app.add_option("--grid-runs", o.grid_runs, "Runs per objective mode for criterion 2")->check(CLI::PositiveNumber);
    app.add_option("--work-dir", o.work, "Scratch directory for training runs");
    CLI11_PARSE(app, argc, argv);

    const std::map<int, std::pair<const char*, std::function<Outcome(const Options&)>>> table = {
        {1, {"reference-forest meta-scores", reference_scores}},
        {2, {"grid ablation zone coverage", grid_ablation}},
        {3, {"8x8 maze adaptation speed", mazes}},
        {4, {"oracle equivalence", oracles}},
        {5, {"structural properties and determinism", structure}},
        {6, {"out-of-scope results", out_of_scope}},
    };
    const std::set<int> tolerated(expect_fail.begin(), expect_fail.end());
    int hard_failures = 0;
    for (int c : criteria) {
        const auto& [name, fn] = table.at(c);
        const auto t0 = std::chrono::steady_clock::now();
        Outcome r;
        try {
            r = fn(o);
        } catch (const std::exception& e) {
            r = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << (r.pass ? "PASS" : "FAIL") << " criterion " << c << " (" << name << "): " << r.detail << " ["
                  << fmt(std::round(secs * 10) / 10) << " s]";
        if (!r.pass && tolerated.count(c)) std::cout << " (expected failure)";
        std::cout << std::endl;
        if (!r.pass && !tolerated.count(c)) ++hard_failures;
    }
    return hard_failures == 0 ? 0 : 1;
}
