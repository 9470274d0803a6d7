#pragma once

// The outer meta-learning loop. Each meta-generation seeds M QD instances with
// the prior plus its offspring, credits every solution to the prior candidate
// rooting its lineage, and Pareto-selects the next prior on
// (solution count, negated mean solution depth).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "faery/evo.hpp"
#include "faery/lineage.hpp"
#include "faery/parallel.hpp"
#include "faery/policy.hpp"
#include "faery/qd.hpp"
#include "faery/rng.hpp"
#include "faery/task.hpp"

namespace faery::meta {

enum class ObjectiveMode { joint, f0_only, f1_only };

std::string to_string(ObjectiveMode mode);
/// Throws ConfigError on unknown names.
ObjectiveMode parse_objective_mode(const std::string& name);

struct MetaConfig {
    std::size_t mu = 24;
    std::size_t lambda = 24;
    std::size_t m_train = 30;
    std::size_t m_test = 30;
    std::size_t g_outer = 100;
    /// Evaluate the prior on test tasks every n-th meta-generation; 0 disables.
    std::size_t test_every = 1;
    ObjectiveMode objectives = ObjectiveMode::joint;
    qd::QdConfig qd;
    std::size_t parallelism = 1;

    void validate() const;
};

struct MetaScore {
    std::size_t f0 = 0;
    double f1 = evo::kWorst;

    bool operator==(const MetaScore&) const = default;
};

/// Forest plus solved node ids of one finished QD instance.
struct InstanceLineage {
    const lineage::EvolutionForest* forest;
    std::span<const lineage::NodeId> solved;
};

/// f0 = solved descendants summed over instances; f1 = -(mean depth) or the
/// worst sentinel when f0 = 0. Throws Error for roots tagged outside
/// [0, candidate_count).
std::vector<MetaScore> compute_meta_scores(std::span<const InstanceLineage> instances, std::size_t candidate_count);

template <typename G>
std::vector<MetaScore> compute_meta_scores(std::span<const qd::QdOutcome<G>> outcomes, std::size_t candidate_count) {
    std::vector<std::vector<lineage::NodeId>> solved;
    std::vector<InstanceLineage> views;
    solved.reserve(outcomes.size());
    views.reserve(outcomes.size());
    for (const auto& o : outcomes) solved.push_back(o.solved_nodes());
    for (std::size_t i = 0; i < outcomes.size(); ++i) views.push_back({&outcomes[i].forest, solved[i]});
    return compute_meta_scores(std::span<const InstanceLineage>(views), candidate_count);
}

evo::ObjectiveVector objectives_for(const MetaScore& s, ObjectiveMode mode);

/// Indices (ascending) of the mu candidates kept for the next prior.
std::vector<std::size_t> select_prior(std::span<const MetaScore> scores, std::size_t mu, ObjectiveMode mode);

struct SplitStats {
    std::size_t tasks = 0;
    std::size_t solved = 0;
    double solved_ratio = 0.0;
    /// NaN when nothing was solved.
    double mean_generations_over_solved = std::numeric_limits<double>::quiet_NaN();
    std::size_t count_unsolved = 0;
    std::uint64_t evaluations = 0;
};

struct ScoreSummary {
    double f0_mean = 0.0;
    std::size_t f0_max = 0;
    std::size_t with_solutions = 0;
    /// Worst sentinel when no candidate has solutions.
    double f1_best = evo::kWorst;
    double f1_mean_finite = std::numeric_limits<double>::quiet_NaN();
};

struct MetaGenReport {
    std::size_t meta_generation = 0;
    SplitStats train;
    std::optional<SplitStats> test;
    ScoreSummary scores;
};

template <typename G>
SplitStats split_stats(std::span<const qd::QdOutcome<G>> outcomes) {
    SplitStats s;
    s.tasks = outcomes.size();
    double sum = 0.0;
    for (const auto& o : outcomes) {
        s.evaluations += o.evaluations;
        if (o.solved) {
            ++s.solved;
            sum += static_cast<double>(*o.generations_used);
        }
    }
    s.count_unsolved = s.tasks - s.solved;
    s.solved_ratio = s.tasks == 0 ? 0.0 : static_cast<double>(s.solved) / static_cast<double>(s.tasks);
    if (s.solved > 0) s.mean_generations_over_solved = sum / static_cast<double>(s.solved);
    return s;
}

ScoreSummary summarize(std::span<const MetaScore> scores);

template <typename G>
struct PriorPopulation {
    std::vector<G> genomes;
    std::vector<MetaScore> scores;

    std::size_t size() const { return genomes.size(); }
};

template <typename G>
using TaskSampler = std::function<std::vector<Task<G>>(std::size_t count, Rng& rng)>;

/// Genome-type specific pieces of the loop.
template <typename G>
struct Domain {
    MutateFn<G> mutate;
    std::function<G(Rng&)> random_genome;
};

template <typename G>
PriorPopulation<G> initial_prior(const Domain<G>& domain, std::size_t mu, std::uint64_t master_seed) {
    auto rng = derive_stream(master_seed, {key(Stream::init_prior)});
    PriorPopulation<G> p;
    for (std::size_t i = 0; i < mu; ++i) {
        p.genomes.push_back(domain.random_genome(rng));
        p.scores.push_back({});
    }
    return p;
}

/// QD runs from `seeds` on each task, fanned out over `parallelism` workers.
/// Instance i draws from stream (master, tag, meta_generation, i).
template <typename G>
std::vector<qd::QdOutcome<G>> run_instances(std::span<const Task<G>> tasks, std::span<const qd::Seed<G>> seeds,
                                            const qd::QdConfig& cfg, const MutateFn<G>& mutate,
                                            std::uint64_t master_seed, Stream tag, std::size_t meta_generation,
                                            std::size_t parallelism) {
    std::vector<qd::QdOutcome<G>> outcomes(tasks.size());
    parallel_for(tasks.size(), parallelism, [&](std::size_t i) {
        auto rng = derive_stream(master_seed, {key(tag), meta_generation, i});
        outcomes[i] = qd::run_qd_instance<G>(tasks[i], seeds, cfg, mutate, rng);
    });
    return outcomes;
}

template <typename G>
std::vector<qd::Seed<G>> as_seeds(std::span<const G> genomes) {
    std::vector<qd::Seed<G>> seeds;
    seeds.reserve(genomes.size());
    for (std::size_t i = 0; i < genomes.size(); ++i) seeds.push_back({genomes[i], i});
    return seeds;
}

/// One meta-generation on the given train tasks. Candidates are the prior
/// (indices [0, mu)) followed by its lambda offspring.
template <typename G>
std::pair<PriorPopulation<G>, MetaGenReport> meta_generation(const PriorPopulation<G>& prior,
                                                              std::span<const Task<G>> tasks, const MetaConfig& cfg,
                                                              const Domain<G>& domain, std::uint64_t master_seed,
                                                              std::size_t meta_generation_index) {
    if (prior.size() != cfg.mu) {
        throw Error("meta_generation: prior has " + std::to_string(prior.size()) + " members, expected " +
                    std::to_string(cfg.mu));
    }
    auto variation_rng = derive_stream(master_seed, {key(Stream::prior_variation), meta_generation_index});
    auto offspring =
        policy::delta_population<G>(std::span<const G>(prior.genomes), cfg.lambda, domain.mutate, variation_rng);

    std::vector<G> candidates = prior.genomes;
    for (auto& g : offspring.genomes) candidates.push_back(std::move(g));
    const auto seeds = as_seeds<G>(candidates);

    const auto outcomes = run_instances<G>(tasks, seeds, cfg.qd, domain.mutate, master_seed, Stream::train_qd,
                                           meta_generation_index, cfg.parallelism);
    const auto scores = compute_meta_scores<G>(outcomes, candidates.size());

    MetaGenReport report;
    report.meta_generation = meta_generation_index;
    report.train = split_stats<G>(outcomes);
    report.scores = summarize(scores);

    PriorPopulation<G> next;
    for (auto i : select_prior(scores, cfg.mu, cfg.objectives)) {
        next.genomes.push_back(candidates[i]);
        next.scores.push_back(scores[i]);
    }
    return {std::move(next), report};
}

/// QD from the prior members alone on freshly sampled test tasks. Pure
/// measurement: uses its own streams and never touches selection.
template <typename G>
SplitStats evaluate_prior(const PriorPopulation<G>& prior, const TaskSampler<G>& test_sampler, const MetaConfig& cfg,
                          const Domain<G>& domain, std::uint64_t master_seed, std::size_t meta_generation_index) {
    auto task_rng = derive_stream(master_seed, {key(Stream::test_tasks), meta_generation_index});
    const auto tasks = test_sampler(cfg.m_test, task_rng);
    const auto seeds = as_seeds<G>(prior.genomes);
    const auto outcomes = run_instances<G>(tasks, seeds, cfg.qd, domain.mutate, master_seed, Stream::test_qd,
                                           meta_generation_index, cfg.parallelism);
    return split_stats<G>(outcomes);
}

template <typename G>
using ReportSink = std::function<void(const MetaGenReport&, const PriorPopulation<G>& next_prior)>;

/// Runs meta-generations [start_generation, g_outer). Meta-generation g
/// samples train tasks from stream (master, train_tasks, g); the test row of g
/// measures the prior that entered g, so row 0 is QD from scratch.
template <typename G>
PriorPopulation<G> run_faery(PriorPopulation<G> prior, const TaskSampler<G>& train_sampler,
                             const TaskSampler<G>* test_sampler, const MetaConfig& cfg, const Domain<G>& domain,
                             std::uint64_t master_seed, const ReportSink<G>& sink, std::size_t start_generation = 0) {
    cfg.validate();
    for (std::size_t g = start_generation; g < cfg.g_outer; ++g) {
        std::optional<SplitStats> test;
        if (test_sampler != nullptr && cfg.test_every > 0 && cfg.m_test > 0 && g % cfg.test_every == 0) {
            test = evaluate_prior<G>(prior, *test_sampler, cfg, domain, master_seed, g);
        }
        auto task_rng = derive_stream(master_seed, {key(Stream::train_tasks), g});
        const auto tasks = train_sampler(cfg.m_train, task_rng);
        auto [next, report] = meta_generation<G>(prior, tasks, cfg, domain, master_seed, g);
        report.test = test;
        prior = std::move(next);
        if (sink) sink(report, prior);
    }
    return prior;
}

} // namespace faery::meta
